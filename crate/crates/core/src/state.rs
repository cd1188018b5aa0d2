use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest state dimension supported by [`State`].
pub const MAX_DIM: usize = 4;

/// A point in a countable structured state space: a short vector of
/// integer coordinates. Unused trailing slots are always zero, so the
/// derived equality, ordering and hashing compare only the live coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    coords: [i64; MAX_DIM],
    dim: u8,
}

impl State {
    pub fn new(coords: &[i64]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_DIM,
            "state dimension must be in 1..={MAX_DIM}, got {}",
            coords.len()
        );
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        State {
            coords: c,
            dim: coords.len() as u8,
        }
    }

    pub fn scalar(x: i64) -> Self {
        State::new(&[x])
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }

    pub fn get(&self, i: usize) -> i64 {
        self.coords()[i]
    }

    /// Copy with coordinate `i` shifted by `delta`.
    pub fn shifted(&self, i: usize, delta: i64) -> Self {
        let mut s = *self;
        s.coords[i] += delta;
        s
    }

    pub fn with(&self, i: usize, value: i64) -> Self {
        let mut s = *self;
        s.coords[i] = value;
        s
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for State {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.coords().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v: Vec<i64> = Vec::deserialize(deserializer)?;
        if v.is_empty() || v.len() > MAX_DIM {
            return Err(serde::de::Error::custom(format!(
                "state must have 1..={MAX_DIM} coordinates, got {}",
                v.len()
            )));
        }
        Ok(State::new(&v))
    }
}
