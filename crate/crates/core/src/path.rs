//! Piecewise-constant jump paths, with and without virtual self-transitions.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GeneratorModel;
use crate::rates::RateParams;
use crate::state::State;

/// A jump path on `[0, T]`: `times[0] = 0 < times[1] < ... < times[n] < T`,
/// with `states[i]` occupied on `[times[i], times[i+1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MjpPath {
    pub horizon: f64,
    pub times: Vec<f64>,
    pub states: Vec<State>,
}

/// A uniformized path: same layout as [`MjpPath`] but self-transitions
/// (virtual jumps) are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformizedPath {
    pub horizon: f64,
    pub times: Vec<f64>,
    pub states: Vec<State>,
}

fn check_layout(horizon: f64, times: &[f64], states: &[State]) -> Result<()> {
    let bad = |m: String| Err(Error::MalformedPath(m));
    if !(horizon.is_finite() && horizon >= 0.0) {
        return bad(format!("horizon {horizon} must be finite and nonnegative"));
    }
    if times.is_empty() || times.len() != states.len() {
        return bad(format!("{} times for {} states", times.len(), states.len()));
    }
    if times[0] != 0.0 {
        return bad(format!("path must start at t = 0, got {}", times[0]));
    }
    let dim = states[0].dim();
    if states.iter().any(|s| s.dim() != dim) {
        return bad("states have mixed dimensions".into());
    }
    for i in 1..times.len() {
        if !(times[i] > times[i - 1]) {
            return bad(format!("times not strictly increasing at index {i}"));
        }
        if !(times[i] < horizon) {
            return bad(format!(
                "jump time {} not below horizon {horizon}",
                times[i]
            ));
        }
    }
    Ok(())
}

impl MjpPath {
    pub fn new(times: Vec<f64>, states: Vec<State>, horizon: f64) -> Result<Self> {
        check_layout(horizon, &times, &states)?;
        for i in 1..states.len() {
            if states[i] == states[i - 1] {
                return Err(Error::MalformedPath(format!(
                    "self-transition at index {i} in a non-uniformized path"
                )));
            }
        }
        Ok(MjpPath {
            horizon,
            times,
            states,
        })
    }

    pub fn constant(state: State, horizon: f64) -> Self {
        MjpPath {
            horizon,
            times: vec![0.0],
            states: vec![state],
        }
    }

    pub fn num_jumps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn final_state(&self) -> State {
        *self.states.last().expect("paths are never empty")
    }

    /// State occupied at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> State {
        let idx = self.times.partition_point(|&s| s <= t);
        self.states[idx.saturating_sub(1)]
    }

    /// Checks every jump has a positive rate under the model.
    pub fn check_against(&self, model: &dyn GeneratorModel, rates: &RateParams) -> Result<()> {
        check_layout(self.horizon, &self.times, &self.states)?;
        for i in 1..self.states.len() {
            if model.rate(&self.states[i - 1], &self.states[i], rates) <= 0.0 {
                return Err(Error::MalformedPath(format!(
                    "jump {} -> {} at index {i} has zero rate",
                    self.states[i - 1],
                    self.states[i]
                )));
            }
        }
        Ok(())
    }

    pub fn as_uniformized(&self) -> UniformizedPath {
        UniformizedPath {
            horizon: self.horizon,
            times: self.times.clone(),
            states: self.states.clone(),
        }
    }
}

impl UniformizedPath {
    pub fn new(times: Vec<f64>, states: Vec<State>, horizon: f64) -> Result<Self> {
        check_layout(horizon, &times, &states)?;
        Ok(UniformizedPath {
            horizon,
            times,
            states,
        })
    }

    /// Number of uniformized transitions `m`.
    pub fn num_transitions(&self) -> usize {
        self.states.len() - 1
    }

    pub fn num_virtual(&self) -> usize {
        self.states.windows(2).filter(|w| w[0] == w[1]).count()
    }
}

/// Drops every self-transition, keeping the remaining times and states in order.
pub fn strip_virtual(upath: &UniformizedPath) -> MjpPath {
    let mut times = vec![upath.times[0]];
    let mut states = vec![upath.states[0]];
    for i in 1..upath.states.len() {
        if upath.states[i] != *states.last().unwrap() {
            times.push(upath.times[i]);
            states.push(upath.states[i]);
        }
    }
    MjpPath {
        horizon: upath.horizon,
        times,
        states,
    }
}

/// Transition counts `psi[x -> x']` and holding times `tau[x]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SufficientStats {
    pub transition_counts: BTreeMap<(State, State), u64>,
    pub holding_times: BTreeMap<State, f64>,
}

impl SufficientStats {
    pub fn total_transitions(&self) -> u64 {
        self.transition_counts.values().sum()
    }

    pub fn total_time(&self) -> f64 {
        self.holding_times.values().sum()
    }

    pub fn count(&self, from: State, to: State) -> u64 {
        self.transition_counts
            .get(&(from, to))
            .copied()
            .unwrap_or(0)
    }

    pub fn time_in(&self, x: State) -> f64 {
        self.holding_times.get(&x).copied().unwrap_or(0.0)
    }
}

/// Counts non-virtual transitions and accumulates occupancy, including the
/// final segment `(t_n, T]`. Accepts uniformized paths as well: virtual
/// jumps contribute nothing.
pub fn sufficient_statistics(times: &[f64], states: &[State], horizon: f64) -> SufficientStats {
    let mut st = SufficientStats::default();
    for i in 0..states.len() {
        let end = times.get(i + 1).copied().unwrap_or(horizon);
        *st.holding_times.entry(states[i]).or_insert(0.0) += end - times[i];
        if i > 0 && states[i] != states[i - 1] {
            *st.transition_counts
                .entry((states[i - 1], states[i]))
                .or_insert(0) += 1;
        }
    }
    st
}

impl MjpPath {
    pub fn sufficient_statistics(&self) -> SufficientStats {
        sufficient_statistics(&self.times, &self.states, self.horizon)
    }
}

/// JSON-lines record for one path.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathRecord {
    horizon: f64,
    times: Vec<f64>,
    states: Vec<State>,
}

pub fn write_paths<W: Write>(mut w: W, paths: &[MjpPath]) -> Result<()> {
    for p in paths {
        let rec = PathRecord {
            horizon: p.horizon,
            times: p.times.clone(),
            states: p.states.clone(),
        };
        serde_json::to_writer(&mut w, &rec)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_paths<R: BufRead>(r: R) -> Result<Vec<MjpPath>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PathRecord = serde_json::from_str(&line)?;
        out.push(MjpPath::new(rec.times, rec.states, rec.horizon)?);
    }
    Ok(out)
}
