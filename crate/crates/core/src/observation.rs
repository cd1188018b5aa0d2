//! Timed measurements, jump observations and the label maps that define
//! which jumps are observable.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::MjpPath;
use crate::rng::{self, Stream};
use crate::state::State;

/// Kind of a jump label. `Empty` is the reserved no-observation element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelTag {
    Empty,
    Sign,
    Admission,
    Regime,
    Discharge,
    Entry,
    Departure,
}

impl LabelTag {
    pub const ALL: [LabelTag; 7] = [
        LabelTag::Empty,
        LabelTag::Sign,
        LabelTag::Admission,
        LabelTag::Regime,
        LabelTag::Discharge,
        LabelTag::Entry,
        LabelTag::Departure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LabelTag::Empty => "empty",
            LabelTag::Sign => "sign",
            LabelTag::Admission => "admission",
            LabelTag::Regime => "regime",
            LabelTag::Discharge => "discharge",
            LabelTag::Entry => "entry",
            LabelTag::Departure => "departure",
        }
    }

    pub fn parse(s: &str) -> Option<LabelTag> {
        LabelTag::ALL.iter().copied().find(|t| t.as_str() == s)
    }
}

/// A jump observation value: a tag plus an integer payload (sign, count or
/// regime index depending on the tag).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JumpLabel {
    pub tag: LabelTag,
    pub payload: i64,
}

impl JumpLabel {
    pub const EMPTY: JumpLabel = JumpLabel {
        tag: LabelTag::Empty,
        payload: 0,
    };

    pub const fn new(tag: LabelTag, payload: i64) -> Self {
        JumpLabel { tag, payload }
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.tag == LabelTag::Empty
    }
}

impl fmt::Debug for JumpLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "∅")
        } else {
            write!(f, "{}({})", self.tag.as_str(), self.payload)
        }
    }
}

/// Observable content of a jump between two states.
pub trait JumpLabelMap: Send + Sync {
    /// Must return [`JumpLabel::EMPTY`] for `from == to` and for pairs that
    /// are not one-jump reachable.
    fn label(&self, from: &State, to: &State) -> JumpLabel;

    /// Appends every `x` with `label(x, to) == label` and a positive rate
    /// `x -> to`. Self-transitions are never included.
    fn compatible_predecessors(&self, to: &State, label: JumpLabel, out: &mut Vec<State>);

    /// Every non-empty tag this map can emit.
    fn emitted_tags(&self) -> Vec<LabelTag>;
}

/// The sign map for integer-valued birth-death processes.
pub fn birth_death_sign_label(x: i64, to: i64) -> JumpLabel {
    let d = to - x;
    if d.abs() == 1 {
        JumpLabel::new(LabelTag::Sign, d)
    } else {
        JumpLabel::EMPTY
    }
}

/// Per-tag retrieval probability `q_Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetrievalProbs {
    probs: [f64; 7],
}

impl RetrievalProbs {
    pub fn uniform(q: f64) -> Result<Self> {
        check_prob(q)?;
        let mut probs = [q; 7];
        probs[LabelTag::Empty as usize] = 0.0;
        Ok(RetrievalProbs { probs })
    }

    pub fn none() -> Self {
        RetrievalProbs { probs: [0.0; 7] }
    }

    pub fn with(mut self, tag: LabelTag, q: f64) -> Result<Self> {
        check_prob(q)?;
        if tag == LabelTag::Empty {
            return Err(Error::InvalidArgument("∅ is never retrieved".into()));
        }
        self.probs[tag as usize] = q;
        Ok(self)
    }

    #[inline]
    pub fn get(&self, tag: LabelTag) -> f64 {
        self.probs[tag as usize]
    }

    /// Largest retrieval probability among the given tags that are not
    /// fully observed. Fully observed channels (q = 1) never appear
    /// unobserved and do not limit the slice parameter.
    pub fn max_partial(&self, tags: &[LabelTag]) -> f64 {
        tags.iter()
            .map(|&t| self.get(t))
            .filter(|&q| q < 1.0)
            .fold(0.0, f64::max)
    }
}

fn check_prob(q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "retrieval probability {q} outside [0, 1]"
        )))
    }
}

/// Measurement value of a timed observation.
#[derive(Clone)]
pub enum ObsValue {
    /// The full state is observed.
    Exact(State),
    /// One coordinate is observed exactly.
    Coordinate { index: usize, value: i64 },
    /// Arbitrary log-likelihood `log f_Y(y | x)`.
    Custom(Arc<dyn Fn(&State) -> f64 + Send + Sync>),
}

impl fmt::Debug for ObsValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObsValue::Exact(s) => write!(f, "Exact({s})"),
            ObsValue::Coordinate { index, value } => write!(f, "Coordinate({index}={value})"),
            ObsValue::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TimedObservation {
    pub time: f64,
    pub value: ObsValue,
}

impl TimedObservation {
    pub fn exact(time: f64, state: State) -> Self {
        TimedObservation {
            time,
            value: ObsValue::Exact(state),
        }
    }

    pub fn log_likelihood(&self, x: &State) -> f64 {
        match &self.value {
            ObsValue::Exact(s) => {
                if s == x {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            ObsValue::Coordinate { index, value } => {
                if x.coords().get(*index) == Some(value) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            ObsValue::Custom(f) => f(x),
        }
    }
}

/// `sum_r log f_Y(Y_r | x)` over the given observations.
pub fn observation_window_loglik(x: &State, obs: &[TimedObservation]) -> f64 {
    let mut acc = 0.0;
    for o in obs {
        acc += o.log_likelihood(x);
        if acc == f64::NEG_INFINITY {
            break;
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpObservation {
    pub time: f64,
    pub label: JumpLabel,
}

/// Retrieved jump observations, strictly increasing in time, none carrying ∅.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JumpObservationSet {
    entries: Vec<JumpObservation>,
}

impl JumpObservationSet {
    pub fn new(entries: Vec<JumpObservation>) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if e.label.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "jump observation at t = {} carries ∅",
                    e.time
                )));
            }
            if i > 0 && entries[i - 1].time >= e.time {
                return Err(Error::InvalidArgument(format!(
                    "jump observation times not strictly increasing at t = {}",
                    e.time
                )));
            }
        }
        Ok(JumpObservationSet { entries })
    }

    pub fn entries(&self) -> &[JumpObservation] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Keeps each labelled jump of `path` independently with probability
/// `q(tag)`. One uniform is drawn per labelled jump whatever its `q`.
pub fn thin_jump_observations(
    path: &MjpPath,
    map: &dyn JumpLabelMap,
    q: &RetrievalProbs,
    seed: u64,
) -> JumpObservationSet {
    let mut rng = rng::stream(seed, Stream::Observe, &[]);
    let mut entries = Vec::new();
    for i in 1..path.states.len() {
        let label = map.label(&path.states[i - 1], &path.states[i]);
        if label.is_empty() {
            continue;
        }
        let u: f64 = rng.random();
        if u < q.get(label.tag) {
            entries.push(JumpObservation {
                time: path.times[i],
                label,
            });
        }
    }
    JumpObservationSet { entries }
}

/// All evidence attached to one observed process.
#[derive(Debug, Clone, Default)]
pub struct Evidence {
    /// Sorted by time.
    pub timed: Vec<TimedObservation>,
    pub jumps: JumpObservationSet,
}

impl Evidence {
    pub fn new(mut timed: Vec<TimedObservation>, jumps: JumpObservationSet) -> Self {
        timed.sort_by(|a, b| a.time.total_cmp(&b.time));
        Evidence { timed, jumps }
    }

    /// Whether every jump observation sits on a real jump of `path` that
    /// carries the same label.
    pub fn jumps_match(&self, path: &MjpPath, map: &dyn JumpLabelMap) -> bool {
        let mut j = 1;
        for z in self.jumps.entries() {
            while j < path.times.len() && path.times[j] < z.time {
                j += 1;
            }
            if j >= path.times.len() || path.times[j] != z.time {
                return false;
            }
            if map.label(&path.states[j - 1], &path.states[j]) != z.label {
                return false;
            }
        }
        true
    }

    /// Log-likelihood of the timed observations along `path`.
    pub fn timed_loglik(&self, path: &MjpPath) -> f64 {
        self.timed
            .iter()
            .map(|o| o.log_likelihood(&path.state_at(o.time)))
            .sum()
    }
}

/// One line of an observation JSON-lines file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationRecord {
    pub t: f64,
    pub kind: ObservationKind,
    pub tag: String,
    pub payload: Payload,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub process: usize,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationKind {
    Timed,
    Jump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Int(i64),
    Ints(Vec<i64>),
}

impl ObservationRecord {
    pub fn from_jump(z: &JumpObservation, process: usize) -> Self {
        ObservationRecord {
            t: z.time,
            kind: ObservationKind::Jump,
            tag: z.label.tag.as_str().to_string(),
            payload: Payload::Int(z.label.payload),
            process,
        }
    }

    /// `None` for custom likelihood observations, which have no file form.
    pub fn from_timed(y: &TimedObservation, process: usize) -> Option<Self> {
        let (tag, payload) = match &y.value {
            ObsValue::Exact(s) => ("exact", Payload::Ints(s.coords().to_vec())),
            ObsValue::Coordinate { index, value } => {
                ("coord", Payload::Ints(vec![*index as i64, *value]))
            }
            ObsValue::Custom(_) => return None,
        };
        Some(ObservationRecord {
            t: y.time,
            kind: ObservationKind::Timed,
            tag: tag.to_string(),
            payload,
            process,
        })
    }
}

/// Writes evidence for several processes as JSON lines, timed observations
/// first within each process.
pub fn write_observations<W: Write>(mut w: W, evidence: &[Evidence]) -> Result<()> {
    for (k, ev) in evidence.iter().enumerate() {
        for y in &ev.timed {
            if let Some(rec) = ObservationRecord::from_timed(y, k) {
                serde_json::to_writer(&mut w, &rec)?;
                writeln!(w)?;
            }
        }
        for z in ev.jumps.entries() {
            serde_json::to_writer(&mut w, &ObservationRecord::from_jump(z, k))?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Reads an observation JSON-lines file into per-process evidence. The
/// result has at least `min_processes` entries.
pub fn read_observations<R: BufRead>(r: R, min_processes: usize) -> Result<Vec<Evidence>> {
    let mut timed: Vec<Vec<TimedObservation>> = vec![Vec::new(); min_processes];
    let mut jumps: Vec<Vec<JumpObservation>> = vec![Vec::new(); min_processes];
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ObservationRecord = serde_json::from_str(&line)?;
        let bad =
            |why: &str| Error::InvalidArgument(format!("observation line {}: {why}", lineno + 1));
        if !rec.t.is_finite() || rec.t < 0.0 {
            return Err(bad("time must be finite and nonnegative"));
        }
        if rec.process >= timed.len() {
            timed.resize(rec.process + 1, Vec::new());
            jumps.resize(rec.process + 1, Vec::new());
        }
        match rec.kind {
            ObservationKind::Timed => {
                let value = match (rec.tag.as_str(), &rec.payload) {
                    ("exact", Payload::Ints(v))
                        if !v.is_empty() && v.len() <= crate::state::MAX_DIM =>
                    {
                        ObsValue::Exact(State::new(v))
                    }
                    ("coord", Payload::Ints(v)) if v.len() == 2 && v[0] >= 0 => {
                        ObsValue::Coordinate {
                            index: v[0] as usize,
                            value: v[1],
                        }
                    }
                    _ => return Err(bad("unsupported timed observation")),
                };
                timed[rec.process].push(TimedObservation { time: rec.t, value });
            }
            ObservationKind::Jump => {
                let tag = LabelTag::parse(&rec.tag).ok_or_else(|| bad("unknown label tag"))?;
                let payload = match rec.payload {
                    Payload::Int(p) => p,
                    _ => return Err(bad("jump payload must be an integer")),
                };
                jumps[rec.process].push(JumpObservation {
                    time: rec.t,
                    label: JumpLabel::new(tag, payload),
                });
            }
        }
    }
    timed
        .into_iter()
        .zip(jumps)
        .map(|(t, mut j)| {
            j.sort_by(|a, b| a.time.total_cmp(&b.time));
            Ok(Evidence::new(t, JumpObservationSet::new(j)?))
        })
        .collect()
}
