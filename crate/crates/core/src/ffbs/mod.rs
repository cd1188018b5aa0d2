//! Auxiliary-variable forward filtering, backward sampling.
//!
//! One augmentation step resamples virtual jump times, draws an auxiliary
//! node per uniformized transition, turns nodes and jump observations into
//! per-transition restrictions, filters forward over the finite set of
//! states compatible with those restrictions and samples a new sequence
//! backwards.

mod augment;
mod backward;
mod forward;

pub use augment::{augment_step, AugmentDiagnostics, FrontierHistogram, DEFAULT_RETRY_LIMIT};
pub use backward::backward_sample;
pub use forward::{forward_filter, Frontier};

#[cfg(test)]
pub(crate) use forward::forward_filter_with;

use rand::Rng;

use crate::error::{Error, Result};
use crate::observation::{JumpLabel, JumpLabelMap, JumpObservationSet, RetrievalProbs};
use crate::path::UniformizedPath;
use crate::state::State;

/// Slice parameter `p` together with the retrieval probabilities of the
/// jump observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceConfig {
    p: f64,
    q: RetrievalProbs,
}

impl SliceConfig {
    /// Requires `0 <= p < 1 - q` for every tag the map can emit on a
    /// partially observed channel.
    pub fn new(p: f64, q: RetrievalProbs, map: &dyn JumpLabelMap) -> Result<Self> {
        let qmax = q.max_partial(&map.emitted_tags());
        if !(p >= 0.0 && p < 1.0 - qmax) {
            return Err(Error::SliceConfig(format!(
                "p = {p} must satisfy 0 <= p < 1 - q_Z = {}",
                1.0 - qmax
            )));
        }
        Ok(SliceConfig { p, q })
    }

    pub fn baseline(q: RetrievalProbs) -> Self {
        SliceConfig { p: 0.0, q }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn retrieval(&self) -> &RetrievalProbs {
        &self.q
    }

    /// Probability that the node on a transition carrying `label` is
    /// clamped to that label.
    pub fn clamp_probability(&self, label: JumpLabel) -> f64 {
        if label.is_empty() {
            return self.p;
        }
        let q = self.q.get(label.tag);
        if q >= 1.0 {
            0.0
        } else {
            self.p / (1.0 - q)
        }
    }

    /// Penalty for a pair carrying `label` on an unobserved, open transition.
    /// A fully retrieved channel can never jump unobserved, so it gets zero.
    pub fn phi_label(&self, label: JumpLabel) -> f64 {
        if label.is_empty() {
            return 1.0 - self.p;
        }
        let q = self.q.get(label.tag);
        if q >= 1.0 {
            0.0
        } else {
            (1.0 - q) - self.p
        }
    }
}

pub fn phi(x: &State, to: &State, map: &dyn JumpLabelMap, cfg: &SliceConfig) -> f64 {
    cfg.phi_label(map.label(x, to))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxiliaryNode {
    /// The label set is unrestricted.
    Open,
    /// Pinned to the label of the current transition.
    Clamped(JumpLabel),
}

/// One node per uniformized transition `i = 1..m`, stored at `i - 1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuxiliarySequence {
    pub nodes: Vec<AuxiliaryNode>,
}

impl AuxiliarySequence {
    pub fn all_open(m: usize) -> Self {
        AuxiliarySequence {
            nodes: vec![AuxiliaryNode::Open; m],
        }
    }

    pub fn num_clamped(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| **n != AuxiliaryNode::Open)
            .count()
    }
}

/// Independently clamps each transition to its own label. With `p = 0`
/// nothing is drawn.
pub fn sample_auxiliary<R: Rng + ?Sized>(
    upath: &UniformizedPath,
    map: &dyn JumpLabelMap,
    cfg: &SliceConfig,
    rng: &mut R,
) -> AuxiliarySequence {
    let m = upath.num_transitions();
    if cfg.p == 0.0 {
        return AuxiliarySequence::all_open(m);
    }
    let nodes = upath
        .states
        .windows(2)
        .map(|w| {
            let label = map.label(&w[0], &w[1]);
            if rng.random::<f64>() < cfg.clamp_probability(label) {
                AuxiliaryNode::Clamped(label)
            } else {
                AuxiliaryNode::Open
            }
        })
        .collect();
    AuxiliarySequence { nodes }
}

/// Which state pairs a uniformized transition may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    AllPairs,
    /// Only pairs carrying this label. `Label(∅)` admits self-transitions
    /// and unobservable jumps.
    Label(JumpLabel),
}

/// Intersects each node with the jump observation sitting at the same
/// time, if any. `times` are the uniformized times `t̂_0 = 0, ..., t̂_m`.
pub fn build_restrictions(
    times: &[f64],
    aux: &AuxiliarySequence,
    jumps: &JumpObservationSet,
) -> Result<Vec<Restriction>> {
    let m = times.len().saturating_sub(1);
    if aux.nodes.len() != m {
        return Err(Error::InvalidArgument(format!(
            "{} auxiliary nodes for {m} transitions",
            aux.nodes.len()
        )));
    }
    let mut out: Vec<Restriction> = aux
        .nodes
        .iter()
        .map(|n| match n {
            AuxiliaryNode::Open => Restriction::AllPairs,
            AuxiliaryNode::Clamped(l) => Restriction::Label(*l),
        })
        .collect();
    let mut i = 1;
    for z in jumps.entries() {
        while i <= m && times[i] < z.time {
            i += 1;
        }
        if i > m || times[i] != z.time {
            return Err(Error::UnmatchedObservation { time: z.time });
        }
        match out[i - 1] {
            Restriction::Label(l) if l != z.label => {
                return Err(Error::EmptyRestriction { index: i })
            }
            _ => out[i - 1] = Restriction::Label(z.label),
        }
    }
    Ok(out)
}

/// Index drawn from unnormalized weights with one uniform.
pub(crate) fn draw_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if u < w {
                return Some(i);
            }
            u -= w;
            last = Some(i);
        }
    }
    last
}
