//! Sparse generator abstraction.
//!
//! A model exposes, for each state, the finite list of transitions leaving
//! (and entering) it. Every transition rate is a single named rate times a
//! nonnegative state-dependent weight, `Q[x, x'] = rates[id] * weight(x)`,
//! which is what makes the Gamma updates in `inference` conjugate.

use crate::error::{Error, Result};
use crate::observation::JumpLabelMap;
use crate::rates::{RateId, RateParams};
use crate::state::State;

/// One transition out of (or into) a state. For `moves_in`, `state` is the
/// source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    pub state: State,
    pub rate: RateId,
    pub weight: f64,
}

impl Move {
    #[inline]
    pub fn rate_value(&self, rates: &RateParams) -> f64 {
        rates.value(self.rate) * self.weight
    }
}

pub trait GeneratorModel: Send + Sync {
    fn name(&self) -> &str;

    fn dimension(&self) -> usize;

    /// The known initial state `x0`.
    fn initial_state(&self) -> State;

    fn rate_names(&self) -> Vec<&'static str>;

    /// Rates with the model's known constants already flagged as fixed.
    fn default_rates(&self) -> RateParams;

    fn is_valid(&self, x: &State) -> bool;

    /// Appends the transitions leaving `x`. Targets are distinct and never `x`.
    fn moves_out(&self, x: &State, out: &mut Vec<Move>);

    /// Appends the transitions entering `x`, with `Move::state` the source.
    fn moves_in(&self, x: &State, out: &mut Vec<Move>);

    /// Global bound on exit rates under `rates`.
    fn rate_bound(&self, rates: &RateParams) -> Result<f64>;

    /// Total weight of transitions out of `x` driven by rate `id`, so that
    /// the exit rate is `sum_id rates[id] * exposure(x, id)`.
    fn exposure(&self, x: &State, id: RateId) -> f64 {
        let mut buf = Vec::new();
        self.moves_out(x, &mut buf);
        buf.iter().filter(|m| m.rate == id).map(|m| m.weight).sum()
    }

    fn outgoing(&self, x: &State, rates: &RateParams) -> Vec<(State, f64)> {
        let mut buf = Vec::new();
        self.moves_out(x, &mut buf);
        buf.iter()
            .map(|m| (m.state, m.rate_value(rates)))
            .filter(|&(_, r)| r > 0.0)
            .collect()
    }

    fn exit_rate(&self, x: &State, rates: &RateParams) -> f64 {
        let mut buf = Vec::new();
        self.moves_out(x, &mut buf);
        buf.iter().map(|m| m.rate_value(rates)).sum()
    }

    /// `Q[x, x']` for `x != x'`, zero when the transition is not possible.
    fn rate(&self, x: &State, to: &State, rates: &RateParams) -> f64 {
        let mut buf = Vec::new();
        self.moves_out(x, &mut buf);
        buf.iter()
            .filter(|m| m.state == *to)
            .map(|m| m.rate_value(rates))
            .sum()
    }
}

/// A generator together with the label map describing what its jumps emit.
pub trait Model: GeneratorModel + JumpLabelMap {}

impl<T: GeneratorModel + JumpLabelMap> Model for T {}

/// Checks the structural invariants of a model at one state: finite,
/// duplicate-free outgoing lists without self-targets, consistency of the
/// incoming lists, and domination of the exit rate by the rate bound.
pub fn check_state(model: &dyn Model, x: &State, rates: &RateParams) -> Result<()> {
    let err = |msg: String| Err(Error::Model(format!("{} at {x}: {msg}", model.name())));
    if x.dim() != model.dimension() {
        return err(format!("dimension {} != {}", x.dim(), model.dimension()));
    }
    let mut out = Vec::new();
    model.moves_out(x, &mut out);
    let mut total = 0.0;
    for (i, m) in out.iter().enumerate() {
        if m.state == *x {
            return err("self-target in outgoing list".into());
        }
        if out[..i].iter().any(|o| o.state == m.state) {
            return err(format!("duplicate target {}", m.state));
        }
        if !(m.weight.is_finite() && m.weight > 0.0) {
            return err(format!("non-positive weight {} to {}", m.weight, m.state));
        }
        if !model.is_valid(&m.state) {
            return err(format!("target {} is not a valid state", m.state));
        }
        total += m.rate_value(rates);
        let mut back = Vec::new();
        model.moves_in(&m.state, &mut back);
        match back.iter().find(|b| b.state == *x) {
            Some(b) if b.rate == m.rate && (b.weight - m.weight).abs() <= 1e-12 * m.weight => {}
            _ => return err(format!("moves_in({}) does not mirror this move", m.state)),
        }
    }
    let exit = model.exit_rate(x, rates);
    if (exit - total).abs() > 1e-12 * total.max(1.0) {
        return err(format!("exit rate {exit} != sum of outgoing {total}"));
    }
    let bound = model.rate_bound(rates)?;
    if exit > bound {
        return err(format!("exit rate {exit} exceeds rate bound {bound}"));
    }
    let mut inc = Vec::new();
    model.moves_in(x, &mut inc);
    for m in &inc {
        if !model.is_valid(&m.state) {
            return err(format!("source {} is not a valid state", m.state));
        }
        if (model.rate(&m.state, x, rates) - m.rate_value(rates)).abs() > 1e-12 {
            return err(format!(
                "incoming move from {} has no outgoing mirror",
                m.state
            ));
        }
    }
    Ok(())
}
