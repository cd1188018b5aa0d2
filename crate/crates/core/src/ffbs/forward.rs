use rustc_hash::FxHashMap;

use super::{Restriction, SliceConfig};
use crate::error::{Error, Result};
use crate::model::{Model, Move};
use crate::observation::{observation_window_loglik, JumpLabel, TimedObservation};
use crate::rates::RateParams;
use crate::state::State;

/// Normalized filtering weights over a finite set of states, kept in
/// discovery order.
#[derive(Debug, Clone, Default)]
pub struct Frontier {
    states: Vec<State>,
    weights: Vec<f64>,
    index: FxHashMap<State, usize>,
}

impl Frontier {
    pub fn point(x: State) -> Self {
        let mut f = Frontier::default();
        f.add(x, 1.0);
        f
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Zero for states outside the support.
    pub fn weight(&self, x: &State) -> f64 {
        self.index.get(x).map_or(0.0, |&i| self.weights[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&State, f64)> {
        self.states.iter().zip(self.weights.iter().copied())
    }

    pub(crate) fn add(&mut self, x: State, w: f64) {
        match self.index.get(&x) {
            Some(&i) => self.weights[i] += w,
            None => {
                self.index.insert(x, self.states.len());
                self.states.push(x);
                self.weights.push(w);
            }
        }
    }

    /// Multiplies in the timed-observation likelihood, drops zero weights
    /// and normalizes. Returns `false` when nothing survives.
    pub(crate) fn finish(&mut self, obs: &[TimedObservation]) -> bool {
        if !obs.is_empty() {
            let ll: Vec<f64> = self
                .states
                .iter()
                .map(|x| observation_window_loglik(x, obs))
                .collect();
            let top = ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if top == f64::NEG_INFINITY {
                return false;
            }
            for (w, l) in self.weights.iter_mut().zip(&ll) {
                *w *= (l - top).exp();
            }
        }
        if self.weights.iter().any(|&w| !(w > 0.0)) {
            let (states, weights): (Vec<State>, Vec<f64>) = self
                .iter()
                .filter(|&(_, w)| w > 0.0)
                .map(|(x, w)| (*x, w))
                .unzip();
            self.index = states.iter().enumerate().map(|(i, x)| (*x, i)).collect();
            self.states = states;
            self.weights = weights;
        }
        let total: f64 = self.weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return false;
        }
        for w in &mut self.weights {
            *w /= total;
        }
        true
    }
}

/// Splits sorted timed observations into the windows
/// `[t̂_0, t̂_1), ..., [t̂_m, T]` of the uniformized grid.
pub(crate) fn observation_windows<'a>(
    times: &[f64],
    obs: &'a [TimedObservation],
) -> Vec<&'a [TimedObservation]> {
    let mut out = Vec::with_capacity(times.len());
    let mut j = 0;
    for i in 0..times.len() {
        let start = j;
        let end = times.get(i + 1).copied().unwrap_or(f64::INFINITY);
        while j < obs.len() && obs[j].time < end {
            j += 1;
        }
        out.push(&obs[start..j]);
    }
    out
}

pub(crate) fn check_dominated(omega: f64, exit: f64) -> Result<()> {
    if exit > omega {
        return Err(Error::DominatingRate {
            omega,
            exit_rate: exit,
        });
    }
    Ok(())
}

/// Filtering weights `alpha_0, ..., alpha_m` on the grid `times` under the
/// given restrictions, starting from a point mass at `x0`.
///
/// The penalty `phi` enters only on open transitions without a jump
/// observation. On label-restricted transitions it is constant over all
/// admissible pairs and cancels in the normalization.
#[allow(clippy::too_many_arguments)]
pub fn forward_filter(
    times: &[f64],
    restrictions: &[Restriction],
    timed: &[TimedObservation],
    model: &dyn Model,
    rates: &RateParams,
    omega: f64,
    cfg: &SliceConfig,
    x0: State,
) -> Result<Vec<Frontier>> {
    forward_filter_with(
        times,
        restrictions,
        timed,
        model,
        rates,
        omega,
        cfg,
        x0,
        false,
    )
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn forward_filter_with(
    times: &[f64],
    restrictions: &[Restriction],
    timed: &[TimedObservation],
    model: &dyn Model,
    rates: &RateParams,
    omega: f64,
    cfg: &SliceConfig,
    x0: State,
    phi_everywhere: bool,
) -> Result<Vec<Frontier>> {
    let m = restrictions.len();
    if times.len() != m + 1 {
        return Err(Error::InvalidArgument(format!(
            "{} grid times for {m} restrictions",
            times.len()
        )));
    }
    let windows = observation_windows(times, timed);
    let mut frontiers = Vec::with_capacity(m + 1);
    let mut first = Frontier::point(x0);
    if !first.finish(windows[0]) {
        return Err(Error::InfeasibleSlice { index: 0 });
    }
    frontiers.push(first);
    let mut moves: Vec<Move> = Vec::new();
    for i in 1..=m {
        let r = restrictions[i - 1];
        let factor = |label: JumpLabel| match r {
            Restriction::AllPairs => cfg.phi_label(label),
            Restriction::Label(_) if phi_everywhere => cfg.phi_label(label),
            Restriction::Label(_) => 1.0,
        };
        let allow_self = matches!(
            r,
            Restriction::AllPairs | Restriction::Label(JumpLabel::EMPTY)
        );
        let prev = &frontiers[i - 1];
        let mut next = Frontier::default();
        for (x, a) in prev.iter() {
            moves.clear();
            model.moves_out(x, &mut moves);
            let exit: f64 = moves.iter().map(|mv| mv.rate_value(rates)).sum();
            check_dominated(omega, exit)?;
            if allow_self {
                let w = factor(JumpLabel::EMPTY) * (1.0 - exit / omega) * a;
                if w > 0.0 {
                    next.add(*x, w);
                }
            }
            for mv in &moves {
                let label = model.label(x, &mv.state);
                if let Restriction::Label(j) = r {
                    if label != j {
                        continue;
                    }
                }
                let w = factor(label) * (mv.rate_value(rates) / omega) * a;
                if w > 0.0 {
                    next.add(mv.state, w);
                }
            }
        }
        if !next.finish(windows[i]) {
            return Err(Error::InfeasibleSlice { index: i });
        }
        frontiers.push(next);
    }
    Ok(frontiers)
}
