use rand::Rng;

use super::{draw_index, Frontier, Restriction, SliceConfig};
use crate::error::{Error, Result};
use crate::model::{Model, Move};
use crate::observation::JumpLabel;
use crate::path::UniformizedPath;
use crate::rates::RateParams;
use crate::state::State;

/// Draws `x̂_m` from `alpha_m`, then each `x̂_{i-1}` from
/// `phi(x, x̂_i) P[x, x̂_i] alpha_{i-1}(x)` over the admissible predecessors
/// found in the stored frontier.
#[allow(clippy::too_many_arguments)]
pub fn backward_sample<R: Rng + ?Sized>(
    frontiers: &[Frontier],
    times: &[f64],
    horizon: f64,
    restrictions: &[Restriction],
    model: &dyn Model,
    rates: &RateParams,
    omega: f64,
    cfg: &SliceConfig,
    rng: &mut R,
) -> Result<UniformizedPath> {
    let m = restrictions.len();
    if frontiers.len() != m + 1 || times.len() != m + 1 {
        return Err(Error::InvalidArgument(format!(
            "{} frontiers and {} times for {m} restrictions",
            frontiers.len(),
            times.len()
        )));
    }
    let last = &frontiers[m];
    let k = draw_index(last.weights(), rng).ok_or(Error::BackwardConsistency { index: m })?;
    let mut states = vec![last.states()[k]; m + 1];

    let mut moves: Vec<Move> = Vec::new();
    let mut preds: Vec<State> = Vec::new();
    let mut cand: Vec<State> = Vec::new();
    let mut w: Vec<f64> = Vec::new();
    for i in (1..=m).rev() {
        let y = states[i];
        let prev = &frontiers[i - 1];
        let r = restrictions[i - 1];
        cand.clear();
        w.clear();
        let allow_self = matches!(
            r,
            Restriction::AllPairs | Restriction::Label(JumpLabel::EMPTY)
        );
        if allow_self {
            let a = prev.weight(&y);
            if a > 0.0 {
                let exit = model.exit_rate(&y, rates);
                let f = if r == Restriction::AllPairs {
                    cfg.phi_label(JumpLabel::EMPTY)
                } else {
                    1.0
                };
                cand.push(y);
                w.push(f * (1.0 - exit / omega) * a);
            }
        }
        match r {
            Restriction::Label(j) if !j.is_empty() => {
                preds.clear();
                model.compatible_predecessors(&y, j, &mut preds);
                for x in &preds {
                    let a = prev.weight(x);
                    if a > 0.0 {
                        cand.push(*x);
                        w.push((model.rate(x, &y, rates) / omega) * a);
                    }
                }
            }
            _ => {
                moves.clear();
                model.moves_in(&y, &mut moves);
                for mv in &moves {
                    let a = prev.weight(&mv.state);
                    if a > 0.0 {
                        let label = model.label(&mv.state, &y);
                        let f = match r {
                            Restriction::AllPairs => cfg.phi_label(label),
                            _ if label.is_empty() => 1.0,
                            _ => continue,
                        };
                        cand.push(mv.state);
                        w.push(f * (mv.rate_value(rates) / omega) * a);
                    }
                }
            }
        }
        let k = draw_index(&w, rng).ok_or(Error::BackwardConsistency { index: i })?;
        states[i - 1] = cand[k];
    }
    Ok(UniformizedPath {
        horizon,
        times: times.to_vec(),
        states,
    })
}
