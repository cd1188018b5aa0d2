//! Exact (Gillespie) path simulation and the path log-density.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::model::{GeneratorModel, Move};
use crate::path::MjpPath;
use crate::rates::RateParams;
use crate::rng::{self, Stream};
use crate::state::State;

/// Draws a path on `[0, horizon]` from the known initial state.
pub fn simulate_gillespie(
    model: &dyn GeneratorModel,
    rates: &RateParams,
    horizon: f64,
    seed: u64,
) -> Result<MjpPath> {
    let mut rng = rng::stream(seed, Stream::Simulate, &[]);
    simulate_from(model, rates, model.initial_state(), horizon, &mut rng)
}

pub fn simulate_from<R: Rng + ?Sized>(
    model: &dyn GeneratorModel,
    rates: &RateParams,
    x0: State,
    horizon: f64,
    rng: &mut R,
) -> Result<MjpPath> {
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} must be finite and >= 0"
        )));
    }
    let mut times = vec![0.0];
    let mut states = vec![x0];
    let mut moves: Vec<Move> = Vec::new();
    let mut t = 0.0;
    let mut x = x0;
    loop {
        moves.clear();
        model.moves_out(&x, &mut moves);
        let mut exit = 0.0;
        for m in &moves {
            let r = m.rate_value(rates);
            if !r.is_finite() || r < 0.0 {
                return Err(Error::Model(format!("rate {r} for {x} -> {}", m.state)));
            }
            exit += r;
        }
        if exit == 0.0 {
            break;
        }
        t += Exp::new(exit).expect("positive exit rate").sample(rng);
        if t >= horizon {
            break;
        }
        let mut u = rng.random::<f64>() * exit;
        let mut next = moves[moves.len() - 1].state;
        for m in &moves {
            let r = m.rate_value(rates);
            if u < r {
                next = m.state;
                break;
            }
            u -= r;
        }
        x = next;
        times.push(t);
        states.push(x);
    }
    Ok(MjpPath {
        horizon,
        times,
        states,
    })
}

/// Log of the path likelihood: jump rates times survival terms, including
/// the final segment `(t_n, T]`. Returns `-inf` when a jump has zero rate.
pub fn path_log_density(
    path: &MjpPath,
    model: &dyn GeneratorModel,
    rates: &RateParams,
) -> Result<f64> {
    MjpPath::new(path.times.clone(), path.states.clone(), path.horizon)?;
    let mut lp = 0.0;
    for i in 1..path.states.len() {
        let from = &path.states[i - 1];
        let q = model.rate(from, &path.states[i], rates);
        if q <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        lp += q.ln() - model.exit_rate(from, rates) * (path.times[i] - path.times[i - 1]);
    }
    let last = path.states.len() - 1;
    lp -= model.exit_rate(&path.states[last], rates) * (path.horizon - path.times[last]);
    Ok(lp)
}
