//! Uniformization: dominating rate, the kernel `P = I + Q / omega`, and
//! resampling of virtual jump times given a path.

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};

use crate::error::{Error, Result};
use crate::model::{GeneratorModel, Move};
use crate::path::{MjpPath, UniformizedPath};
use crate::rates::RateParams;
use crate::state::State;

pub const DEFAULT_OMEGA_SCALE: f64 = 2.0;

/// `omega = scale * rate_bound`, with `scale > 1` so that every state keeps a
/// positive self-transition probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformizationConfig {
    pub scale: f64,
}

impl Default for UniformizationConfig {
    fn default() -> Self {
        UniformizationConfig {
            scale: DEFAULT_OMEGA_SCALE,
        }
    }
}

impl UniformizationConfig {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "omega_scale must be a finite number > 1, got {scale}"
            )));
        }
        Ok(UniformizationConfig { scale })
    }

    pub fn omega(&self, model: &dyn GeneratorModel, rates: &RateParams) -> Result<f64> {
        let bound = model.rate_bound(rates)?;
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::Model(format!(
                "rate bound {bound} must be finite and positive"
            )));
        }
        Ok(self.scale * bound)
    }
}

fn check_dominated(omega: f64, exit_rate: f64) -> Result<()> {
    if exit_rate > omega || !omega.is_finite() {
        return Err(Error::DominatingRate { omega, exit_rate });
    }
    Ok(())
}

/// Sparse row `P[x, .]`: the self-entry first, then each outgoing target in
/// the model's enumeration order.
pub fn kernel_row(
    model: &dyn GeneratorModel,
    rates: &RateParams,
    omega: f64,
    x: &State,
) -> Result<Vec<(State, f64)>> {
    let mut moves = Vec::new();
    model.moves_out(x, &mut moves);
    let exit: f64 = moves.iter().map(|m| m.rate_value(rates)).sum();
    check_dominated(omega, exit)?;
    let mut row = Vec::with_capacity(moves.len() + 1);
    row.push((*x, 1.0 - exit / omega));
    row.extend(moves.iter().map(|m| (m.state, m.rate_value(rates) / omega)));
    Ok(row)
}

/// Inserts virtual self-transitions into every constant segment of `path`:
/// a Poisson count with mean `(omega - exit(x_i)) * duration`, placed as
/// sorted uniforms. Real jumps are kept untouched.
pub fn resample_virtual_times<R: Rng + ?Sized>(
    path: &MjpPath,
    omega: f64,
    model: &dyn GeneratorModel,
    rates: &RateParams,
    rng: &mut R,
) -> Result<UniformizedPath> {
    let n = path.states.len();
    let mut times = Vec::with_capacity(2 * n);
    let mut states = Vec::with_capacity(2 * n);
    let mut buf = Vec::new();
    for i in 0..n {
        let x = path.states[i];
        let lo = path.times[i];
        let hi = if i + 1 < n {
            path.times[i + 1]
        } else {
            path.horizon
        };
        times.push(lo);
        states.push(x);
        let exit = model.exit_rate(&x, rates);
        check_dominated(omega, exit)?;
        let mean = (omega - exit) * (hi - lo);
        if mean <= 0.0 {
            continue;
        }
        let count = Poisson::new(mean)
            .map_err(|e| Error::InvalidArgument(format!("poisson mean {mean}: {e}")))?
            .sample(rng) as usize;
        buf.clear();
        for _ in 0..count {
            let t = rng.random_range(lo..hi);
            if t > lo {
                buf.push(t);
            }
        }
        buf.sort_by(f64::total_cmp);
        buf.dedup();
        for &t in &buf {
            times.push(t);
            states.push(x);
        }
    }
    Ok(UniformizedPath {
        horizon: path.horizon,
        times,
        states,
    })
}

/// Forward simulation through the uniformized chain: exponential(omega)
/// clock ticks, each followed by a draw from `kernel_row`.
pub fn simulate_uniformized<R: Rng + ?Sized>(
    model: &dyn GeneratorModel,
    rates: &RateParams,
    omega: f64,
    x0: State,
    horizon: f64,
    rng: &mut R,
) -> Result<UniformizedPath> {
    let clock =
        Exp::new(omega).map_err(|e| Error::InvalidArgument(format!("omega {omega}: {e}")))?;
    let mut times = vec![0.0];
    let mut states = vec![x0];
    let mut moves: Vec<Move> = Vec::new();
    let mut t = 0.0;
    let mut x = x0;
    loop {
        t += clock.sample(rng);
        if t >= horizon {
            break;
        }
        moves.clear();
        model.moves_out(&x, &mut moves);
        let exit: f64 = moves.iter().map(|m| m.rate_value(rates)).sum();
        check_dominated(omega, exit)?;
        let mut u = rng.random::<f64>() * omega;
        let mut next = x;
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
    Ok(UniformizedPath {
        horizon,
        times,
        states,
    })
}
