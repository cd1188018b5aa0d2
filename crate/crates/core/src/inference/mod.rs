//! Conjugate rate updates, membership updates and the outer Gibbs loop.

mod init;
mod mcmc;

pub use init::{initial_path, initial_rates};
pub use mcmc::{
    run_mcmc, write_memberships_csv, write_timing_csv, write_trace_csv, ChainOutput, McmcConfig,
    McmcRun, Sample, Sampler,
};

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::distribution::{ContinuousCDF, Gamma as GammaDist};

use crate::error::{Error, Result};
use crate::model::{GeneratorModel, Move};
use crate::path::MjpPath;
use crate::rates::{OrderConstraint, ParamRef, RateId, RateParams};

pub const DEFAULT_PRIOR_SHAPE: f64 = 1.0;
pub const DEFAULT_PRIOR_RATE: f64 = 0.01;

/// Independent Gamma(shape, rate) priors, one per rate id.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePrior {
    pub shape: Vec<f64>,
    pub rate: Vec<f64>,
}

impl RatePrior {
    pub fn uniform(n: usize, shape: f64, rate: f64) -> Result<Self> {
        let p = RatePrior {
            shape: vec![shape; n],
            rate: vec![rate; n],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn default_for(rates: &RateParams) -> Self {
        RatePrior {
            shape: vec![DEFAULT_PRIOR_SHAPE; rates.len()],
            rate: vec![DEFAULT_PRIOR_RATE; rates.len()],
        }
    }

    pub fn set(&mut self, id: RateId, shape: f64, rate: f64) -> Result<()> {
        self.shape[id] = shape;
        self.rate[id] = rate;
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: &f64| v.is_finite() && *v > 0.0;
        if self.shape.len() != self.rate.len()
            || !self.shape.iter().all(ok)
            || !self.rate.iter().all(ok)
        {
            return Err(Error::InvalidArgument(
                "prior hyperparameters must be positive".into(),
            ));
        }
        Ok(())
    }

    fn posterior(&self, id: RateId, pools: &RatePools) -> (f64, f64) {
        (
            self.shape[id] + pools.psi[id],
            self.rate[id] + pools.tau[id],
        )
    }
}

/// Prior class probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipPrior {
    pub probs: Vec<f64>,
}

impl MembershipPrior {
    pub fn uniform(l: usize) -> Self {
        MembershipPrior {
            probs: vec![1.0 / l as f64; l],
        }
    }

    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let total: f64 = probs.iter().sum();
        if probs.is_empty() || probs.iter().any(|p| !(*p > 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(
                "membership prior must be positive and sum to 1".into(),
            ));
        }
        Ok(MembershipPrior { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Per-rate transition counts `psi` and integrated exposure `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePools {
    pub psi: Vec<f64>,
    pub tau: Vec<f64>,
}

impl RatePools {
    pub fn zeros(n: usize) -> Self {
        RatePools {
            psi: vec![0.0; n],
            tau: vec![0.0; n],
        }
    }

    pub fn add(&mut self, other: &RatePools) {
        for (a, b) in self.psi.iter_mut().zip(&other.psi) {
            *a += b;
        }
        for (a, b) in self.tau.iter_mut().zip(&other.tau) {
            *a += b;
        }
    }

    /// `sum_id psi_id ln(r_id) - r_id tau_id`: the path log-density up to a
    /// term that does not depend on the rates.
    pub fn log_density(&self, rates: &RateParams) -> f64 {
        let mut lp = 0.0;
        for id in 0..self.psi.len() {
            let r = rates.value(id);
            if self.psi[id] > 0.0 {
                if r <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                lp += self.psi[id] * r.ln();
            }
            lp -= r * self.tau[id];
        }
        lp
    }
}

/// Pools of one path: each jump is credited to the rate driving it, and
/// each segment adds `weight * duration` to every rate acting on it.
pub fn path_pools(path: &MjpPath, model: &dyn GeneratorModel, n_rates: usize) -> Result<RatePools> {
    let mut pools = RatePools::zeros(n_rates);
    let mut moves: Vec<Move> = Vec::new();
    let n = path.states.len();
    for i in 0..n {
        let x = &path.states[i];
        let end = if i + 1 < n {
            path.times[i + 1]
        } else {
            path.horizon
        };
        let dt = end - path.times[i];
        moves.clear();
        model.moves_out(x, &mut moves);
        for mv in &moves {
            pools.tau[mv.rate] += mv.weight * dt;
        }
        if i + 1 < n {
            let to = &path.states[i + 1];
            let mv = moves.iter().find(|mv| mv.state == *to).ok_or_else(|| {
                Error::MalformedPath(format!(
                    "jump {x} -> {to} at t = {} is not a model transition",
                    end
                ))
            })?;
            pools.psi[mv.rate] += 1.0;
        }
    }
    Ok(pools)
}

/// Pools over the members of cluster `l`.
pub fn rate_sufficient_pools(
    paths: &[MjpPath],
    memberships: &[usize],
    l: usize,
    model: &dyn GeneratorModel,
    n_rates: usize,
) -> Result<RatePools> {
    let mut total = RatePools::zeros(n_rates);
    for (p, &c) in paths.iter().zip(memberships) {
        if c == l {
            total.add(&path_pools(p, model, n_rates)?);
        }
    }
    Ok(total)
}

const MAX_JOINT_REJECTIONS: usize = 1000;

fn gamma_draw<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    let g = Gamma::new(shape, 1.0 / rate)
        .map_err(|e| Error::Inference(format!("gamma({shape}, {rate}): {e}")))?;
    Ok(g.sample(rng))
}

/// Exact draw from Gamma(shape, rate) restricted to `(lo, inf)` for `lo`
/// beyond the mode, by rejection from a shifted exponential.
fn gamma_right_tail<R: Rng + ?Sized>(shape: f64, rate: f64, lo: f64, rng: &mut R) -> f64 {
    let slope = if shape > 1.0 {
        rate - (shape - 1.0) / lo
    } else {
        rate
    };
    loop {
        let e: f64 = -(1.0 - rng.random::<f64>()).ln();
        let x = lo + e / slope;
        let log_acc = (shape - 1.0) * (x / lo).ln() - (rate - slope) * (x - lo);
        if (1.0 - rng.random::<f64>()).ln() <= log_acc {
            return x;
        }
    }
}

/// Gamma(shape, rate) truncated to `(lo, hi)` by inverse CDF.
pub fn truncated_gamma<R: Rng + ?Sized>(
    shape: f64,
    rate: f64,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<f64> {
    let d = GammaDist::new(shape, rate)
        .map_err(|e| Error::Inference(format!("gamma({shape}, {rate}): {e}")))?;
    let lo = lo.max(0.0);
    if !(lo < hi) {
        return Err(Error::Inference(format!(
            "empty truncation interval ({lo}, {hi})"
        )));
    }
    let u: f64 = rng.random();
    let (flo, fhi) = (d.cdf(lo), if hi.is_finite() { d.cdf(hi) } else { 1.0 });
    let x = if fhi - flo > 1e-12 {
        d.inverse_cdf(flo + u * (fhi - flo))
    } else if flo > 0.5 {
        // Both bounds deep in the right tail, where the CDF is flat to
        // double precision.
        let mut x = f64::NAN;
        for _ in 0..1000 {
            let t = gamma_right_tail(shape, rate, lo, rng);
            if t < hi {
                x = t;
                break;
            }
        }
        if x.is_nan() {
            lo + u * (hi - lo)
        } else {
            x
        }
    } else {
        lo + u * (hi - lo)
    };
    Ok(x.clamp(lo, hi).max(f64::MIN_POSITIVE))
}

fn group_of(constraints: &[OrderConstraint]) -> Vec<ParamRef> {
    let mut refs: Vec<ParamRef> = constraints
        .iter()
        .flat_map(|c| [c.lower, c.upper])
        .collect();
    refs.sort();
    refs.dedup();
    refs
}

/// Bounds on `target` implied by the constraints given the other values.
fn bounds(target: ParamRef, constraints: &[OrderConstraint], sets: &[RateParams]) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for c in constraints {
        if c.upper == target && c.lower != target {
            lo = lo.max(c.factor * sets[c.lower.cluster].value(c.lower.rate));
        }
        if c.lower == target && c.upper != target {
            hi = hi.min(sets[c.upper.cluster].value(c.upper.rate) / c.factor);
        }
    }
    (lo, hi)
}

/// Draws every free rate of every cluster from its conjugate posterior.
///
/// Rates touched by order constraints are drawn jointly by rejection from
/// the unconstrained product; if no joint draw satisfies the constraints
/// within a fixed budget, they are instead updated by one sweep of
/// truncated conditional draws starting from `current`, which must satisfy
/// the constraints.
pub fn gibbs_rate_update<R: Rng + ?Sized>(
    pools: &[RatePools],
    current: &[RateParams],
    prior: &RatePrior,
    constraints: &[OrderConstraint],
    rng: &mut R,
) -> Result<Vec<RateParams>> {
    let mut next: Vec<RateParams> = current.to_vec();
    let constrained = group_of(constraints);
    for (l, set) in next.iter_mut().enumerate() {
        for id in 0..set.len() {
            if set.is_fixed(id)
                || constrained
                    .binary_search(&ParamRef {
                        cluster: l,
                        rate: id,
                    })
                    .is_ok()
            {
                continue;
            }
            let (a, b) = prior.posterior(id, &pools[l]);
            set.set(id, gamma_draw(a, b, rng)?);
        }
    }
    if constrained.is_empty() {
        return Ok(next);
    }
    for r in &constrained {
        if next[r.cluster].is_fixed(r.rate) {
            return Err(Error::Inference(format!(
                "order constraint on fixed rate `{}`",
                next[r.cluster].name(r.rate)
            )));
        }
    }
    let mut proposal = next.clone();
    for _ in 0..MAX_JOINT_REJECTIONS {
        for r in &constrained {
            let (a, b) = prior.posterior(r.rate, &pools[r.cluster]);
            proposal[r.cluster].set(r.rate, gamma_draw(a, b, rng)?);
        }
        if constraints.iter().all(|c| c.holds(&proposal)) {
            return Ok(proposal);
        }
    }
    if !constraints.iter().all(|c| c.holds(&next)) {
        return Err(Error::Inference(
            "current rates violate the order constraints".into(),
        ));
    }
    for r in &constrained {
        let (lo, hi) = bounds(*r, constraints, &next);
        let (a, b) = prior.posterior(r.rate, &pools[r.cluster]);
        let v = truncated_gamma(a, b, lo, hi, rng)?;
        next[r.cluster].set(r.rate, v);
    }
    if !constraints.iter().all(|c| c.holds(&next)) {
        return Err(Error::Inference(
            "order constraints cannot be satisfied".into(),
        ));
    }
    Ok(next)
}

/// Draws each membership from `P(c = l) ∝ f(X^k | Q^l) π_l`, working with
/// the rate-dependent part of the path log-density.
pub fn gibbs_membership_update<R: Rng + ?Sized>(
    pools: &[RatePools],
    rate_sets: &[RateParams],
    prior: &MembershipPrior,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let l = rate_sets.len();
    if prior.len() != l {
        return Err(Error::InvalidArgument(format!(
            "{} prior classes for {l} rate sets",
            prior.len()
        )));
    }
    let mut out = Vec::with_capacity(pools.len());
    let mut lw = vec![0.0; l];
    for (k, p) in pools.iter().enumerate() {
        for c in 0..l {
            lw[c] = p.log_density(&rate_sets[c]) + prior.probs[c].ln();
        }
        let top = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Err(Error::Inference(format!(
                "process {k} has zero density under every class"
            )));
        }
        let w: Vec<f64> = lw.iter().map(|v| (v - top).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = l - 1;
        for (c, wc) in w.iter().enumerate() {
            if u < *wc {
                pick = c;
                break;
            }
            u -= wc;
        }
        out.push(pick);
    }
    Ok(out)
}
