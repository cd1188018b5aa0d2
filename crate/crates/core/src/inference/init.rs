use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::{truncated_gamma, RatePrior};
use crate::error::{Error, Result};
use crate::ffbs::{
    backward_sample, build_restrictions, forward_filter, AuxiliarySequence, SliceConfig,
};
use crate::model::Model;
use crate::observation::{Evidence, RetrievalProbs};
use crate::path::{strip_virtual, MjpPath};
use crate::rates::{OrderConstraint, ParamRef, RateParams};
use crate::simulate::simulate_from;

/// Draws every free rate of `clusters` copies of `base` from the prior.
/// Constrained rates are drawn in topological order of the constraint
/// graph, each truncated below by the values already placed beneath it.
pub fn initial_rates<R: Rng + ?Sized>(
    base: &RateParams,
    prior: &RatePrior,
    constraints: &[OrderConstraint],
    clusters: usize,
    rng: &mut R,
) -> Result<Vec<RateParams>> {
    let mut sets = vec![base.clone(); clusters];
    let mut nodes: Vec<ParamRef> = constraints
        .iter()
        .flat_map(|c| [c.lower, c.upper])
        .collect();
    nodes.sort();
    nodes.dedup();
    for (l, set) in sets.iter_mut().enumerate() {
        for id in 0..set.len() {
            if set.is_fixed(id)
                || nodes
                    .binary_search(&ParamRef {
                        cluster: l,
                        rate: id,
                    })
                    .is_ok()
            {
                continue;
            }
            let g = Gamma::new(prior.shape[id], 1.0 / prior.rate[id])
                .map_err(|e| Error::Inference(format!("prior for `{}`: {e}", set.name(id))))?;
            set.set(id, g.sample(rng));
        }
    }
    // Kahn's algorithm, always taking the smallest ready node.
    let mut indegree: Vec<usize> = nodes
        .iter()
        .map(|n| constraints.iter().filter(|c| c.upper == *n).count())
        .collect();
    let mut done = vec![false; nodes.len()];
    for _ in 0..nodes.len() {
        let Some(i) = (0..nodes.len()).find(|&i| !done[i] && indegree[i] == 0) else {
            return Err(Error::Inference("order constraints contain a cycle".into()));
        };
        done[i] = true;
        let n = nodes[i];
        if sets[n.cluster].is_fixed(n.rate) {
            return Err(Error::Inference(format!(
                "order constraint on fixed rate `{}`",
                sets[n.cluster].name(n.rate)
            )));
        }
        let lo = constraints
            .iter()
            .filter(|c| c.upper == n)
            .map(|c| c.factor * sets[c.lower.cluster].value(c.lower.rate))
            .fold(0.0, f64::max);
        let v = truncated_gamma(
            prior.shape[n.rate],
            prior.rate[n.rate],
            lo,
            f64::INFINITY,
            rng,
        )?;
        sets[n.cluster].set(n.rate, v);
        for c in constraints.iter().filter(|c| c.lower == n) {
            let j = nodes.binary_search(&c.upper).expect("node listed");
            indegree[j] -= 1;
        }
    }
    if !constraints.iter().all(|c| c.holds(&sets)) {
        return Err(Error::Inference(
            "could not place initial rates inside the constraints".into(),
        ));
    }
    Ok(sets)
}

const INIT_ROUNDS: usize = 10;

/// A starting path with positive posterior density: plain FFBS over a
/// random grid that contains every jump-observation time, refined until
/// the evidence can be threaded through it.
pub fn initial_path<R: Rng + ?Sized>(
    model: &dyn Model,
    rates: &RateParams,
    evidence: &Evidence,
    retrieval: &RetrievalProbs,
    horizon: f64,
    omega: f64,
    rng: &mut R,
) -> Result<MjpPath> {
    let x0 = model.initial_state();
    if evidence.timed.is_empty() && evidence.jumps.is_empty() {
        return simulate_from(model, rates, x0, horizon, rng);
    }
    if horizon <= 0.0 {
        return Ok(MjpPath::constant(x0, horizon));
    }
    let cfg = SliceConfig::baseline(*retrieval);
    let mut n = 16 + 4 * (evidence.jumps.len() + evidence.timed.len());
    for _ in 0..INIT_ROUNDS {
        let mut times: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0.0..horizon))
            .filter(|&t| t > 0.0)
            .collect();
        times.extend(evidence.jumps.entries().iter().map(|z| z.time));
        times.push(0.0);
        times.sort_by(f64::total_cmp);
        times.dedup();
        let aux = AuxiliarySequence::all_open(times.len() - 1);
        let restrictions = build_restrictions(&times, &aux, &evidence.jumps)?;
        match forward_filter(
            &times,
            &restrictions,
            &evidence.timed,
            model,
            rates,
            omega,
            &cfg,
            x0,
        ) {
            Ok(frontiers) => {
                let up = backward_sample(
                    &frontiers,
                    &times,
                    horizon,
                    &restrictions,
                    model,
                    rates,
                    omega,
                    &cfg,
                    rng,
                )?;
                return Ok(strip_virtual(&up));
            }
            Err(Error::InfeasibleSlice { .. }) => n *= 2,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Inference(
        "could not construct a starting path consistent with the observations".into(),
    ))
}
