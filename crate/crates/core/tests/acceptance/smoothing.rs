//! Toy chain with exact state observations: sampled occupancy against
//! matrix-exponential smoothing marginals.

use mjpaug::ffbs::{augment_step, AugmentDiagnostics, SliceConfig, DEFAULT_RETRY_LIMIT};
use mjpaug::observation::{Evidence, JumpObservationSet, TimedObservation};
use mjpaug::simulate::simulate_gillespie;
use mjpaug::zoo::ToyThreeState;
use mjpaug::{GeneratorModel, MjpPath, RetrievalProbs, State};

use crate::common::*;
use crate::oracle::{expm, total_variation, toy_generator};

const ALPHA: f64 = 2.0;
const DELTA: f64 = 0.5;
const HORIZON: f64 = 10.0;
const OBS_TIMES: [f64; 5] = [1.0, 3.0, 5.0, 7.0, 9.0];
const KEPT: usize = 50_000;
const BURN_IN: usize = 1_000;

/// Exact marginal of `X_s` given `X_0 = 1` and the observed states.
fn smoothing_marginal(s: f64, obs: &[(f64, usize)]) -> Vec<f64> {
    let q = toy_generator(ALPHA, DELTA);
    let mut anchors = vec![(0.0, 0usize)];
    anchors.extend_from_slice(obs);
    let before = anchors.iter().rev().find(|a| a.0 <= s).copied().unwrap();
    let after = anchors.iter().find(|a| a.0 >= s).copied();
    let left = expm(&q, s - before.0);
    let mut w: Vec<f64> = (0..3).map(|x| left[before.1][x]).collect();
    if let Some((t, j)) = after {
        let right = expm(&q, t - s);
        for (x, wx) in w.iter_mut().enumerate() {
            *wx *= right[x][j];
        }
    }
    let z: f64 = w.iter().sum();
    w.iter().map(|v| v / z).collect()
}

fn run_chain(
    p: f64,
    evidence: &Evidence,
    seed: u64,
    probes: &[f64],
) -> (Vec<Vec<f64>>, AugmentDiagnostics) {
    let m = ToyThreeState;
    let rates = m.rates(ALPHA, DELTA).unwrap();
    let omega = 2.0 * m.rate_bound(&rates).unwrap();
    let cfg = SliceConfig::new(p, RetrievalProbs::none(), &m).unwrap();
    let mut diag = AugmentDiagnostics::default();
    let mut path = MjpPath::new(
        vec![0.0, 0.5, 2.0, 4.0, 6.0, 8.0],
        [1, 2, 3, 1, 2, 3]
            .iter()
            .map(|&x| State::scalar(x))
            .collect(),
        HORIZON,
    )
    .unwrap();
    let mut counts = vec![vec![0.0; 3]; probes.len()];
    for it in 0..BURN_IN + KEPT {
        path = augment_step(
            &path,
            evidence,
            &m,
            &rates,
            omega,
            &cfg,
            DEFAULT_RETRY_LIMIT,
            seed ^ it as u64,
            &mut diag,
        )
        .unwrap();
        check_evidence(evidence, &path, &m);
        if it >= BURN_IN {
            for (c, &s) in counts.iter_mut().zip(probes) {
                c[(path.state_at(s).get(0) - 1) as usize] += 1.0 / KEPT as f64;
            }
        }
    }
    (counts, diag)
}

pub fn run() -> Outcome {
    let m = ToyThreeState;
    let truth = m.rates(ALPHA, DELTA).unwrap();
    let sim = simulate_gillespie(&m, &truth, HORIZON, 101).unwrap();
    let obs: Vec<(f64, usize)> = OBS_TIMES
        .iter()
        .map(|&t| (t, (sim.state_at(t).get(0) - 1) as usize))
        .collect();
    let timed = obs
        .iter()
        .map(|&(t, x)| TimedObservation::exact(t, State::scalar(x as i64 + 1)))
        .collect();
    let evidence = Evidence::new(timed, JumpObservationSet::default());
    // Observation times plus the midpoints around them.
    let mut probes: Vec<f64> = OBS_TIMES.to_vec();
    probes.extend([0.5, 2.0, 4.0, 6.0, 8.0, 9.5]);
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    let mut mismatches = 0;
    for (p, seed) in [(0.0, 11u64 << 32), (0.35, 12u64 << 32)] {
        let (est, diag) = run_chain(p, &evidence, seed, &probes);
        mismatches += diag.evidence_mismatches;
        let tv = probes
            .iter()
            .zip(&est)
            .map(|(&s, e)| total_variation(e, &smoothing_marginal(s, &obs)))
            .fold(0.0, f64::max);
        worst = worst.max(tv);
        parts.push(format!("p={p}: max TV {tv:.4}"));
    }
    Outcome::new(
        worst < 0.02 && mismatches == 0,
        format!(
            "{} over {} probe times, {KEPT} kept draws",
            parts.join(", "),
            probes.len()
        ),
    )
}
