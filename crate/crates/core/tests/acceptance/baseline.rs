//! `p = 0` against the auxiliary-free sampler, and posterior means with and
//! without slicing.

use mjpaug::baseline::baseline_augment_step;
use mjpaug::diagnostics::effective_sample_size;
use mjpaug::ffbs::{augment_step, AugmentDiagnostics, SliceConfig, DEFAULT_RETRY_LIMIT};
use mjpaug::inference::{McmcConfig, Sampler};
use mjpaug::observation::{thin_jump_observations, Evidence, TimedObservation};
use mjpaug::simulate::simulate_gillespie;
use mjpaug::zoo::{TandemQueue, ToyThreeState};
use mjpaug::{LabelTag, MjpPath, Model, RateParams, RetrievalProbs};

use crate::common::*;

const ITERATIONS: usize = 20_000;
const BURN_IN: usize = 1_000;

fn identical_chains(
    model: &dyn Model,
    rates: &RateParams,
    ev: &Evidence,
    start: &MjpPath,
    q: &RetrievalProbs,
    steps: u64,
) -> bool {
    let omega = 2.0 * model.rate_bound(rates).unwrap();
    let cfg = SliceConfig::new(0.0, *q, model).unwrap();
    let mut a = start.clone();
    let mut b = start.clone();
    let mut diag = AugmentDiagnostics::default();
    for step in 0..steps {
        let seed = 0xBA5E_0000 + step;
        a = augment_step(
            &a,
            ev,
            model,
            rates,
            omega,
            &cfg,
            DEFAULT_RETRY_LIMIT,
            seed,
            &mut diag,
        )
        .unwrap();
        b = baseline_augment_step(&b, ev, model, rates, omega, q, seed).unwrap();
        check_evidence(ev, &a, model);
        if a != b {
            return false;
        }
    }
    true
}

fn equality() -> (bool, usize) {
    let mut cases = 0;
    let mut ok = true;
    let toy = ToyThreeState;
    let r = toy.rates(2.0, 0.5).unwrap();
    for seed in 0..3 {
        let truth = simulate_gillespie(&toy, &r, 10.0, 200 + seed).unwrap();
        let q = RetrievalProbs::uniform(0.5).unwrap();
        let z = thin_jump_observations(&truth, &toy, &q, 300 + seed);
        let y = (1..5)
            .map(|k| TimedObservation::exact(2.0 * k as f64, truth.state_at(2.0 * k as f64)))
            .collect();
        ok &= identical_chains(&toy, &r, &Evidence::new(y, z), &truth, &q, 300);
        cases += 1;
    }
    let h = hospital();
    let hr = hospital_truth(&h);
    let (truth, ev) = hospital_data(20.0, 210, &discharges_only());
    ok &= identical_chains(&h, &hr, &ev, &truth, &discharges_only(), 100);
    let t = TandemQueue::default();
    let tr = t.rates(1.0, 1.5, 2.0).unwrap();
    let truth = simulate_gillespie(&t, &tr, 15.0, 220).unwrap();
    let q = RetrievalProbs::none()
        .with(LabelTag::Entry, 0.5)
        .unwrap()
        .with(LabelTag::Departure, 0.5)
        .unwrap();
    let z = thin_jump_observations(&truth, &t, &q, 221);
    ok &= identical_chains(&t, &tr, &Evidence::new(vec![], z), &truth, &q, 100);
    (ok, cases + 2)
}

fn toy_data() -> (Vec<Evidence>, RetrievalProbs) {
    let toy = ToyThreeState;
    let r = toy.rates(2.0, 0.5).unwrap();
    let q = RetrievalProbs::uniform(0.3).unwrap();
    let data = (0..8)
        .map(|k| {
            let truth = simulate_gillespie(&toy, &r, 20.0, 230 + k).unwrap();
            let y = (1..=10)
                .map(|i| TimedObservation::exact(2.0 * i as f64, truth.state_at(2.0 * i as f64)))
                .collect();
            Evidence::new(y, thin_jump_observations(&truth, &toy, &q, 240 + k))
        })
        .collect();
    (data, q)
}

/// Posterior mean and Monte Carlo standard error of alpha and delta.
fn posterior(p: f64, data: &[Evidence], q: &RetrievalProbs) -> [(f64, f64); 2] {
    let toy = ToyThreeState;
    let base = toy.rates(2.0, 0.5).unwrap();
    let mut cfg = McmcConfig::new(&base, 1, 250);
    cfg.p = p;
    cfg.retrieval = *q;
    let mut s = Sampler::new(&toy, &base, data, 20.0, &cfg, 0).unwrap();
    let mut traces = [Vec::new(), Vec::new()];
    drive(&mut s, data, &toy, ITERATIONS, |s| {
        if s.iter > BURN_IN {
            traces[0].push(s.rates[0].value(0));
            traces[1].push(s.rates[0].value(1));
        }
    });
    assert_eq!(s.diagnostics.evidence_mismatches, 0);
    traces.map(|t| {
        let m = mean(&t);
        let sd = (t.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (t.len() - 1) as f64).sqrt();
        (m, sd / effective_sample_size(&t).unwrap().value.sqrt())
    })
}

pub fn run() -> Outcome {
    let (equal, cases) = equality();
    let (data, q) = toy_data();
    let a = posterior(0.0, &data, &q);
    let b = posterior(0.35, &data, &q);
    let mut agree = true;
    let mut parts = Vec::new();
    for (name, (x, y)) in ["alpha", "delta"].iter().zip(a.iter().zip(&b)) {
        let combined = (x.1 * x.1 + y.1 * y.1).sqrt();
        let z = (x.0 - y.0).abs() / combined;
        agree &= z <= 3.0;
        parts.push(format!(
            "{name} {:.3} vs {:.3} (MCSE {:.3}, {:.3}; gap {z:.2} combined)",
            x.0, y.0, x.1, y.1
        ));
    }
    Outcome::new(
        equal && agree,
        format!(
            "identical paths on {cases} chains: {equal}; p=0 vs p=0.35 means: {}",
            parts.join(", ")
        ),
    )
}
