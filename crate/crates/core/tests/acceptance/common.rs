use std::sync::atomic::{AtomicU64, Ordering};

use mjpaug::inference::{McmcConfig, Sampler};
use mjpaug::observation::{thin_jump_observations, Evidence};
use mjpaug::simulate::simulate_gillespie;
use mjpaug::zoo::HospitalMmpp;
use mjpaug::{LabelTag, MjpPath, Model, RateParams, RetrievalProbs};

static PATHS_CHECKED: AtomicU64 = AtomicU64::new(0);
static PATHS_VIOLATING: AtomicU64 = AtomicU64::new(0);

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

/// Records whether `path` carries every jump observation of `ev`.
pub fn check_evidence(ev: &Evidence, path: &MjpPath, model: &dyn Model) -> bool {
    let ok = ev.jumps_match(path, model);
    PATHS_CHECKED.fetch_add(1, Ordering::Relaxed);
    if !ok {
        PATHS_VIOLATING.fetch_add(1, Ordering::Relaxed);
    }
    ok
}

pub fn evidence_counts() -> (u64, u64) {
    (
        PATHS_CHECKED.load(Ordering::Relaxed),
        PATHS_VIOLATING.load(Ordering::Relaxed),
    )
}

/// Steps a sampler, checking evidence on every augmented path. Returns the
/// per-iteration seconds.
pub fn drive(
    s: &mut Sampler,
    data: &[Evidence],
    model: &dyn Model,
    iterations: usize,
    mut record: impl FnMut(&Sampler),
) -> Vec<f64> {
    let mut secs = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let (t, _) = s.step().expect("sampler step");
        secs.push(t);
        for (ev, p) in data.iter().zip(&s.paths) {
            check_evidence(ev, p, model);
        }
        record(s);
    }
    secs
}

pub const HOSPITAL_NU: f64 = 1.0 / 12.0;
pub const HOSPITAL_MU: f64 = 0.5;

pub fn hospital() -> HospitalMmpp {
    HospitalMmpp::new(10, 3).unwrap()
}

pub fn hospital_truth(m: &HospitalMmpp) -> RateParams {
    m.rates(1.0, 2.0, HOSPITAL_NU, HOSPITAL_MU).unwrap()
}

pub fn discharges_only() -> RetrievalProbs {
    RetrievalProbs::none()
        .with(LabelTag::Discharge, 1.0)
        .unwrap()
}

/// Regime switches and discharges observed, admissions hidden.
pub fn regimes_and_discharges() -> RetrievalProbs {
    discharges_only().with(LabelTag::Regime, 1.0).unwrap()
}

/// One hospital record thinned by `retrieval`.
pub fn hospital_data(horizon: f64, seed: u64, retrieval: &RetrievalProbs) -> (MjpPath, Evidence) {
    let m = hospital();
    let truth = hospital_truth(&m);
    let path = simulate_gillespie(&m, &truth, horizon, seed).unwrap();
    let jumps = thin_jump_observations(&path, &m, retrieval, seed);
    (path, Evidence::new(Vec::new(), jumps))
}

pub fn hospital_config(
    seed: u64,
    p: f64,
    retrieval: &RetrievalProbs,
    omega_scale: f64,
) -> McmcConfig {
    let m = hospital();
    let base = hospital_truth(&m);
    let mut cfg = McmcConfig::new(&base, 1, seed);
    cfg.p = p;
    cfg.retrieval = *retrieval;
    cfg.uniformization = mjpaug::uniformization::UniformizationConfig::new(omega_scale).unwrap();
    cfg.constraints =
        mjpaug::rates::OrderConstraint::parse("1.25*lambda1 < lambda2", base.names(), 1).unwrap();
    cfg.init_from_prior = false;
    cfg
}

/// Perturbed starting rates for hospital chains.
pub fn hospital_start(m: &HospitalMmpp) -> RateParams {
    m.rates(0.6, 3.0, HOSPITAL_NU, HOSPITAL_MU).unwrap()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
