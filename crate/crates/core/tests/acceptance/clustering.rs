//! Planted-partition recovery on the toy chain and reverse diagnosis of
//! tandem queues under every clustering method.

use mjpaug::cluster::{centroid_clustering, CentroidConfig, Method};
use mjpaug::diagnostics::{best_permutation_accuracy, membership_table};
use mjpaug::inference::{McmcConfig, Sampler};
use mjpaug::observation::{thin_jump_observations, Evidence, JumpObservationSet, TimedObservation};
use mjpaug::rates::OrderConstraint;
use mjpaug::simulate::simulate_gillespie;
use mjpaug::zoo::{TandemQueue, ToyThreeState};
use mjpaug::{LabelTag, Model, RateParams, RetrievalProbs};

use crate::common::*;

const CLASSES: usize = 3;

struct Problem<'a> {
    model: &'a dyn Model,
    base: RateParams,
    data: Vec<Evidence>,
    truth: Vec<usize>,
    horizon: f64,
    retrieval: RetrievalProbs,
    order_rate: &'static str,
}

fn toy_problem(model: &ToyThreeState) -> Problem<'_> {
    const HORIZON: f64 = 100.0;
    let classes = [(0.4, 0.2), (1.6, 1.0), (6.4, 4.0)];
    let mut data = Vec::new();
    let mut truth = Vec::new();
    for k in 0..30 {
        let c = k % CLASSES;
        let r = model.rates(classes[c].0, classes[c].1).unwrap();
        let path = simulate_gillespie(model, &r, HORIZON, 800 + k as u64).unwrap();
        let y = (1..=100)
            .map(|i| TimedObservation::exact(i as f64, path.state_at(i as f64)))
            .collect();
        data.push(Evidence::new(y, JumpObservationSet::default()));
        truth.push(c);
    }
    Problem {
        model,
        base: model.rates(1.0, 1.0).unwrap(),
        data,
        truth,
        horizon: HORIZON,
        retrieval: RetrievalProbs::none(),
        order_rate: "alpha",
    }
}

const TANDEM_HORIZON: f64 = 40.0;
const TANDEM_MU1: [f64; 3] = [1.5, 3.0, 6.0];

fn tandem_problem(model: &TandemQueue) -> Problem<'_> {
    let q = RetrievalProbs::none()
        .with(LabelTag::Entry, 0.5)
        .unwrap()
        .with(LabelTag::Departure, 0.5)
        .unwrap();
    let mut data = Vec::new();
    let mut truth = Vec::new();
    for k in 0..20 {
        let c = k % CLASSES;
        let r = model.rates(1.0, TANDEM_MU1[c], 2.0).unwrap();
        let path = simulate_gillespie(model, &r, TANDEM_HORIZON, 900 + k as u64).unwrap();
        data.push(Evidence::new(
            vec![],
            thin_jump_observations(&path, model, &q, 950 + k as u64),
        ));
        truth.push(c);
    }
    Problem {
        model,
        base: model.rates(1.0, 2.0, 2.0).unwrap(),
        data,
        truth,
        horizon: TANDEM_HORIZON,
        retrieval: q,
        order_rate: "mu1",
    }
}

/// Memberships after burn-in from the Gibbs sampler, classes ordered by
/// the chosen rate.
fn gibbs(pb: &Problem, iterations: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut cfg = McmcConfig::new(&pb.base, CLASSES, seed);
    cfg.p = 0.2;
    cfg.retrieval = pb.retrieval;
    let names = pb.base.names();
    let r = pb.order_rate;
    cfg.constraints = [format!("{r}[1] < {r}[2]"), format!("{r}[2] < {r}[3]")]
        .iter()
        .flat_map(|t| OrderConstraint::parse(t, names, CLASSES).unwrap())
        .collect();
    // Spread starting values so that the order constraints hold.
    let id = pb.base.require(r).unwrap();
    let v = pb.base.value(id);
    cfg.initial = Some(
        [0.5, 1.0, 2.0]
            .iter()
            .map(|f| {
                let mut s = pb.base.clone();
                s.set(id, v * f);
                s
            })
            .collect(),
    );
    let mut s = Sampler::new(pb.model, &pb.base, &pb.data, pb.horizon, &cfg, 0).unwrap();
    let mut kept = Vec::new();
    drive(&mut s, &pb.data, pb.model, iterations, |s| {
        if s.iter > iterations / 2 {
            kept.push(s.memberships.clone());
        }
    });
    kept
}

fn centroid(pb: &Problem, method: Method, iterations: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut cfg = CentroidConfig::new(method, &pb.base, CLASSES, seed);
    cfg.iterations = iterations;
    cfg.p = 0.2;
    cfg.retrieval = pb.retrieval;
    cfg.order_by = pb.base.index_of(pb.order_rate);
    let run = centroid_clustering(pb.model, &pb.base, &pb.data, pb.horizon, &cfg).unwrap();
    for (ev, p) in pb.data.iter().zip(&run.paths) {
        check_evidence(ev, p, pb.model);
    }
    assert_eq!(run.diagnostics.evidence_mismatches, 0);
    run.assignments[iterations / 2..].to_vec()
}

fn modal(iterations: &[Vec<usize>]) -> Vec<usize> {
    let k = iterations[0].len();
    (0..k)
        .map(|i| {
            let mut counts = [0usize; CLASSES];
            for a in iterations {
                counts[a[i]] += 1;
            }
            (0..CLASSES)
                .max_by_key(|&c| (counts[c], CLASSES - c))
                .unwrap()
        })
        .collect()
}

fn mean_f1(iterations: &[Vec<usize>], truth: &[usize]) -> f64 {
    let table = membership_table(iterations, Some(truth), CLASSES).unwrap();
    mean(
        &table
            .iter()
            .map(|r| r.f1.as_ref().unwrap().mean)
            .collect::<Vec<_>>(),
    )
}

fn memberships(pb: &Problem, method: &str, seed: u64) -> Vec<Vec<usize>> {
    match method {
        "gibbs" => gibbs(pb, 1000, seed),
        "kmeans" => centroid(pb, Method::KMeans, 40, seed),
        _ => centroid(pb, Method::Pam, 40, seed),
    }
}

pub fn run() -> Outcome {
    let toy = ToyThreeState;
    let tandem = TandemQueue::default();
    let tp = toy_problem(&toy);
    let qp = tandem_problem(&tandem);
    let mut pass = true;
    let mut parts = Vec::new();
    for method in ["gibbs", "kmeans", "pam"] {
        let acc =
            best_permutation_accuracy(&modal(&memberships(&tp, method, 810)), &tp.truth, CLASSES);
        let f1 = mean_f1(&memberships(&qp, method, 910), &qp.truth);
        pass &= acc >= 0.9 && f1 > 1.0 / 3.0 && (0.4..=0.9).contains(&f1);
        parts.push(format!(
            "{method}: toy accuracy {acc:.2}, tandem mean F1 {f1:.2}"
        ));
    }
    Outcome::new(pass, parts.join("; "))
}
