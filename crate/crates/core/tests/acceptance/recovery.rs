//! Credible-interval coverage of the hospital arrival rates.

use mjpaug::diagnostics::{quantile, summarize};
use mjpaug::inference::Sampler;

use crate::common::*;

const REPLICATES: u64 = 10;
const HORIZON: f64 = 100.0;
const ITERATIONS: usize = 3000;
const BURN_IN: usize = 300;
const P: f64 = 0.35;
const OMEGA_SCALE: f64 = 3.0;

pub fn run() -> Outcome {
    let m = hospital();
    let start = hospital_start(&m);
    let truth = [1.0, 2.0];
    let mut covered = [0u32; 2];
    let mut violations = 0usize;
    let mut kept_total = 0usize;
    let mut widths = [Vec::new(), Vec::new()];
    for r in 0..REPLICATES {
        let (_, ev) = hospital_data(HORIZON, 700 + r, &discharges_only());
        let data = vec![ev];
        let mut cfg = hospital_config(7000 + r, P, &discharges_only(), OMEGA_SCALE);
        // Exp(1) on the arrival rates: a path without regime-2 time otherwise
        // draws lambda2 from a prior with mean 100.
        for id in 0..2 {
            cfg.rate_prior.set(id, 1.0, 1.0).unwrap();
        }
        let mut s = Sampler::new(&m, &start, &data, HORIZON, &cfg, 0).unwrap();
        let mut draws = [Vec::new(), Vec::new()];
        drive(&mut s, &data, &m, ITERATIONS, |s| {
            if s.iter > BURN_IN {
                let (l1, l2) = (s.rates[0].value(0), s.rates[0].value(1));
                if !(1.25 * l1 < l2) {
                    violations += 1;
                }
                draws[0].push(l1);
                draws[1].push(l2);
            }
        });
        for (i, d) in draws.iter_mut().enumerate() {
            kept_total += d.len();
            d.sort_by(f64::total_cmp);
            let (lo, hi) = (quantile(d, 0.05), quantile(d, 0.95));
            if lo <= truth[i] && truth[i] <= hi {
                covered[i] += 1;
            }
            widths[i].push(hi - lo);
        }
    }
    let w1 = summarize(&widths[0]).unwrap().median;
    let w2 = summarize(&widths[1]).unwrap().median;
    Outcome::new(
        covered.iter().all(|&c| c >= 8) && violations == 0,
        format!(
            "90% intervals cover lambda1 in {}/{REPLICATES} and lambda2 in {}/{REPLICATES} (median widths {w1:.2}, {w2:.2}); {violations} of {} kept draws violate 1.25*lambda1 < lambda2",
            covered[0], covered[1], kept_total / 2
        ),
    )
}
