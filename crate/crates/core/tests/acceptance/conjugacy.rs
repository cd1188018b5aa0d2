//! Rate draws against the conjugate gamma posterior.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mjpaug::inference::{
    gibbs_rate_update, RatePools, RatePrior, DEFAULT_PRIOR_RATE, DEFAULT_PRIOR_SHAPE,
};
use mjpaug::zoo::ToyThreeState;

use crate::common::Outcome;

const POOLS: usize = 20;
const DRAWS: usize = 100_000;

pub fn run() -> Outcome {
    let base = ToyThreeState.rates(1.0, 1.0).unwrap();
    let prior = RatePrior::default_for(&base);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst: f64 = 0.0;
    for _ in 0..POOLS {
        let psi = rng.random_range(5..=100) as f64;
        let tau = rng.random_range(0.5..50.0);
        let pools = vec![RatePools {
            psi: vec![psi, 0.0, 0.0],
            tau: vec![tau, 0.0, 0.0],
        }];
        let current = vec![base.clone()];
        let draws: Vec<f64> = (0..DRAWS)
            .map(|_| {
                gibbs_rate_update(&pools, &current, &prior, &[], &mut rng).unwrap()[0].value(0)
            })
            .collect();
        let (a, b) = (DEFAULT_PRIOR_SHAPE + psi, DEFAULT_PRIOR_RATE + tau);
        let n = DRAWS as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        let rel_mean = (mean / (a / b) - 1.0).abs();
        let rel_var = (var / (a / (b * b)) - 1.0).abs();
        worst = worst.max(rel_mean).max(rel_var);
    }
    Outcome::new(
        worst < 0.02,
        format!(
            "worst relative error of mean/variance over {POOLS} pools: {:.3}%",
            100.0 * worst
        ),
    )
}
