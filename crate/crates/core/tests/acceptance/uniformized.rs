//! Uniformized simulation against Gillespie, and Poisson virtual counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use mjpaug::simulate::simulate_gillespie;
use mjpaug::uniformization::{resample_virtual_times, simulate_uniformized};
use mjpaug::zoo::ToyThreeState;
use mjpaug::{GeneratorModel, State};

use crate::common::Outcome;
use crate::oracle::total_variation;

const DRAWS: usize = 100_000;

/// Pearson statistic against Poisson(`mean`); cells with expectation
/// below 5 are pooled into their neighbours.
fn poisson_gof_pvalue(counts: &[usize], mean: f64) -> f64 {
    let n = counts.len() as f64;
    let top = counts.iter().copied().max().unwrap_or(0) + 1;
    let mut observed = vec![0.0; top + 1];
    for &c in counts {
        observed[c] += 1.0;
    }
    let mut pmf = vec![(-mean).exp()];
    for k in 1..top {
        pmf.push(pmf[k - 1] * mean / k as f64);
    }
    pmf.push((1.0 - pmf.iter().sum::<f64>()).max(0.0));
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for k in 0..=top {
        o += observed[k];
        e += n * pmf[k];
        if e >= 5.0 {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if let Some(last) = cells.last_mut() {
        last.0 += o;
        last.1 += e;
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    1.0 - ChiSquared::new((cells.len() - 1) as f64).unwrap().cdf(stat)
}

pub fn run() -> Outcome {
    let m = ToyThreeState;
    let rates = m.rates(2.0, 0.5).unwrap();
    let omega = 2.0 * m.rate_bound(&rates).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut a = [0.0; 3];
    let mut b = [0.0; 3];
    for i in 0..DRAWS {
        let u = simulate_uniformized(&m, &rates, omega, State::scalar(1), 1.0, &mut rng).unwrap();
        a[(u.states.last().unwrap().get(0) - 1) as usize] += 1.0 / DRAWS as f64;
        let g = simulate_gillespie(&m, &rates, 1.0, 1_000_000 + i as u64).unwrap();
        b[(g.final_state().get(0) - 1) as usize] += 1.0 / DRAWS as f64;
    }
    let tv = total_variation(&a, &b);

    let path = simulate_gillespie(&m, &rates, 5.0, 32).unwrap();
    let mut mean = 0.0;
    for i in 0..path.states.len() {
        let hi = path.times.get(i + 1).copied().unwrap_or(path.horizon);
        mean += (omega - m.exit_rate(&path.states[i], &rates)) * (hi - path.times[i]);
    }
    let counts: Vec<usize> = (0..DRAWS)
        .map(|_| {
            resample_virtual_times(&path, omega, &m, &rates, &mut rng)
                .unwrap()
                .num_virtual()
        })
        .collect();
    let pv = poisson_gof_pvalue(&counts, mean);
    Outcome::new(
        tv < 0.02 && pv > 0.01,
        format!("TV at t=1 {tv:.4}; virtual-count GOF p-value {pv:.3} (Poisson mean {mean:.2})"),
    )
}
