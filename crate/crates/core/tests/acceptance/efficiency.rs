//! Hospital model: arrival-rate ESS against the clamping probability.

use mjpaug::diagnostics::multi_chain_ess;
use mjpaug::inference::Sampler;

use crate::common::*;

pub const GRID: [f64; 3] = [0.0, 0.1, 0.6];
const HORIZON: f64 = 100.0;
const OMEGA_SCALE: f64 = 1.5;
const ITERATIONS: usize = 3000;
const BURN_IN: usize = 500;
/// Overdispersed starting (lambda1, lambda2), one chain each.
const STARTS: [(f64, f64); 4] = [(0.7, 1.5), (1.3, 2.6), (0.8, 2.8), (1.2, 1.7)];

pub struct Cell {
    pub p: f64,
    /// Multi-chain ESS of lambda1 and lambda2.
    pub ess: [f64; 2],
    pub seconds: f64,
}

impl Cell {
    pub fn mean_ess(&self) -> f64 {
        0.5 * (self.ess[0] + self.ess[1])
    }

    pub fn ess_per_second(&self) -> f64 {
        self.mean_ess() / self.seconds
    }
}

pub fn run_cell(p: f64) -> Cell {
    let m = hospital();
    let (_, ev) = hospital_data(HORIZON, 600, &regimes_and_discharges());
    let data = vec![ev];
    let mut traces = [Vec::new(), Vec::new()];
    let mut seconds = 0.0;
    for (chain, &(l1, l2)) in STARTS.iter().enumerate() {
        let base = m.rates(l1, l2, HOSPITAL_NU, HOSPITAL_MU).unwrap();
        let cfg = hospital_config(
            6000 + chain as u64,
            p,
            &regimes_and_discharges(),
            OMEGA_SCALE,
        );
        let mut s = Sampler::new(&m, &base, &data, HORIZON, &cfg, 0).unwrap();
        let (mut l1, mut l2) = (Vec::new(), Vec::new());
        let secs = drive(&mut s, &data, &m, ITERATIONS, |s| {
            if s.iter > BURN_IN {
                l1.push(s.rates[0].value(0));
                l2.push(s.rates[0].value(1));
            }
        });
        seconds += secs[BURN_IN..].iter().sum::<f64>();
        traces[0].push(l1);
        traces[1].push(l2);
    }
    let ess = traces.map(|t| {
        let refs: Vec<&[f64]> = t.iter().map(Vec::as_slice).collect();
        multi_chain_ess(&refs).unwrap().value
    });
    Cell { p, ess, seconds }
}

pub fn run() -> Outcome {
    let cells: Vec<Cell> = GRID.iter().map(|&p| run_cell(p)).collect();
    let monotone = cells.windows(2).all(|w| w[1].mean_ess() <= w[0].mean_ess());
    let base = cells[0].ess_per_second();
    let best = cells
        .iter()
        .map(Cell::ess_per_second)
        .fold(f64::MIN, f64::max);
    let ratio = best / base;
    let table: Vec<String> = cells
        .iter()
        .map(|c| {
            format!(
                "p={} ess={:.0} ({:.0}, {:.0}) ess/s={:.2}",
                c.p,
                c.mean_ess(),
                c.ess[0],
                c.ess[1],
                c.ess_per_second()
            )
        })
        .collect();
    Outcome::new(
        monotone && ratio >= 1.5,
        format!("{}; best/baseline ess/s = {ratio:.2}", table.join(", ")),
    )
}
