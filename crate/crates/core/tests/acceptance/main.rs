//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any fails. Pass criterion ids as arguments to run a subset.

mod baseline;
mod brute_force;
mod clustering;
mod common;
mod conjugacy;
mod determinism;
mod efficiency;
mod oracle;
mod recovery;
mod smoothing;
mod uniformized;

use std::time::Instant;

use common::Outcome;

type Criterion = (&'static str, &'static str, fn() -> Outcome);

// The evidence check reads counters filled by the runs before it, so it goes last.
const CRITERIA: &[Criterion] = &[
    ("AC1", "exact-oracle smoothing", smoothing::run),
    ("AC2", "baseline reduction", baseline::run),
    ("AC3", "uniformization marginals", uniformized::run),
    ("AC4", "conjugate rate draws", conjugacy::run),
    ("AC5", "brute-force FFBS equivalence", brute_force::run),
    ("AC6", "ESS and efficiency trends", efficiency::run),
    ("AC7", "posterior recovery", recovery::run),
    ("AC8", "clustering", clustering::run),
    (
        "AC9",
        "evidence preservation and determinism",
        determinism::run,
    ),
];

fn main() {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (id, name, run) in CRITERIA {
        if !filters.is_empty() && !filters.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        let out = run();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "{id} {verdict} {name} [{:.1}s]: {}",
            start.elapsed().as_secs_f64(),
            out.detail
        );
        if !out.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
