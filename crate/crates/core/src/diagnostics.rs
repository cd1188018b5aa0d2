//! MCMC and clustering diagnostics.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ess {
    pub value: f64,
    /// Set when the trace has zero variance and `value` is the length by
    /// convention.
    pub constant: bool,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Effective sample size with the initial monotone sequence estimator of
/// the integrated autocorrelation time, clipped to `(0, N]`.
pub fn effective_sample_size(trace: &[f64]) -> Result<Ess> {
    let n = trace.len();
    if n < 10 {
        return Err(Error::InvalidArgument(format!(
            "ESS needs at least 10 values, got {n}"
        )));
    }
    let m = mean(trace);
    let c: Vec<f64> = trace.iter().map(|x| x - m).collect();
    let autocov = |lag: usize| -> f64 {
        c[..n - lag]
            .iter()
            .zip(&c[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let c0 = autocov(0);
    if !(c0 > 0.0) {
        return Ok(Ess {
            value: n as f64,
            constant: true,
        });
    }
    let tau = integrated_time(n, |lag| autocov(lag) / c0);
    Ok(Ess {
        value: (n as f64 / tau).min(n as f64),
        constant: false,
    })
}

/// `1 + 2 sum rho_t` with Geyer's initial monotone positive pair sums,
/// floored at `1 / n`.
fn integrated_time(n: usize, rho: impl Fn(usize) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n {
        let g = rho(2 * k) + rho(2 * k + 1);
        if g <= 0.0 {
            break;
        }
        let g = g.min(prev);
        sum += g;
        prev = g;
        k += 1;
    }
    (2.0 * sum - 1.0).max(1.0 / n as f64)
}

/// Multi-chain effective sample size: autocorrelations are measured against
/// the pooled variance estimate `(n-1)/n W + B/n`, so chains that settle
/// around different values count as fewer samples. For one chain it agrees
/// with [`effective_sample_size`] up to `O(1/n)`. Clipped to `(0, m n]`.
pub fn multi_chain_ess(chains: &[&[f64]]) -> Result<Ess> {
    let m = chains.len();
    if m == 0 {
        return Err(Error::InvalidArgument(
            "multi-chain ESS needs at least one chain".into(),
        ));
    }
    let n = chains[0].len();
    if chains.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument(
            "chains must have equal lengths".into(),
        ));
    }
    if n < 10 {
        return Err(Error::InvalidArgument(format!(
            "ESS needs at least 10 values per chain, got {n}"
        )));
    }
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let centred: Vec<Vec<f64>> = chains
        .iter()
        .zip(&means)
        .map(|(c, mu)| c.iter().map(|x| x - mu).collect())
        .collect();
    let mean_autocov = |lag: usize| -> f64 {
        centred
            .iter()
            .map(|c| {
                c[..n - lag]
                    .iter()
                    .zip(&c[lag..])
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    / n as f64
            })
            .sum::<f64>()
            / m as f64
    };
    let nf = n as f64;
    let w = mean_autocov(0) * nf / (nf - 1.0);
    let between = if m > 1 {
        let grand = mean(&means);
        means.iter().map(|x| (x - grand) * (x - grand)).sum::<f64>() / (m - 1) as f64
    } else {
        0.0
    };
    let var_plus = w * (nf - 1.0) / nf + between;
    let total = (m * n) as f64;
    if !(var_plus > 0.0) {
        return Ok(Ess {
            value: total,
            constant: true,
        });
    }
    let tau = integrated_time(n, |lag| {
        if lag == 0 {
            1.0
        } else {
            1.0 - (w - mean_autocov(lag)) / var_plus
        }
    });
    Ok(Ess {
        value: (total / tau).min(total),
        constant: false,
    })
}

/// Pearson correlation. Errors when either trace is constant.
pub fn trace_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidArgument(
            "traces must have equal length >= 2".into(),
        ));
    }
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if !(saa > 0.0 && sbb > 0.0) {
        return Err(Error::InvalidArgument(
            "correlation undefined for a constant trace".into(),
        ));
    }
    Ok(sab / (saa * sbb).sqrt())
}

/// Per-class F1; zero where precision and recall are both zero or undefined.
pub fn f1_scores(assignments: &[usize], truth: &[usize], l: usize) -> Vec<f64> {
    (0..l)
        .map(|c| {
            let tp = assignments
                .iter()
                .zip(truth)
                .filter(|&(&a, &t)| a == c && t == c)
                .count() as f64;
            let pred = assignments.iter().filter(|&&a| a == c).count() as f64;
            let act = truth.iter().filter(|&&t| t == c).count() as f64;
            if tp == 0.0 {
                return 0.0;
            }
            let (p, r) = (tp / pred, tp / act);
            2.0 * p * r / (p + r)
        })
        .collect()
}

/// Fraction of matching labels under the best relabelling of
/// `assignments` (exhaustive over permutations, so `l` should be small).
pub fn best_permutation_accuracy(assignments: &[usize], truth: &[usize], l: usize) -> f64 {
    let mut perm: Vec<usize> = (0..l).collect();
    let mut best = 0usize;
    loop {
        let hits = assignments
            .iter()
            .zip(truth)
            .filter(|&(&a, &t)| perm[a] == t)
            .count();
        best = best.max(hits);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best as f64 / truth.len().max(1) as f64
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("summary of an empty sample".into()));
    }
    let m = mean(values);
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(Summary {
        mean: m,
        std,
        median: quantile(&s, 0.5),
        q1: quantile(&s, 0.25),
        q3: quantile(&s, 0.75),
    })
}

/// Per-class summaries over iterations of membership counts and, when
/// the truth is known, of F1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSummary {
    pub class: usize,
    pub members: Summary,
    pub f1: Option<Summary>,
}

pub fn membership_table(
    iterations: &[Vec<usize>],
    truth: Option<&[usize]>,
    l: usize,
) -> Result<Vec<ClassSummary>> {
    (0..l)
        .map(|c| {
            let counts: Vec<f64> = iterations
                .iter()
                .map(|a| a.iter().filter(|&&x| x == c).count() as f64)
                .collect();
            let f1 = truth
                .map(|t| {
                    let v: Vec<f64> = iterations.iter().map(|a| f1_scores(a, t, l)[c]).collect();
                    summarize(&v)
                })
                .transpose()?;
            Ok(ClassSummary {
                class: c,
                members: summarize(&counts)?,
                f1,
            })
        })
        .collect()
}

/// `class,metric,mean,std,median,q1,q3` with 1-based classes.
pub fn write_membership_table<W: Write>(mut w: W, rows: &[ClassSummary]) -> Result<()> {
    writeln!(w, "class,metric,mean,std,median,q1,q3")?;
    for r in rows {
        let mut line = |metric: &str, s: &Summary| {
            writeln!(
                w,
                "{},{metric},{},{},{},{},{}",
                r.class + 1,
                s.mean,
                s.std,
                s.median,
                s.q1,
                s.q3
            )
        };
        line("members", &r.members)?;
        if let Some(f) = &r.f1 {
            line("f1", f)?;
        }
    }
    Ok(())
}

/// `metric,name,value` rows.
pub fn write_metrics<W: Write>(mut w: W, rows: &[(String, String, f64)]) -> Result<()> {
    writeln!(w, "metric,name,value")?;
    for (m, n, v) in rows {
        writeln!(w, "{m},{n},{v}")?;
    }
    Ok(())
}
