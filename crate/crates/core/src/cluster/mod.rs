//! Centroid clustering of processes on their sufficient statistics.

mod pipeline;

pub use pipeline::{
    centroid_clustering, standardize, stat_vector, CentroidConfig, CentroidRun, Method,
};

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub assignments: Vec<usize>,
    /// Centroids (k-means) or medoids (PAM).
    pub centers: Vec<Vec<f64>>,
    /// Index of each medoid in the input (PAM only).
    pub medoids: Option<Vec<usize>>,
    pub objective: f64,
    /// Objective after each refinement iteration.
    pub history: Vec<f64>,
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `sum_k ||x_k - center(c_k)||^2`.
pub fn objective(points: &[Vec<f64>], assignments: &[usize], centers: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &c)| sq_dist(p, &centers[c]))
        .sum()
}

fn check_input(points: &[Vec<f64>], l: usize) -> Result<()> {
    if l == 0 || points.len() < l {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= L <= K, got L = {l}, K = {}",
            points.len()
        )));
    }
    let d = points[0].len();
    if points
        .iter()
        .any(|p| p.len() != d || p.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::InvalidArgument(
            "points must be finite and of equal dimension".into(),
        ));
    }
    Ok(())
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, m) in centers.iter().enumerate() {
        let d = sq_dist(p, m);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd's algorithm from a k-means++ start. An emptied cluster is
/// reseeded with the point farthest from its current centroid.
pub fn kmeans(points: &[Vec<f64>], l: usize, seed: u64, max_iters: usize) -> Result<ClusterResult> {
    check_input(points, l)?;
    let mut rng = rng::stream(seed, Stream::Cluster, &[]);
    let n = points.len();
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < l {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.push(points[pick].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, centers.last().unwrap()));
        }
    }
    let mut assignments: Vec<usize> = points.iter().map(|p| nearest(p, &centers).0).collect();
    let mut history = vec![objective(points, &assignments, &centers)];
    for _ in 0..max_iters {
        // Update step, reseeding empty clusters.
        let dim = points[0].len();
        let mut sums = vec![vec![0.0; dim]; l];
        let mut counts = vec![0usize; l];
        for (p, &c) in points.iter().zip(&assignments) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..l {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        for c in 0..l {
            if counts[c] == 0 {
                let far = (0..n)
                    .filter(|&i| counts[assignments[i]] > 1)
                    .max_by(|&i, &j| {
                        sq_dist(&points[i], &centers[assignments[i]])
                            .total_cmp(&sq_dist(&points[j], &centers[assignments[j]]))
                    })
                    .expect("K >= L leaves a cluster with two points");
                counts[assignments[far]] -= 1;
                counts[c] = 1;
                assignments[far] = c;
                centers[c] = points[far].clone();
            }
        }
        let after_update = objective(points, &assignments, &centers);
        // Assignment step; ties keep the current cluster.
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(p, &centers);
            if c != assignments[i] && d < sq_dist(p, &centers[assignments[i]]) {
                assignments[i] = c;
                changed = true;
            }
        }
        let obj = objective(points, &assignments, &centers);
        let prev = *history.last().unwrap();
        assert!(
            after_update <= prev * (1.0 + 1e-12) + 1e-12
                && obj <= after_update * (1.0 + 1e-12) + 1e-12,
            "k-means objective increased"
        );
        history.push(obj);
        if !changed {
            break;
        }
    }
    // Final centroids of the final assignment.
    let dim = points[0].len();
    for c in 0..l {
        let members: Vec<&Vec<f64>> = points
            .iter()
            .zip(&assignments)
            .filter(|(_, &a)| a == c)
            .map(|(p, _)| p)
            .collect();
        if !members.is_empty() {
            centers[c] = (0..dim)
                .map(|j| members.iter().map(|p| p[j]).sum::<f64>() / members.len() as f64)
                .collect();
        }
    }
    let objective = objective(points, &assignments, &centers);
    Ok(ClusterResult {
        assignments,
        centers,
        medoids: None,
        objective,
        history,
    })
}

/// Partitioning around medoids under squared Euclidean distance: greedy
/// build, then best-improvement swaps until none helps.
pub fn pam(points: &[Vec<f64>], l: usize, max_iters: usize) -> Result<ClusterResult> {
    check_input(points, l)?;
    let n = points.len();
    let dist: Vec<Vec<f64>> = points
        .iter()
        .map(|a| points.iter().map(|b| sq_dist(a, b)).collect())
        .collect();
    let cost = |meds: &[usize]| -> f64 {
        (0..n)
            .map(|i| {
                meds.iter()
                    .map(|&m| dist[i][m])
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    };
    let mut medoids: Vec<usize> = Vec::with_capacity(l);
    while medoids.len() < l {
        let mut best = (usize::MAX, f64::INFINITY);
        for c in 0..n {
            if medoids.contains(&c) {
                continue;
            }
            medoids.push(c);
            let v = cost(&medoids);
            medoids.pop();
            if v < best.1 {
                best = (c, v);
            }
        }
        medoids.push(best.0);
    }
    let mut history = vec![cost(&medoids)];
    for _ in 0..max_iters {
        let current = *history.last().unwrap();
        let mut best = (usize::MAX, usize::MAX, current);
        for mi in 0..l {
            for h in 0..n {
                if medoids.contains(&h) {
                    continue;
                }
                let old = medoids[mi];
                medoids[mi] = h;
                let v = cost(&medoids);
                medoids[mi] = old;
                if v < best.2 {
                    best = (mi, h, v);
                }
            }
        }
        if best.0 == usize::MAX {
            break;
        }
        medoids[best.0] = best.1;
        assert!(best.2 <= current, "PAM objective increased");
        history.push(best.2);
    }
    let centers: Vec<Vec<f64>> = medoids.iter().map(|&m| points[m].clone()).collect();
    let assignments: Vec<usize> = (0..n)
        .map(|i| {
            // A medoid always belongs to its own cluster.
            medoids
                .iter()
                .position(|&m| m == i)
                .unwrap_or_else(|| nearest(&points[i], &centers).0)
        })
        .collect();
    let objective = objective(points, &assignments, &centers);
    Ok(ClusterResult {
        assignments,
        centers,
        medoids: Some(medoids),
        objective,
        history,
    })
}
