use rayon::prelude::*;

use super::{kmeans, pam, ClusterResult};
use crate::error::{Error, Result};
use crate::ffbs::{augment_step, AugmentDiagnostics, SliceConfig, DEFAULT_RETRY_LIMIT};
use crate::inference::{initial_path, path_pools, RatePools, RatePrior};
use crate::model::{GeneratorModel, Model};
use crate::observation::{Evidence, RetrievalProbs};
use crate::path::MjpPath;
use crate::rates::{RateId, RateParams};
use crate::rng::{self, Stream};
use crate::uniformization::UniformizationConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    KMeans,
    Pam,
}

impl Method {
    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "kmeans" => Some(Method::KMeans),
            "pam" => Some(Method::Pam),
            _ => None,
        }
    }
}

/// `(psi_id, ..., tau_id, ...)` over the given rates.
pub fn stat_vector(
    path: &MjpPath,
    model: &dyn GeneratorModel,
    ids: &[RateId],
    n_rates: usize,
) -> Result<Vec<f64>> {
    let pools = path_pools(path, model, n_rates)?;
    Ok(ids
        .iter()
        .map(|&i| pools.psi[i])
        .chain(ids.iter().map(|&i| pools.tau[i]))
        .collect())
}

/// Per-coordinate z-scores. Constant coordinates become zero.
pub fn standardize(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if points.is_empty() {
        return Vec::new();
    }
    let n = points.len() as f64;
    let d = points[0].len();
    let mut out = points.to_vec();
    for j in 0..d {
        let mean = points.iter().map(|p| p[j]).sum::<f64>() / n;
        let var = points
            .iter()
            .map(|p| (p[j] - mean) * (p[j] - mean))
            .sum::<f64>()
            / n;
        let sd = var.sqrt();
        for p in &mut out {
            p[j] = if sd > 0.0 { (p[j] - mean) / sd } else { 0.0 };
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct CentroidConfig {
    pub method: Method,
    pub clusters: usize,
    pub iterations: usize,
    pub uniformization: UniformizationConfig,
    pub p: f64,
    pub retrieval: RetrievalProbs,
    pub rate_prior: RatePrior,
    /// Clusters are relabelled by increasing posterior mean of this rate.
    pub order_by: Option<RateId>,
    pub retry_limit: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl CentroidConfig {
    pub fn new(method: Method, base: &RateParams, clusters: usize, seed: u64) -> Self {
        CentroidConfig {
            method,
            clusters,
            iterations: 50,
            uniformization: UniformizationConfig::default(),
            p: 0.0,
            retrieval: RetrievalProbs::none(),
            rate_prior: RatePrior::default_for(base),
            order_by: base.free_ids().next(),
            retry_limit: DEFAULT_RETRY_LIMIT,
            max_iters: 100,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CentroidRun {
    /// Assignments after each outer iteration `1..=N`.
    pub assignments: Vec<Vec<usize>>,
    pub last: ClusterResult,
    pub cluster_rates: Vec<RateParams>,
    pub diagnostics: AugmentDiagnostics,
    /// Paths after the final augmentation.
    pub paths: Vec<MjpPath>,
}

fn posterior_means(
    base: &RateParams,
    prior: &RatePrior,
    pools: &RatePools,
    members: usize,
) -> RateParams {
    let mut r = base.clone();
    if members == 0 {
        return r;
    }
    for id in 0..r.len() {
        if !r.is_fixed(id) {
            r.set(
                id,
                (prior.shape[id] + pools.psi[id]) / (prior.rate[id] + pools.tau[id]),
            );
        }
    }
    r
}

/// Alternates path augmentation under cluster-level rate estimates with
/// centroid clustering of the standardized statistic vectors.
pub fn centroid_clustering(
    model: &dyn Model,
    base: &RateParams,
    data: &[Evidence],
    horizon: f64,
    cfg: &CentroidConfig,
) -> Result<CentroidRun> {
    let slice = SliceConfig::new(cfg.p, cfg.retrieval, model)?;
    let n_rates = base.len();
    let free: Vec<RateId> = base.free_ids().collect();
    if free.is_empty() {
        return Err(Error::InvalidArgument("no free rates to cluster on".into()));
    }
    let omega0 = cfg.uniformization.omega(model, base)?;
    let mut paths = data
        .iter()
        .enumerate()
        .map(|(k, ev)| {
            let mut r = rng::stream(cfg.seed, Stream::Init, &[k as u64]);
            initial_path(model, base, ev, &cfg.retrieval, horizon, omega0, &mut r)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut assign = vec![0usize; data.len()];
    let mut rates = vec![base.clone(); cfg.clusters];
    let mut history = Vec::with_capacity(cfg.iterations);
    let mut diagnostics = AugmentDiagnostics::default();
    let mut last = None;
    for it in 1..=cfg.iterations {
        let results: Vec<Result<(MjpPath, AugmentDiagnostics)>> = paths
            .par_iter()
            .zip(data.par_iter())
            .enumerate()
            .map(|(k, (path, ev))| {
                let r = &rates[assign[k]];
                let omega = cfg.uniformization.omega(model, r)?;
                let seed = rng::derive_seed(cfg.seed, Stream::Augment, &[it as u64, k as u64]);
                let mut d = AugmentDiagnostics::default();
                let p = augment_step(
                    path,
                    ev,
                    model,
                    r,
                    omega,
                    &slice,
                    cfg.retry_limit,
                    seed,
                    &mut d,
                )?;
                Ok((p, d))
            })
            .collect();
        for (k, res) in results.into_iter().enumerate() {
            let (p, d) = res?;
            paths[k] = p;
            diagnostics.merge(&d);
        }
        let pools: Vec<RatePools> = paths
            .par_iter()
            .map(|p| path_pools(p, model, n_rates))
            .collect::<Result<_>>()?;
        let points: Vec<Vec<f64>> = pools
            .iter()
            .map(|pl| {
                free.iter()
                    .map(|&i| pl.psi[i])
                    .chain(free.iter().map(|&i| pl.tau[i]))
                    .collect()
            })
            .collect();
        let z = standardize(&points);
        let cseed = rng::derive_seed(cfg.seed, Stream::Cluster, &[it as u64]);
        let mut res = match cfg.method {
            Method::KMeans => kmeans(&z, cfg.clusters, cseed, cfg.max_iters)?,
            Method::Pam => pam(&z, cfg.clusters, cfg.max_iters)?,
        };
        let mut cpools = vec![RatePools::zeros(n_rates); cfg.clusters];
        let mut counts = vec![0usize; cfg.clusters];
        for (pl, &c) in pools.iter().zip(&res.assignments) {
            cpools[c].add(pl);
            counts[c] += 1;
        }
        let mut est: Vec<RateParams> = (0..cfg.clusters)
            .map(|c| posterior_means(base, &cfg.rate_prior, &cpools[c], counts[c]))
            .collect();
        if let Some(id) = cfg.order_by {
            let mut order: Vec<usize> = (0..cfg.clusters).collect();
            order.sort_by(|&a, &b| est[a].value(id).total_cmp(&est[b].value(id)));
            let mut relabel = vec![0; cfg.clusters];
            for (new, &old) in order.iter().enumerate() {
                relabel[old] = new;
            }
            for a in &mut res.assignments {
                *a = relabel[*a];
            }
            est = order.iter().map(|&o| est[o].clone()).collect();
            res.centers = order.iter().map(|&o| res.centers[o].clone()).collect();
            if let Some(m) = &res.medoids {
                res.medoids = Some(order.iter().map(|&o| m[o]).collect());
            }
        }
        assign = res.assignments.clone();
        rates = est;
        history.push(assign.clone());
        last = Some(res);
    }
    let last = last.ok_or_else(|| {
        Error::InvalidArgument("centroid clustering needs at least one iteration".into())
    })?;
    Ok(CentroidRun {
        assignments: history,
        last,
        cluster_rates: rates,
        diagnostics,
        paths,
    })
}
