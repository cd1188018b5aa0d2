use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use super::{
    gibbs_membership_update, gibbs_rate_update, initial_path, initial_rates, path_pools,
    MembershipPrior, RatePools, RatePrior,
};
use crate::error::{Error, Result};
use crate::ffbs::{augment_step, AugmentDiagnostics, SliceConfig, DEFAULT_RETRY_LIMIT};
use crate::model::Model;
use crate::observation::{Evidence, RetrievalProbs};
use crate::path::MjpPath;
use crate::rates::{OrderConstraint, RateParams};
use crate::rng::{self, Stream};
use crate::uniformization::UniformizationConfig;

#[derive(Debug, Clone)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    /// Every `thin`-th iteration is recorded (iteration 0 always is).
    pub thin: usize,
    pub chains: usize,
    /// Number of membership classes `L`.
    pub clusters: usize,
    pub uniformization: UniformizationConfig,
    pub p: f64,
    pub retrieval: RetrievalProbs,
    pub rate_prior: RatePrior,
    pub membership_prior: MembershipPrior,
    pub constraints: Vec<OrderConstraint>,
    pub retry_limit: usize,
    pub seed: u64,
    /// Draw the starting rates from the prior; otherwise start every
    /// cluster at the base rates.
    pub init_from_prior: bool,
    /// Explicit starting rates, one set per cluster. Takes precedence over
    /// `init_from_prior`.
    pub initial: Option<Vec<RateParams>>,
}

impl McmcConfig {
    pub fn new(base: &RateParams, clusters: usize, seed: u64) -> Self {
        McmcConfig {
            iterations: 1000,
            burn_in: 0,
            thin: 1,
            chains: 1,
            clusters,
            uniformization: UniformizationConfig::default(),
            p: 0.0,
            retrieval: RetrievalProbs::none(),
            rate_prior: RatePrior::default_for(base),
            membership_prior: MembershipPrior::uniform(clusters),
            constraints: Vec::new(),
            retry_limit: DEFAULT_RETRY_LIMIT,
            seed,
            init_from_prior: true,
            initial: None,
        }
    }

    pub fn slice_config(&self, model: &dyn Model) -> Result<SliceConfig> {
        SliceConfig::new(self.p, self.retrieval, model)
    }

    pub fn validate(&self, model: &dyn Model, base: &RateParams) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.clusters == 0 || self.chains == 0 || self.thin == 0 {
            return bad("clusters, chains and thin must be positive".into());
        }
        if self.membership_prior.len() != self.clusters {
            return bad(format!(
                "membership prior has {} classes, expected {}",
                self.membership_prior.len(),
                self.clusters
            ));
        }
        if self.rate_prior.shape.len() != base.len() {
            return bad("rate prior does not match the rate list".into());
        }
        self.rate_prior.validate()?;
        UniformizationConfig::new(self.uniformization.scale)?;
        self.slice_config(model)?;
        for c in &self.constraints {
            if c.lower.cluster >= self.clusters || c.upper.cluster >= self.clusters {
                return bad("constraint refers to a cluster beyond L".into());
            }
        }
        if let Some(sets) = &self.initial {
            if sets.len() != self.clusters {
                return bad(format!(
                    "{} starting rate sets for {} clusters",
                    sets.len(),
                    self.clusters
                ));
            }
            for r in sets {
                if r.names() != base.names() {
                    return bad("starting rates do not match the rate list".into());
                }
                r.validate()?;
            }
        }
        Ok(())
    }
}

/// The state recorded at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub iter: usize,
    pub rates: Vec<RateParams>,
    pub memberships: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub chain: usize,
    pub samples: Vec<Sample>,
    /// Wall-clock seconds of iterations `1..=N`.
    pub seconds: Vec<f64>,
    /// Seconds spent in path augmentation, per iteration.
    pub augment_seconds: Vec<f64>,
    pub diagnostics: AugmentDiagnostics,
    pub final_paths: Vec<MjpPath>,
}

#[derive(Debug, Clone)]
pub struct McmcRun {
    pub burn_in: usize,
    pub rate_names: Vec<String>,
    pub chains: Vec<ChainOutput>,
}

impl McmcRun {
    /// Recorded samples past burn-in.
    pub fn kept(&self, chain: usize) -> impl Iterator<Item = &Sample> {
        let b = self.burn_in;
        self.chains[chain]
            .samples
            .iter()
            .filter(move |s| s.iter > b)
    }

    /// Kept values of one rate in one cluster.
    pub fn trace(&self, chain: usize, cluster: usize, rate: &str) -> Result<Vec<f64>> {
        let id = self
            .rate_names
            .iter()
            .position(|n| n == rate)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown rate `{rate}`")))?;
        Ok(self
            .kept(chain)
            .map(|s| s.rates[cluster].value(id))
            .collect())
    }
}

/// One chain of the outer Gibbs sampler.
pub struct Sampler<'a> {
    model: &'a dyn Model,
    data: &'a [Evidence],
    cfg: &'a McmcConfig,
    slice: SliceConfig,
    chain: usize,
    pub iter: usize,
    pub paths: Vec<MjpPath>,
    pub memberships: Vec<usize>,
    pub rates: Vec<RateParams>,
    pub diagnostics: AugmentDiagnostics,
}

impl<'a> Sampler<'a> {
    pub fn new(
        model: &'a dyn Model,
        base: &RateParams,
        data: &'a [Evidence],
        horizon: f64,
        cfg: &'a McmcConfig,
        chain: usize,
    ) -> Result<Self> {
        cfg.validate(model, base)?;
        let slice = cfg.slice_config(model)?;
        let mut rng = rng::stream(cfg.seed, Stream::Init, &[chain as u64]);
        let rates = match &cfg.initial {
            Some(sets) => sets.clone(),
            None if cfg.init_from_prior => initial_rates(
                base,
                &cfg.rate_prior,
                &cfg.constraints,
                cfg.clusters,
                &mut rng,
            )?,
            None => vec![base.clone(); cfg.clusters],
        };
        if !cfg.constraints.iter().all(|c| c.holds(&rates)) {
            return Err(Error::InvalidArgument(
                "starting rates violate the order constraints".into(),
            ));
        }
        let memberships = if cfg.clusters == 1 {
            vec![0; data.len()]
        } else {
            (0..data.len())
                .map(|_| rng.random_range(0..cfg.clusters))
                .collect()
        };
        let omega = cfg.uniformization.omega(model, base)?;
        let paths = data
            .iter()
            .enumerate()
            .map(|(k, ev)| {
                let mut prng = rng::stream(cfg.seed, Stream::Init, &[chain as u64, k as u64 + 1]);
                initial_path(model, base, ev, &cfg.retrieval, horizon, omega, &mut prng)
                    .map_err(|e| Error::Inference(format!("initial path for process {k}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Sampler {
            model,
            data,
            cfg,
            slice,
            chain,
            iter: 0,
            paths,
            memberships,
            rates,
            diagnostics: AugmentDiagnostics::default(),
        })
    }

    pub fn sample(&self) -> Sample {
        Sample {
            iter: self.iter,
            rates: self.rates.clone(),
            memberships: self.memberships.clone(),
        }
    }

    /// Augments every path with the current rates.
    pub fn augment_paths(&mut self) -> Result<()> {
        let (model, cfg, slice, chain, iter) =
            (self.model, self.cfg, &self.slice, self.chain, self.iter);
        let rates = &self.rates;
        let results: Vec<Result<(MjpPath, AugmentDiagnostics)>> = self
            .paths
            .par_iter()
            .zip(self.data.par_iter())
            .zip(self.memberships.par_iter())
            .enumerate()
            .map(|(k, ((path, ev), &c))| {
                let r = &rates[c];
                let omega = cfg.uniformization.omega(model, r)?;
                let seed = rng::derive_seed(
                    cfg.seed,
                    Stream::Augment,
                    &[chain as u64, iter as u64, k as u64],
                );
                let mut d = AugmentDiagnostics::default();
                let p = augment_step(
                    path,
                    ev,
                    model,
                    r,
                    omega,
                    slice,
                    cfg.retry_limit,
                    seed,
                    &mut d,
                )
                .map_err(|e| Error::Inference(format!("iteration {iter}, process {k}: {e}")))?;
                Ok((p, d))
            })
            .collect();
        for (k, res) in results.into_iter().enumerate() {
            let (p, d) = res?;
            self.paths[k] = p;
            self.diagnostics.merge(&d);
        }
        Ok(())
    }

    pub fn pools(&self) -> Result<Vec<RatePools>> {
        let n = self.rates[0].len();
        self.paths
            .par_iter()
            .map(|p| path_pools(p, self.model, n))
            .collect()
    }

    /// Membership update followed by the rate update, given the current paths.
    pub fn update_parameters(&mut self) -> Result<()> {
        let (cfg, chain, iter) = (self.cfg, self.chain as u64, self.iter as u64);
        let pools = self.pools()?;
        if cfg.clusters > 1 {
            let mut mrng = rng::stream(cfg.seed, Stream::Memberships, &[chain, iter]);
            self.memberships =
                gibbs_membership_update(&pools, &self.rates, &cfg.membership_prior, &mut mrng)
                    .map_err(|e| Error::Inference(format!("iteration {iter}: {e}")))?;
        }
        let n = self.rates[0].len();
        let mut cluster_pools = vec![RatePools::zeros(n); cfg.clusters];
        for (p, &c) in pools.iter().zip(&self.memberships) {
            cluster_pools[c].add(p);
        }
        let mut rrng = rng::stream(cfg.seed, Stream::Rates, &[chain, iter]);
        self.rates = gibbs_rate_update(
            &cluster_pools,
            &self.rates,
            &cfg.rate_prior,
            &cfg.constraints,
            &mut rrng,
        )
        .map_err(|e| Error::Inference(format!("iteration {iter}: {e}")))?;
        Ok(())
    }

    /// One full iteration. Returns (total, augmentation) seconds.
    pub fn step(&mut self) -> Result<(f64, f64)> {
        self.iter += 1;
        let start = Instant::now();
        self.augment_paths()?;
        let aug = start.elapsed().as_secs_f64();
        self.update_parameters()?;
        Ok((start.elapsed().as_secs_f64(), aug))
    }
}

fn run_chain(
    model: &dyn Model,
    base: &RateParams,
    data: &[Evidence],
    horizon: f64,
    cfg: &McmcConfig,
    chain: usize,
) -> Result<ChainOutput> {
    let mut s = Sampler::new(model, base, data, horizon, cfg, chain)?;
    let mut samples = vec![s.sample()];
    let mut seconds = Vec::with_capacity(cfg.iterations);
    let mut augment_seconds = Vec::with_capacity(cfg.iterations);
    for _ in 0..cfg.iterations {
        let (t, a) = s.step()?;
        seconds.push(t);
        augment_seconds.push(a);
        if s.iter % cfg.thin == 0 {
            samples.push(s.sample());
        }
    }
    Ok(ChainOutput {
        chain,
        samples,
        seconds,
        augment_seconds,
        diagnostics: s.diagnostics,
        final_paths: s.paths,
    })
}

/// Runs `cfg.chains` independent chains. Output is a deterministic
/// function of the configuration and seed, apart from timings.
pub fn run_mcmc(
    model: &dyn Model,
    base: &RateParams,
    data: &[Evidence],
    horizon: f64,
    cfg: &McmcConfig,
) -> Result<McmcRun> {
    cfg.validate(model, base)?;
    let chains = (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_chain(model, base, data, horizon, cfg, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(McmcRun {
        burn_in: cfg.burn_in,
        rate_names: base.names().to_vec(),
        chains,
    })
}

fn column_name(name: &str, cluster: usize, clusters: usize) -> String {
    if clusters == 1 {
        name.to_string()
    } else {
        format!("{name}[{}]", cluster + 1)
    }
}

/// `iter,chain,name,value` for every rate of every cluster.
pub fn write_trace_csv<W: Write>(mut w: W, run: &McmcRun) -> Result<()> {
    writeln!(w, "iter,chain,name,value")?;
    for ch in &run.chains {
        for s in &ch.samples {
            let l = s.rates.len();
            for (c, set) in s.rates.iter().enumerate() {
                for (id, name) in set.names().iter().enumerate() {
                    writeln!(
                        w,
                        "{},{},{},{}",
                        s.iter,
                        ch.chain,
                        column_name(name, c, l),
                        set.value(id)
                    )?;
                }
            }
        }
    }
    Ok(())
}

/// `iter,chain,k,c` with 0-based process index and 1-based class.
pub fn write_memberships_csv<W: Write>(mut w: W, run: &McmcRun) -> Result<()> {
    writeln!(w, "iter,chain,k,c")?;
    for ch in &run.chains {
        for s in &ch.samples {
            for (k, c) in s.memberships.iter().enumerate() {
                writeln!(w, "{},{},{},{}", s.iter, ch.chain, k, c + 1)?;
            }
        }
    }
    Ok(())
}

pub fn write_timing_csv<W: Write>(mut w: W, run: &McmcRun) -> Result<()> {
    writeln!(w, "iter,chain,seconds")?;
    for ch in &run.chains {
        for (i, t) in ch.seconds.iter().enumerate() {
            writeln!(w, "{},{},{}", i + 1, ch.chain, t)?;
        }
    }
    Ok(())
}
