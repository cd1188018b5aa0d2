//! Run configuration: TOML file, `--override` patches, validation, and
//! conversion into library types.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use mjpaug::inference::{McmcConfig, MembershipPrior, RatePrior};
use mjpaug::rates::OrderConstraint;
use mjpaug::uniformization::UniformizationConfig;
use mjpaug::zoo::{self, ModelParams};
use mjpaug::{LabelTag, Model, RateParams, RetrievalProbs};

/// `q_Z` as one probability for every tag or a table keyed by tag name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Retrieval {
    Uniform(f64),
    PerTag(BTreeMap<String, f64>),
}

impl Default for Retrieval {
    fn default() -> Self {
        Retrieval::Uniform(0.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    pub shape: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParamsSpec {
    pub initial_state: Option<Vec<i64>>,
    pub manpower: Option<[u32; 2]>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Starting rates drawn from the prior.
    #[default]
    Prior,
    /// Every cluster starts at the configured rates.
    Rates,
}

fn one() -> usize {
    1
}

fn default_omega_scale() -> f64 {
    mjpaug::uniformization::DEFAULT_OMEGA_SCALE
}

fn default_iterations() -> usize {
    1000
}

fn default_retry_limit() -> usize {
    mjpaug::ffbs::DEFAULT_RETRY_LIMIT
}

fn default_method() -> String {
    "gibbs".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct Config {
    pub model: String,
    #[serde(default)]
    pub model_params: ModelParamsSpec,
    /// Rate values by name: the planted values for `simulate` and the base
    /// (or starting) values for inference.
    #[serde(default)]
    pub rates: BTreeMap<String, f64>,
    /// Rates held constant during inference. Defaults to the model's own.
    #[serde(default)]
    pub fixed: Option<Vec<String>>,
    pub horizon: f64,
    /// Number of processes.
    #[serde(default = "one")]
    pub K: usize,
    /// Per-class rate overrides for simulation; process `k` gets class
    /// `k mod classes.len()`.
    #[serde(default)]
    pub classes: Vec<BTreeMap<String, f64>>,
    /// Spacing of exact state observations written by `simulate`.
    #[serde(default)]
    pub observe_every: Option<f64>,
    #[serde(default)]
    pub q_Z: Retrieval,
    #[serde(default)]
    pub p: f64,
    #[serde(default = "default_omega_scale")]
    pub omega_scale: f64,
    #[serde(default = "one")]
    pub L: usize,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default = "one")]
    pub thin: usize,
    #[serde(default = "one")]
    pub chains: usize,
    #[serde(default = "default_retry_limit")]
    pub retry_limit: usize,
    #[serde(default)]
    pub priors: BTreeMap<String, PriorSpec>,
    /// Membership prior weights, normalized internally.
    #[serde(default)]
    pub membership_prior: Option<Vec<f64>>,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub init: InitMode,
    /// `gibbs`, `kmeans` or `pam`.
    #[serde(default = "default_method")]
    pub method: String,
    /// Rate used to order clusters in centroid methods.
    #[serde(default)]
    pub order_by: Option<String>,
    /// Observation file; defaults to `<out>/observations.jsonl`.
    #[serde(default)]
    pub data: Option<PathBuf>,
    /// `k,class` CSV of true classes (1-based).
    #[serde(default)]
    pub truth: Option<PathBuf>,
    #[serde(default)]
    pub grid_p: Vec<f64>,
    #[serde(default)]
    pub grid_omega: Vec<f64>,
}

/// Parses an override value as a TOML value, falling back to a string.
fn parse_value(text: &str) -> toml::Value {
    let wrapped = format!("v = {text}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t
            .remove("v")
            .unwrap_or_else(|| toml::Value::String(text.into())),
        Err(_) => toml::Value::String(text.into()),
    }
}

fn apply_override(root: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{spec}` is not of the form key=value"))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("override key `{key}` is malformed");
    }
    let mut table = root;
    for p in &parts[..parts.len() - 1] {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("override `{key}`: `{p}` is not a table"))?;
    }
    table.insert(
        parts[parts.len() - 1].to_string(),
        parse_value(value.trim()),
    );
    Ok(())
}

/// A loaded configuration plus its canonical text (after overrides).
pub struct Loaded {
    pub config: Config,
    pub canonical: String,
}

pub fn load(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<Loaded> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut table: toml::Table = text
        .parse()
        .with_context(|| format!("parsing {}", path.display()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    if let Some(s) = seed {
        let s = i64::try_from(s).map_err(|_| anyhow!("seed {s} does not fit a TOML integer"))?;
        table.insert("seed".into(), toml::Value::Integer(s));
    }
    let config: Config = toml::Value::Table(table.clone())
        .try_into()
        .with_context(|| format!("invalid configuration in {}", path.display()))?;
    let canonical = toml::to_string(&config)?;
    config.validate()?;
    Ok(Loaded { config, canonical })
}

/// Library objects built from a validated configuration.
pub struct Setup {
    pub model: Box<dyn Model>,
    pub base: RateParams,
    pub retrieval: RetrievalProbs,
}

impl Config {
    fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            bail!("horizon must be finite and >= 0, got {}", self.horizon);
        }
        if self.K == 0 {
            bail!("K must be at least 1");
        }
        if self.L == 0 || self.chains == 0 || self.thin == 0 {
            bail!("L, chains and thin must be at least 1");
        }
        if let Some(dt) = self.observe_every {
            if !(dt.is_finite() && dt > 0.0) {
                bail!("observe_every must be positive, got {dt}");
            }
        }
        if !matches!(self.method.as_str(), "gibbs" | "kmeans" | "pam") {
            bail!("method `{}` is not one of gibbs, kmeans, pam", self.method);
        }
        UniformizationConfig::new(self.omega_scale)?;
        for &s in &self.grid_omega {
            UniformizationConfig::new(s)?;
        }
        let setup = self.setup()?;
        let mut cfg = self.mcmc(&setup)?;
        cfg.validate(setup.model.as_ref(), &setup.base)?;
        for &p in &self.grid_p {
            cfg.p = p;
            cfg.validate(setup.model.as_ref(), &setup.base)?;
        }
        for class in &self.classes {
            self.class_rates(&setup.base, class)?;
        }
        if let Some(name) = &self.order_by {
            setup.base.require(name)?;
        }
        Ok(())
    }

    /// Checks that the Gibbs sampler can start: with `init = "rates"` every
    /// class begins at the base rates, which strict order constraints reject.
    pub fn check_gibbs_start(&self, setup: &Setup) -> Result<()> {
        if self.init == InitMode::Rates {
            let copies = vec![setup.base.clone(); self.L];
            if !self
                .mcmc(setup)?
                .constraints
                .iter()
                .all(|c| c.holds(&copies))
            {
                bail!("init = \"rates\" starts every class at the same rates, which violates the order constraints");
            }
        }
        Ok(())
    }

    pub fn setup(&self) -> Result<Setup> {
        let params = ModelParams {
            initial_state: self.model_params.initial_state.clone(),
            manpower: self.model_params.manpower.map(|[a, b]| (a, b)),
        };
        let model = zoo::by_name(&self.model, &params)?;
        let defaults = model.default_rates();
        let names: Vec<&str> = defaults.names().iter().map(String::as_str).collect();
        let mut values = defaults.values().to_vec();
        for (name, &v) in &self.rates {
            let id = defaults.require(name)?;
            values[id] = v;
        }
        let mut base = RateParams::new(&names, &values)?;
        let fixed: Vec<String> = match &self.fixed {
            Some(f) => f.clone(),
            None => (0..defaults.len())
                .filter(|&i| defaults.is_fixed(i))
                .map(|i| defaults.name(i).to_string())
                .collect(),
        };
        for name in &fixed {
            base = base.fix(name)?;
        }
        Ok(Setup {
            retrieval: self.retrieval()?,
            model,
            base,
        })
    }

    pub fn retrieval(&self) -> Result<RetrievalProbs> {
        Ok(match &self.q_Z {
            Retrieval::Uniform(q) => RetrievalProbs::uniform(*q)?,
            Retrieval::PerTag(map) => {
                let mut r = RetrievalProbs::none();
                for (tag, &q) in map {
                    let t = LabelTag::parse(tag)
                        .filter(|t| *t != LabelTag::Empty)
                        .ok_or_else(|| anyhow!("unknown label tag `{tag}` in q_Z"))?;
                    r = r.with(t, q)?;
                }
                r
            }
        })
    }

    /// Rates for one planted class.
    pub fn class_rates(
        &self,
        base: &RateParams,
        class: &BTreeMap<String, f64>,
    ) -> Result<RateParams> {
        let mut r = base.clone();
        for (name, &v) in class {
            r.set_by_name(name, v)?;
        }
        r.validate()?;
        Ok(r)
    }

    pub fn rate_prior(&self, base: &RateParams) -> Result<RatePrior> {
        let mut prior = RatePrior::default_for(base);
        for (name, spec) in &self.priors {
            prior.set(base.require(name)?, spec.shape, spec.rate)?;
        }
        Ok(prior)
    }

    pub fn mcmc(&self, setup: &Setup) -> Result<McmcConfig> {
        let base = &setup.base;
        let mut cfg = McmcConfig::new(base, self.L, self.seed);
        cfg.iterations = self.iterations;
        cfg.burn_in = self.burn_in;
        cfg.thin = self.thin;
        cfg.chains = self.chains;
        cfg.uniformization = UniformizationConfig::new(self.omega_scale)?;
        cfg.p = self.p;
        cfg.retrieval = setup.retrieval;
        cfg.rate_prior = self.rate_prior(base)?;
        if let Some(w) = &self.membership_prior {
            let total: f64 = w.iter().sum();
            cfg.membership_prior = MembershipPrior::new(w.iter().map(|x| x / total).collect())?;
        }
        cfg.constraints = self
            .constraints
            .iter()
            .map(|c| OrderConstraint::parse(c, base.names(), self.L))
            .collect::<mjpaug::Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        cfg.retry_limit = self.retry_limit;
        cfg.init_from_prior = self.init == InitMode::Prior;
        Ok(cfg)
    }

    pub fn data_path(&self, out: &Path) -> PathBuf {
        self.data
            .clone()
            .unwrap_or_else(|| out.join("observations.jsonl"))
    }

    /// Configured truth file, else a `truth.csv` next to the data file.
    pub fn truth_path(&self, out: &Path) -> Option<PathBuf> {
        if let Some(t) = &self.truth {
            return Some(t.clone());
        }
        let sibling = self.data_path(out).with_file_name("truth.csv");
        sibling.exists().then_some(sibling)
    }
}
