//! The four subcommands.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use mjpaug::cluster::{centroid_clustering, CentroidConfig, Method};
use mjpaug::diagnostics::{
    best_permutation_accuracy, effective_sample_size, membership_table, multi_chain_ess,
    write_membership_table, write_metrics,
};
use mjpaug::ffbs::AugmentDiagnostics;
use mjpaug::inference::{
    run_mcmc, write_memberships_csv, write_timing_csv, write_trace_csv, McmcRun,
};
use mjpaug::observation::{
    read_observations, thin_jump_observations, write_observations, Evidence, TimedObservation,
};
use mjpaug::path::write_paths;
use mjpaug::rng::{derive_seed, Stream};
use mjpaug::simulate::simulate_gillespie;
use mjpaug::MjpPath;

use crate::config::{Config, Setup};

/// Failure before any computation (exit 2) or during it (exit 1).
pub enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

pub trait Classify<T> {
    fn config(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for std::result::Result<T, E> {
    fn config(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    config_sha256: String,
    seed: u64,
    wall_clock_seconds: f64,
}

pub struct Ctx<'a> {
    pub command: &'a str,
    pub config: &'a Config,
    pub canonical: &'a str,
    pub out: &'a Path,
    pub started: Instant,
}

fn create(out: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = out.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn finish(ctx: &Ctx) -> Result<()> {
    fs::write(ctx.out.join("config.toml"), ctx.canonical)?;
    let manifest = Manifest {
        command: ctx.command,
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: format!("{:x}", Sha256::digest(ctx.canonical.as_bytes())),
        seed: ctx.config.seed,
        wall_clock_seconds: ctx.started.elapsed().as_secs_f64(),
    };
    let mut w = create(ctx.out, "manifest.json")?;
    serde_json::to_writer_pretty(&mut w, &manifest)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn load_data(ctx: &Ctx) -> Result<Vec<Evidence>> {
    let path = ctx.config.data_path(ctx.out);
    let f = File::open(&path).with_context(|| format!("opening data file {}", path.display()))?;
    let data = read_observations(BufReader::new(f), ctx.config.K)
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(data)
}

/// True classes, 0-based, from a `k,class` CSV with 1-based classes.
fn load_truth(path: &Path, k: usize) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading truth file {}", path.display()))?;
    let mut truth = vec![None; k];
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .with_context(|| format!("{}:{}: expected `k,class`", path.display(), i + 1))?;
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        if a >= k || b == 0 {
            bail!(
                "{}:{}: process or class out of range",
                path.display(),
                i + 1
            );
        }
        truth[a] = Some(b - 1);
    }
    truth
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.with_context(|| format!("truth file has no class for process {i}")))
        .collect()
}

pub fn simulate(ctx: &Ctx, setup: &Setup) -> Result<()> {
    let cfg = ctx.config;
    let model = setup.model.as_ref();
    let classes: Vec<_> = if cfg.classes.is_empty() {
        vec![setup.base.clone()]
    } else {
        cfg.classes
            .iter()
            .map(|c| cfg.class_rates(&setup.base, c))
            .collect::<Result<_>>()?
    };
    let mut paths = Vec::with_capacity(cfg.K);
    let mut evidence = Vec::with_capacity(cfg.K);
    let mut truth = Vec::with_capacity(cfg.K);
    for k in 0..cfg.K {
        let c = k % classes.len();
        let path = simulate_gillespie(
            model,
            &classes[c],
            cfg.horizon,
            derive_seed(cfg.seed, Stream::Simulate, &[k as u64]),
        )?;
        let jumps = thin_jump_observations(
            &path,
            model,
            &setup.retrieval,
            derive_seed(cfg.seed, Stream::Observe, &[k as u64]),
        );
        let mut timed = Vec::new();
        if let Some(dt) = cfg.observe_every {
            let mut i = 1;
            while i as f64 * dt <= cfg.horizon {
                let t = i as f64 * dt;
                timed.push(TimedObservation::exact(t, path.state_at(t)));
                i += 1;
            }
        }
        evidence.push(Evidence::new(timed, jumps));
        paths.push(path);
        truth.push(c);
    }
    let mut w = create(ctx.out, "paths.jsonl")?;
    write_paths(&mut w, &paths)?;
    w.flush()?;
    let mut w = create(ctx.out, "observations.jsonl")?;
    write_observations(&mut w, &evidence)?;
    w.flush()?;
    let mut w = create(ctx.out, "truth.csv")?;
    writeln!(w, "k,class")?;
    for (k, c) in truth.iter().enumerate() {
        writeln!(w, "{k},{}", c + 1)?;
    }
    w.flush()?;
    let jumps: usize = paths.iter().map(MjpPath::num_jumps).sum();
    let zs: usize = evidence.iter().map(|e| e.jumps.len()).sum();
    let ys: usize = evidence.iter().map(|e| e.timed.len()).sum();
    println!(
        "simulated {} processes: {jumps} jumps, {zs} jump observations, {ys} state observations",
        cfg.K
    );
    finish(ctx)
}

#[derive(Serialize)]
struct ChainReport {
    chain: usize,
    augmentation: AugmentDiagnostics,
    ess: Vec<(String, f64)>,
}

/// ESS of every free rate of every cluster, per chain.
fn ess_table(run: &McmcRun, setup: &Setup, clusters: usize) -> Result<Vec<Vec<(String, f64)>>> {
    let free: Vec<usize> = setup.base.free_ids().collect();
    (0..run.chains.len())
        .map(|ch| {
            let mut rows = Vec::new();
            for c in 0..clusters {
                for &id in &free {
                    let name = setup.base.name(id);
                    let trace = run.trace(ch, c, name)?;
                    let ess = if trace.len() < 10 {
                        0.0
                    } else {
                        effective_sample_size(&trace)?.value
                    };
                    let label = if clusters == 1 {
                        name.to_string()
                    } else {
                        format!("{name}[{}]", c + 1)
                    };
                    rows.push((label, ess));
                }
            }
            Ok(rows)
        })
        .collect()
}

/// Multi-chain ESS of every free rate of every cluster.
fn pooled_ess(run: &McmcRun, setup: &Setup, clusters: usize) -> Result<Vec<(String, f64)>> {
    let mut rows = Vec::new();
    for c in 0..clusters {
        for id in setup.base.free_ids() {
            let name = setup.base.name(id);
            let traces = (0..run.chains.len())
                .map(|ch| run.trace(ch, c, name))
                .collect::<mjpaug::Result<Vec<_>>>()?;
            let ess = if traces[0].len() < 10 {
                0.0
            } else {
                let refs: Vec<&[f64]> = traces.iter().map(Vec::as_slice).collect();
                multi_chain_ess(&refs)?.value
            };
            let label = if clusters == 1 {
                name.to_string()
            } else {
                format!("{name}[{}]", c + 1)
            };
            rows.push((label, ess));
        }
    }
    Ok(rows)
}

fn write_run(ctx: &Ctx, setup: &Setup, run: &McmcRun) -> Result<()> {
    let mut w = create(ctx.out, "trace.csv")?;
    write_trace_csv(&mut w, run)?;
    w.flush()?;
    let mut w = create(ctx.out, "memberships.csv")?;
    write_memberships_csv(&mut w, run)?;
    w.flush()?;
    let mut w = create(ctx.out, "timing.csv")?;
    write_timing_csv(&mut w, run)?;
    w.flush()?;
    let ess = ess_table(run, setup, ctx.config.L)?;
    let reports: Vec<ChainReport> = run
        .chains
        .iter()
        .zip(ess)
        .map(|(ch, ess)| ChainReport {
            chain: ch.chain,
            augmentation: ch.diagnostics.clone(),
            ess,
        })
        .collect();
    let mut w = create(ctx.out, "diagnostics.json")?;
    serde_json::to_writer_pretty(&mut w, &reports)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn infer(ctx: &Ctx, setup: &Setup) -> Result<()> {
    let data = load_data(ctx)?;
    let cfg = ctx.config.mcmc(setup)?;
    let run = run_mcmc(
        setup.model.as_ref(),
        &setup.base,
        &data,
        ctx.config.horizon,
        &cfg,
    )?;
    write_run(ctx, setup, &run)?;
    let kept: usize = run.chains.iter().map(|c| run.kept(c.chain).count()).sum();
    println!(
        "{} iterations x {} chains on {} processes; {kept} samples kept",
        cfg.iterations,
        cfg.chains,
        data.len()
    );
    finish(ctx)
}

/// Most frequent class of each process over iterations.
fn modal(iterations: &[Vec<usize>], l: usize) -> Vec<usize> {
    let k = iterations.first().map_or(0, Vec::len);
    (0..k)
        .map(|i| {
            let mut counts = vec![0usize; l];
            for a in iterations {
                counts[a[i]] += 1;
            }
            (0..l).rev().max_by_key(|&c| counts[c]).unwrap_or(0)
        })
        .collect()
}

pub fn cluster(ctx: &Ctx, setup: &Setup) -> Result<()> {
    let cfg = ctx.config;
    let data = load_data(ctx)?;
    let l = cfg.L;
    let iterations: Vec<Vec<usize>> = if cfg.method == "gibbs" {
        let mc = cfg.mcmc(setup)?;
        let run = run_mcmc(setup.model.as_ref(), &setup.base, &data, cfg.horizon, &mc)?;
        write_run(ctx, setup, &run)?;
        run.chains
            .iter()
            .flat_map(|ch| run.kept(ch.chain).map(|s| s.memberships.clone()))
            .collect()
    } else {
        let method = Method::parse(&cfg.method).expect("validated method");
        let mut cc = CentroidConfig::new(method, &setup.base, l, cfg.seed);
        cc.iterations = cfg.iterations;
        cc.uniformization = mjpaug::uniformization::UniformizationConfig::new(cfg.omega_scale)?;
        cc.p = cfg.p;
        cc.retrieval = setup.retrieval;
        cc.rate_prior = cfg.rate_prior(&setup.base)?;
        cc.retry_limit = cfg.retry_limit;
        if let Some(name) = &cfg.order_by {
            cc.order_by = Some(setup.base.require(name)?);
        }
        let run = centroid_clustering(setup.model.as_ref(), &setup.base, &data, cfg.horizon, &cc)?;
        let mut w = create(ctx.out, "assignments_by_iteration.csv")?;
        writeln!(w, "iter,k,c")?;
        for (i, a) in run.assignments.iter().enumerate() {
            for (k, c) in a.iter().enumerate() {
                writeln!(w, "{},{k},{}", i + 1, c + 1)?;
            }
        }
        w.flush()?;
        run.assignments.into_iter().skip(cfg.burn_in).collect()
    };
    if iterations.is_empty() {
        bail!("no iterations left after burn-in");
    }
    let truth = match cfg.truth_path(ctx.out) {
        Some(p) => Some(load_truth(&p, data.len())?),
        None => None,
    };
    let table = membership_table(&iterations, truth.as_deref(), l)?;
    let mut w = create(ctx.out, "summary.csv")?;
    write_membership_table(&mut w, &table)?;
    w.flush()?;
    let assignment = modal(&iterations, l);
    let mut w = create(ctx.out, "assignments.csv")?;
    writeln!(w, "k,class")?;
    for (k, c) in assignment.iter().enumerate() {
        writeln!(w, "{k},{}", c + 1)?;
    }
    w.flush()?;
    let mut metrics = Vec::new();
    if let Some(t) = &truth {
        let acc = best_permutation_accuracy(&assignment, t, l);
        metrics.push(("accuracy".to_string(), "modal".to_string(), acc));
        for row in &table {
            if let Some(f1) = &row.f1 {
                metrics.push(("f1_mean".to_string(), format!("{}", row.class + 1), f1.mean));
            }
        }
        println!(
            "{} on {} processes: modal accuracy {acc:.3}",
            cfg.method,
            data.len()
        );
    } else {
        println!("{} on {} processes", cfg.method, data.len());
    }
    let mut w = create(ctx.out, "metrics.csv")?;
    write_metrics(&mut w, &metrics)?;
    w.flush()?;
    finish(ctx)
}

struct Cell {
    omega: f64,
    p: f64,
    ess: Vec<(String, f64)>,
    seconds: f64,
    augment: f64,
}

pub fn compare(ctx: &Ctx, setup: &Setup) -> Result<()> {
    let cfg = ctx.config;
    let data = load_data(ctx)?;
    let grid_p = if cfg.grid_p.is_empty() {
        vec![cfg.p]
    } else {
        cfg.grid_p.clone()
    };
    let grid_omega = if cfg.grid_omega.is_empty() {
        vec![cfg.omega_scale]
    } else {
        cfg.grid_omega.clone()
    };
    let mut cells = Vec::new();
    for &omega in &grid_omega {
        for &p in &grid_p {
            let mut mc = cfg.mcmc(setup)?;
            mc.p = p;
            mc.uniformization = mjpaug::uniformization::UniformizationConfig::new(omega)?;
            let run = run_mcmc(setup.model.as_ref(), &setup.base, &data, cfg.horizon, &mc)?;
            let ess = pooled_ess(&run, setup, cfg.L)?;
            let b = cfg.burn_in.min(cfg.iterations);
            let seconds: f64 = run
                .chains
                .iter()
                .map(|c| c.seconds[b..].iter().sum::<f64>())
                .sum();
            let aug: Vec<f64> = run
                .chains
                .iter()
                .flat_map(|c| c.augment_seconds.iter().copied())
                .collect();
            let augment = if aug.is_empty() {
                0.0
            } else {
                aug.iter().sum::<f64>() / aug.len() as f64
            };
            cells.push(Cell {
                omega,
                p,
                ess,
                seconds,
                augment,
            });
        }
    }
    let mut w = create(ctx.out, "compare.csv")?;
    writeln!(
        w,
        "omega_scale,p,name,ess,ess_per_second,mean_augment_seconds,time_decrease_pct"
    )?;
    for cell in &cells {
        let baseline = cells.iter().find(|c| c.omega == cell.omega && c.p == 0.0);
        let decrease = match baseline {
            Some(b) if cell.p == 0.0 || b.augment <= 0.0 => "0".to_string(),
            Some(b) => format!("{}", 100.0 * (1.0 - cell.augment / b.augment)),
            None => String::new(),
        };
        for (name, ess) in &cell.ess {
            let rate = if cell.seconds > 0.0 {
                ess / cell.seconds
            } else {
                0.0
            };
            writeln!(
                w,
                "{},{},{name},{ess},{rate},{},{decrease}",
                cell.omega, cell.p, cell.augment
            )?;
        }
    }
    w.flush()?;
    println!("compared {} grid cells", cells.len());
    finish(ctx)
}
