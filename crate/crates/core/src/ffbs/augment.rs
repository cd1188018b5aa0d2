use serde::{Deserialize, Serialize};

use super::{
    backward_sample, build_restrictions, forward_filter, sample_auxiliary, Frontier, SliceConfig,
};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::observation::Evidence;
use crate::path::{strip_virtual, MjpPath};
use crate::rates::RateParams;
use crate::rng::{self, Stream};
use crate::uniformization::resample_virtual_times;

pub const DEFAULT_RETRY_LIMIT: usize = 25;

/// Counts of frontier sizes in power-of-two buckets: bucket `b` holds sizes
/// in `[2^b, 2^(b+1))`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontierHistogram {
    pub buckets: Vec<u64>,
    pub max: usize,
}

impl FrontierHistogram {
    pub fn record(&mut self, size: usize) {
        if size == 0 {
            return;
        }
        let b = (usize::BITS - 1 - size.leading_zeros()) as usize;
        if self.buckets.len() <= b {
            self.buckets.resize(b + 1, 0);
        }
        self.buckets[b] += 1;
        self.max = self.max.max(size);
    }

    pub fn merge(&mut self, other: &FrontierHistogram) {
        if self.buckets.len() < other.buckets.len() {
            self.buckets.resize(other.buckets.len(), 0);
        }
        for (a, b) in self.buckets.iter_mut().zip(&other.buckets) {
            *a += b;
        }
        self.max = self.max.max(other.max);
    }
}

/// Running totals over augmentation steps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AugmentDiagnostics {
    pub steps: u64,
    pub transitions: u64,
    pub virtual_jumps: u64,
    pub clamped_nodes: u64,
    /// Auxiliary redraws after an infeasible slice.
    pub retries: u64,
    /// Steps that exhausted the retry budget and kept the current path.
    pub aborted: u64,
    /// Returned paths that fail to carry every jump observation.
    pub evidence_mismatches: u64,
    pub frontier_sizes: FrontierHistogram,
}

impl AugmentDiagnostics {
    pub fn merge(&mut self, other: &AugmentDiagnostics) {
        self.steps += other.steps;
        self.transitions += other.transitions;
        self.virtual_jumps += other.virtual_jumps;
        self.clamped_nodes += other.clamped_nodes;
        self.retries += other.retries;
        self.aborted += other.aborted;
        self.evidence_mismatches += other.evidence_mismatches;
        self.frontier_sizes.merge(&other.frontier_sizes);
    }

    fn record_frontiers(&mut self, frontiers: &[Frontier]) {
        for f in frontiers {
            self.frontier_sizes.record(f.len());
        }
    }
}

/// One full augmentation: virtual times, auxiliary nodes, restrictions,
/// forward filtering, backward sampling, then removal of virtual jumps.
///
/// Randomness comes from three sub-streams of `seed`: virtual times,
/// auxiliary draws (indexed by attempt) and backward draws (indexed by
/// attempt). An infeasible slice triggers a fresh auxiliary draw; after
/// `retry_limit` retries the current path is returned unchanged.
#[allow(clippy::too_many_arguments)]
pub fn augment_step(
    current: &MjpPath,
    evidence: &Evidence,
    model: &dyn Model,
    rates: &RateParams,
    omega: f64,
    cfg: &SliceConfig,
    retry_limit: usize,
    seed: u64,
    diag: &mut AugmentDiagnostics,
) -> Result<MjpPath> {
    debug_assert!(evidence.jumps_match(current, model));
    let mut vrng = rng::stream(seed, Stream::VirtualTimes, &[]);
    let upath = resample_virtual_times(current, omega, model, rates, &mut vrng)?;
    diag.steps += 1;
    diag.transitions += upath.num_transitions() as u64;
    diag.virtual_jumps += upath.num_virtual() as u64;
    let x0 = current.states[0];
    for attempt in 0..=retry_limit {
        let mut arng = rng::stream(seed, Stream::Auxiliary, &[attempt as u64]);
        let aux = sample_auxiliary(&upath, model, cfg, &mut arng);
        diag.clamped_nodes += aux.num_clamped() as u64;
        let restrictions = build_restrictions(&upath.times, &aux, &evidence.jumps)?;
        let frontiers = match forward_filter(
            &upath.times,
            &restrictions,
            &evidence.timed,
            model,
            rates,
            omega,
            cfg,
            x0,
        ) {
            Ok(f) => f,
            Err(Error::InfeasibleSlice { .. }) => {
                if attempt < retry_limit {
                    diag.retries += 1;
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        diag.record_frontiers(&frontiers);
        let mut brng = rng::stream(seed, Stream::Backward, &[attempt as u64]);
        let sampled = backward_sample(
            &frontiers,
            &upath.times,
            upath.horizon,
            &restrictions,
            model,
            rates,
            omega,
            cfg,
            &mut brng,
        )?;
        let out = strip_virtual(&sampled);
        if !evidence.jumps_match(&out, model) {
            diag.evidence_mismatches += 1;
        }
        return Ok(out);
    }
    diag.aborted += 1;
    Ok(current.clone())
}
