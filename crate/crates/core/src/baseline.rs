//! Plain uniformization-based FFBS with no auxiliary variables: every
//! transition without a jump observation is unrestricted, and an
//! unobserved labelled jump is weighted by its non-retrieval probability.

use crate::error::{Error, Result};
use crate::ffbs::Frontier;
use crate::model::{Model, Move};
use crate::observation::{Evidence, JumpLabel, RetrievalProbs};
use crate::path::{strip_virtual, MjpPath};
use crate::rates::RateParams;
use crate::rng::{self, Stream};
use crate::state::State;
use crate::uniformization::resample_virtual_times;

fn unobserved_weight(q: &RetrievalProbs, label: JumpLabel) -> f64 {
    if label.is_empty() {
        return 1.0;
    }
    let q = q.get(label.tag);
    if q >= 1.0 {
        0.0
    } else {
        1.0 - q
    }
}

/// Label observed at each grid transition, if any.
fn observed_labels(times: &[f64], evidence: &Evidence) -> Result<Vec<Option<JumpLabel>>> {
    let m = times.len() - 1;
    let mut out = vec![None; m];
    let mut i = 1;
    for z in evidence.jumps.entries() {
        while i <= m && times[i] < z.time {
            i += 1;
        }
        if i > m || times[i] != z.time {
            return Err(Error::UnmatchedObservation { time: z.time });
        }
        out[i - 1] = Some(z.label);
    }
    Ok(out)
}

/// One baseline augmentation. Uses the same seed sub-streams as
/// [`crate::ffbs::augment_step`] for virtual times and backward draws.
pub fn baseline_augment_step(
    current: &MjpPath,
    evidence: &Evidence,
    model: &dyn Model,
    rates: &RateParams,
    omega: f64,
    q: &RetrievalProbs,
    seed: u64,
) -> Result<MjpPath> {
    let mut vrng = rng::stream(seed, Stream::VirtualTimes, &[]);
    let upath = resample_virtual_times(current, omega, model, rates, &mut vrng)?;
    let times = &upath.times;
    let m = upath.num_transitions();
    let observed = observed_labels(times, evidence)?;

    let mut windows = Vec::with_capacity(m + 1);
    let mut j = 0;
    for i in 0..=m {
        let start = j;
        let end = if i < m { times[i + 1] } else { f64::INFINITY };
        while j < evidence.timed.len() && evidence.timed[j].time < end {
            j += 1;
        }
        windows.push(&evidence.timed[start..j]);
    }

    let mut alpha: Vec<Frontier> = Vec::with_capacity(m + 1);
    let mut a0 = Frontier::point(current.states[0]);
    if !a0.finish(windows[0]) {
        return Err(Error::InfeasibleSlice { index: 0 });
    }
    alpha.push(a0);
    let mut moves: Vec<Move> = Vec::new();
    for i in 1..=m {
        let z = observed[i - 1];
        let mut next = Frontier::default();
        for (x, a) in alpha[i - 1].iter() {
            moves.clear();
            model.moves_out(x, &mut moves);
            let exit: f64 = moves.iter().map(|mv| mv.rate_value(rates)).sum();
            if exit > omega {
                return Err(Error::DominatingRate {
                    omega,
                    exit_rate: exit,
                });
            }
            if z.is_none() {
                let w = unobserved_weight(q, JumpLabel::EMPTY) * (1.0 - exit / omega) * a;
                if w > 0.0 {
                    next.add(*x, w);
                }
            }
            for mv in &moves {
                let label = model.label(x, &mv.state);
                let f = match z {
                    None => unobserved_weight(q, label),
                    Some(l) if l == label => 1.0,
                    Some(_) => continue,
                };
                let w = f * (mv.rate_value(rates) / omega) * a;
                if w > 0.0 {
                    next.add(mv.state, w);
                }
            }
        }
        if !next.finish(windows[i]) {
            return Err(Error::InfeasibleSlice { index: i });
        }
        alpha.push(next);
    }

    let mut brng = rng::stream(seed, Stream::Backward, &[0]);
    let last = &alpha[m];
    let k = pick(last.weights(), &mut brng).ok_or(Error::BackwardConsistency { index: m })?;
    let mut states = vec![last.states()[k]; m + 1];
    let mut cand: Vec<State> = Vec::new();
    let mut w: Vec<f64> = Vec::new();
    let mut preds: Vec<State> = Vec::new();
    for i in (1..=m).rev() {
        let y = states[i];
        let prev = &alpha[i - 1];
        cand.clear();
        w.clear();
        match observed[i - 1] {
            None => {
                let a = prev.weight(&y);
                if a > 0.0 {
                    let exit = model.exit_rate(&y, rates);
                    cand.push(y);
                    w.push(unobserved_weight(q, JumpLabel::EMPTY) * (1.0 - exit / omega) * a);
                }
                moves.clear();
                model.moves_in(&y, &mut moves);
                for mv in &moves {
                    let a = prev.weight(&mv.state);
                    if a > 0.0 {
                        let f = unobserved_weight(q, model.label(&mv.state, &y));
                        cand.push(mv.state);
                        w.push(f * (mv.rate_value(rates) / omega) * a);
                    }
                }
            }
            Some(l) => {
                preds.clear();
                model.compatible_predecessors(&y, l, &mut preds);
                for x in &preds {
                    let a = prev.weight(x);
                    if a > 0.0 {
                        cand.push(*x);
                        w.push((model.rate(x, &y, rates) / omega) * a);
                    }
                }
            }
        }
        let k = pick(&w, &mut brng).ok_or(Error::BackwardConsistency { index: i })?;
        states[i - 1] = cand[k];
    }
    Ok(strip_virtual(&crate::path::UniformizedPath {
        horizon: upath.horizon,
        times: upath.times.clone(),
        states,
    }))
}

fn pick<R: rand::Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if u < w {
                return Some(i);
            }
            u -= w;
            last = Some(i);
        }
    }
    last
}
