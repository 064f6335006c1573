// SPDX-License-Identifier: Apache-2.0

//! Independent multi-seed annealing and Pareto extraction.

use std::panic::{self, AssertUnwindSafe};

use serde::{Deserialize, Serialize};

use crate::annealer::{self, AnnealConfig, SolutionRecord};
use crate::cost::bounding_box;
use crate::error::{Error, Result};
use crate::model::{validate_problem, Floorplan, Problem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolConfig {
    pub n_workers: usize,
    pub base_seed: u64,
    pub anneal: AnnealConfig,
}

impl PoolConfig {
    /// One worker per available core.
    pub fn new(anneal: AnnealConfig, base_seed: u64) -> Self {
        let n_workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        PoolConfig { n_workers, base_seed, anneal }
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.n_workers as u64).map(move |i| self.base_seed.wrapping_add(i))
    }
}

/// A worker that died or returned an error.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("worker with seed {seed} failed: {message}")]
pub struct WorkerFailure {
    pub seed: u64,
    pub message: String,
}

pub type WorkerOutcome = std::result::Result<SolutionRecord, WorkerFailure>;

/// Runs one annealing search per worker, seeds `base_seed + i`, in parallel.
///
/// Results come back in worker order. A failing worker yields a
/// [`WorkerFailure`] in its slot without disturbing the others.
pub fn run_pool(problem: &Problem, config: &PoolConfig) -> Result<Vec<WorkerOutcome>> {
    run_pool_with(problem, config, annealer::run)
}

/// [`run_pool`] with a custom per-worker job.
pub fn run_pool_with<F>(problem: &Problem, config: &PoolConfig, job: F) -> Result<Vec<WorkerOutcome>>
where
    F: Fn(&Problem, &AnnealConfig, u64) -> Result<SolutionRecord> + Sync,
{
    if config.n_workers == 0 {
        return Err(Error::domain("pool needs at least one worker"));
    }
    let issues = validate_problem(problem);
    if !issues.is_empty() {
        return Err(Error::InvalidProblem(issues));
    }
    config.anneal.validate()?;

    let job = &job;
    let outcomes = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .seeds()
            .map(|seed| {
                let handle = scope.spawn(move || {
                    panic::catch_unwind(AssertUnwindSafe(|| job(problem, &config.anneal, seed)))
                });
                (seed, handle)
            })
            .collect();
        handles
            .into_iter()
            .map(|(seed, handle)| match handle.join() {
                Ok(Ok(Ok(record))) => Ok(record),
                Ok(Ok(Err(e))) => Err(WorkerFailure { seed, message: e.to_string() }),
                Ok(Err(payload)) | Err(payload) => {
                    Err(WorkerFailure { seed, message: panic_message(payload.as_ref()) })
                }
            })
            .collect()
    });
    Ok(outcomes)
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        format!("panicked: {s}")
    } else if let Some(s) = payload.downcast_ref::<String>() {
        format!("panicked: {s}")
    } else {
        "panicked".to_string()
    }
}

/// Whitespace share of the bounding box, in percent.
pub fn whitespace_pct(fp: &Floorplan) -> f64 {
    let Some(bbox) = bounding_box(fp) else {
        return 0.0;
    };
    let area = bbox.area();
    if area <= 0.0 {
        return 0.0;
    }
    let used = fp.placements.iter().fold(0.0, |acc, r| acc + r.area());
    100.0 * (area - used) / area
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub hpwl: f64,
    pub whitespace_pct: f64,
    /// Index into the input slice.
    pub index: usize,
    pub seed: u64,
}

/// Non-dominated legal records over (HPWL, whitespace), both minimised,
/// sorted by HPWL. Exact duplicates are all kept.
pub fn pareto_front(records: &[SolutionRecord]) -> Vec<ParetoPoint> {
    let mut points: Vec<ParetoPoint> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.report.legal)
        .map(|(index, r)| ParetoPoint {
            hpwl: r.report.hpwl,
            whitespace_pct: whitespace_pct(&r.floorplan),
            index,
            seed: r.seed,
        })
        .collect();
    points.sort_by(|a, b| {
        a.hpwl
            .total_cmp(&b.hpwl)
            .then(a.whitespace_pct.total_cmp(&b.whitespace_pct))
            .then(a.index.cmp(&b.index))
    });
    let mut front: Vec<ParetoPoint> = Vec::new();
    for p in points {
        let keep = match front.last() {
            None => true,
            Some(last) => {
                p.whitespace_pct < last.whitespace_pct
                    || (p.whitespace_pct == last.whitespace_pct && p.hpwl == last.hpwl)
            }
        };
        if keep {
            front.push(p);
        }
    }
    front
}
