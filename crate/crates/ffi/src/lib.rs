// SPDX-License-Identifier: Apache-2.0

//! C ABI over the floorplan engine.
//!
//! Problems and solutions are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! an [`FpStatus`]; on failure [`fp_last_error`] describes the cause on the
//! calling thread.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use floorplan::annealer::{self, AnnealConfig, SolutionRecord};
use floorplan::benchgen::{augment, derive_fixed_outline, AugmentSpec};
use floorplan::cost::{CostWeights, Mode};
use floorplan::io::{self, BookshelfBundle, ConstraintsFile};
use floorplan::model::{validate_problem, Outline, Problem};
use floorplan::parallel::{run_pool, PoolConfig};
use floorplan::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidProblem = 5,
    Conflict = 6,
    Domain = 7,
    OutOfRange = 8,
    WorkerFailed = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FpMode {
    Casa = 0,
    Classical = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FpWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
    pub zeta: f64,
    pub theta: f64,
    pub mu: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FpAnnealConfig {
    pub steps: u64,
    pub mode: FpMode,
    pub weights: FpWeights,
    pub fixing_move_prob: f64,
    pub ar_move_prob: f64,
    pub swap_vs_move_prob: f64,
    pub left_vs_right_prob: f64,
    pub cooling_ratio: f64,
    pub moves_per_temperature: u64,
    pub initial_acceptance_target: f64,
    pub hard_blocks: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FpRect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FpCostReport {
    pub hpwl: f64,
    pub bbox_area: f64,
    pub outline_cost: f64,
    pub grouping_cost: f64,
    pub boundary_violation_count: usize,
    pub grouping_violation_count: usize,
    pub preplaced_deviation: f64,
    pub overlap_area: f64,
    pub outline_respected: bool,
    pub total: f64,
    pub legal: bool,
}

/// Opaque benchmark with its constraints.
pub struct FpProblem {
    inner: Problem,
}

/// Opaque result of one annealing run.
pub struct FpSolution {
    inner: SolutionRecord,
}

/// Opaque pool result; slots of failed workers hold no solution.
pub struct FpSolutionList {
    slots: Vec<Result<SolutionRecord, String>>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(FpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => FpStatus::Io,
            Error::Parse { .. } | Error::UnknownEndpoint { .. } => FpStatus::Parse,
            Error::InvalidProblem(_) => FpStatus::InvalidProblem,
            Error::ConflictingConstraint { .. } => FpStatus::Conflict,
            Error::UnknownBlock(_) => FpStatus::OutOfRange,
            Error::Domain(_) | Error::NotCompact { .. } => FpStatus::Domain,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: FpStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FpStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            FpStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return fail(FpStatus::NullArgument, format!("{what} is null"));
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => fail(FpStatus::InvalidUtf8, format!("{what} is not valid UTF-8")),
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().map_or_else(|| fail(FpStatus::NullArgument, format!("{what} is null")), Ok)
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().map_or_else(|| fail(FpStatus::NullArgument, format!("{what} is null")), Ok)
}

fn to_config(c: &FpAnnealConfig) -> AnnealConfig {
    let w = c.weights;
    AnnealConfig {
        steps: c.steps,
        mode: match c.mode {
            FpMode::Casa => Mode::Casa,
            FpMode::Classical => Mode::Classical,
        },
        weights: CostWeights {
            alpha: w.alpha,
            beta: w.beta,
            gamma: w.gamma,
            eta: w.eta,
            zeta: w.zeta,
            theta: w.theta,
            mu: w.mu,
        },
        fixing_move_prob: c.fixing_move_prob,
        ar_move_prob: c.ar_move_prob,
        swap_vs_move_prob: c.swap_vs_move_prob,
        left_vs_right_prob: c.left_vs_right_prob,
        cooling_ratio: c.cooling_ratio,
        moves_per_temperature: c.moves_per_temperature,
        initial_acceptance_target: c.initial_acceptance_target,
        hard_blocks: c.hard_blocks,
    }
}

/// Last error message on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn fp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn fp_anneal_config_default() -> FpAnnealConfig {
    let d = AnnealConfig::default();
    let w = d.weights;
    FpAnnealConfig {
        steps: d.steps,
        mode: FpMode::Casa,
        weights: FpWeights {
            alpha: w.alpha,
            beta: w.beta,
            gamma: w.gamma,
            eta: w.eta,
            zeta: w.zeta,
            theta: w.theta,
            mu: w.mu,
        },
        fixing_move_prob: d.fixing_move_prob,
        ar_move_prob: d.ar_move_prob,
        swap_vs_move_prob: d.swap_vs_move_prob,
        left_vs_right_prob: d.left_vs_right_prob,
        cooling_ratio: d.cooling_ratio,
        moves_per_temperature: d.moves_per_temperature,
        initial_acceptance_target: d.initial_acceptance_target,
        hard_blocks: d.hard_blocks,
    }
}

/// Loads a Bookshelf benchmark.
#[no_mangle]
pub unsafe extern "C" fn fp_problem_load(
    blocks: *const c_char,
    nets: *const c_char,
    pl: *const c_char,
    out: *mut *mut FpProblem,
) -> FpStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = ptr::null_mut();
        let bundle = BookshelfBundle::new(
            path_arg(blocks, "blocks path")?,
            path_arg(nets, "nets path")?,
            path_arg(pl, "pl path")?,
        );
        let inner = io::parse_bookshelf(&bundle)?;
        *out = Box::into_raw(Box::new(FpProblem { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fp_problem_free(problem: *mut FpProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Applies a constraints file. Its outline, when present, replaces the current one.
#[no_mangle]
pub unsafe extern "C" fn fp_problem_load_constraints(
    problem: *mut FpProblem,
    path: *const c_char,
) -> FpStatus {
    guard(|| {
        let p = &mut as_mut(problem, "problem")?.inner;
        let ConstraintsFile { constraints, outline } = io::parse_constraints(&path_arg(path, "path")?, p)?;
        p.set_constraints(constraints);
        if outline.is_some() {
            p.outline = outline;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fp_problem_set_outline(problem: *mut FpProblem, w: f64, h: f64) -> FpStatus {
    guard(|| {
        let p = &mut as_mut(problem, "problem")?.inner;
        if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
            return fail(FpStatus::Domain, format!("invalid outline {w} x {h}"));
        }
        p.outline = Some(Outline { w, h });
        Ok(())
    })
}

/// Square outline with 10% whitespace over the total block area.
#[no_mangle]
pub unsafe extern "C" fn fp_problem_auto_outline(problem: *mut FpProblem) -> FpStatus {
    guard(|| {
        let p = &mut as_mut(problem, "problem")?.inner;
        p.outline = Some(derive_fixed_outline(p));
        Ok(())
    })
}

/// Makes every block soft within `[ar_min, ar_max]`.
#[no_mangle]
pub unsafe extern "C" fn fp_problem_set_soft(problem: *mut FpProblem, ar_min: f64, ar_max: f64) -> FpStatus {
    guard(|| {
        let p = &mut as_mut(problem, "problem")?.inner;
        if !(ar_min > 0.0 && ar_min <= ar_max && ar_max.is_finite()) {
            return fail(FpStatus::Domain, format!("invalid aspect-ratio range [{ar_min}, {ar_max}]"));
        }
        p.set_soft_ar_range(ar_min, ar_max);
        Ok(())
    })
}

/// Number of blocks, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn fp_problem_block_count(problem: *const FpProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.blocks.len())
}

/// Checks the problem; on failure the message lists every issue.
#[no_mangle]
pub unsafe extern "C" fn fp_problem_validate(problem: *const FpProblem) -> FpStatus {
    guard(|| {
        let p = &as_ref(problem, "problem")?.inner;
        let issues = validate_problem(p);
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidProblem(issues).into())
        }
    })
}

/// Writes a seeded constraints file for the problem. Needs an outline.
#[no_mangle]
pub unsafe extern "C" fn fp_problem_augment(
    problem: *const FpProblem,
    seed: u64,
    path: *const c_char,
) -> FpStatus {
    guard(|| {
        let p = &as_ref(problem, "problem")?.inner;
        let path = path_arg(path, "path")?;
        let cs = augment(p, &AugmentSpec::new(seed))?;
        io::write_constraints(&ConstraintsFile { constraints: cs, outline: p.outline }, p, &path)?;
        Ok(())
    })
}

/// Runs one annealing search.
#[no_mangle]
pub unsafe extern "C" fn fp_solve(
    problem: *const FpProblem,
    config: *const FpAnnealConfig,
    seed: u64,
    out: *mut *mut FpSolution,
) -> FpStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = ptr::null_mut();
        let p = &as_ref(problem, "problem")?.inner;
        let cfg = to_config(as_ref(config, "config")?);
        let inner = annealer::run(p, &cfg, seed)?;
        *out = Box::into_raw(Box::new(FpSolution { inner }));
        Ok(())
    })
}

/// Runs `n_workers` searches in parallel with seeds `base_seed + i`.
#[no_mangle]
pub unsafe extern "C" fn fp_solve_pool(
    problem: *const FpProblem,
    config: *const FpAnnealConfig,
    n_workers: usize,
    base_seed: u64,
    out: *mut *mut FpSolutionList,
) -> FpStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = ptr::null_mut();
        let p = &as_ref(problem, "problem")?.inner;
        let anneal = to_config(as_ref(config, "config")?);
        let pool = PoolConfig { n_workers, base_seed, anneal };
        let slots = run_pool(p, &pool)?
            .into_iter()
            .map(|r| r.map_err(|f| f.to_string()))
            .collect();
        *out = Box::into_raw(Box::new(FpSolutionList { slots }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fp_solution_free(solution: *mut FpSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

#[no_mangle]
pub unsafe extern "C" fn fp_solution_seed(solution: *const FpSolution) -> u64 {
    solution.as_ref().map_or(0, |s| s.inner.seed)
}

#[no_mangle]
pub unsafe extern "C" fn fp_solution_report(solution: *const FpSolution, out: *mut FpCostReport) -> FpStatus {
    guard(|| {
        let r = &as_ref(solution, "solution")?.inner.report;
        *as_mut(out, "out")? = FpCostReport {
            hpwl: r.hpwl,
            bbox_area: r.bbox_area,
            outline_cost: r.outline_cost,
            grouping_cost: r.grouping_cost,
            boundary_violation_count: r.boundary_violation_count,
            grouping_violation_count: r.grouping_violation_count,
            preplaced_deviation: r.preplaced_deviation,
            overlap_area: r.overlap_area,
            outline_respected: r.outline_respected,
            total: r.total,
            legal: r.legal,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fp_solution_placement(
    solution: *const FpSolution,
    block: usize,
    out: *mut FpRect,
) -> FpStatus {
    guard(|| {
        let s = &as_ref(solution, "solution")?.inner;
        let out = as_mut(out, "out")?;
        let Some(r) = s.floorplan.placements.get(block) else {
            return fail(FpStatus::OutOfRange, format!("block {block} out of range"));
        };
        *out = FpRect { x: r.x, y: r.y, w: r.w, h: r.h };
        Ok(())
    })
}

/// Writes the solution as SVG using the problem's names and constraints.
#[no_mangle]
pub unsafe extern "C" fn fp_solution_render_svg(
    problem: *const FpProblem,
    solution: *const FpSolution,
    path: *const c_char,
) -> FpStatus {
    guard(|| {
        let p = &as_ref(problem, "problem")?.inner;
        let s = &as_ref(solution, "solution")?.inner;
        if s.floorplan.len() != p.blocks.len() {
            return fail(FpStatus::Domain, "solution does not match the problem");
        }
        io::render_svg(&s.floorplan, p, &path_arg(path, "path")?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn fp_solution_list_free(list: *mut FpSolutionList) {
    if !list.is_null() {
        drop(Box::from_raw(list));
    }
}

/// Number of worker slots, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn fp_solution_list_len(list: *const FpSolutionList) -> usize {
    list.as_ref().map_or(0, |l| l.slots.len())
}

/// Copies slot `index` into a new solution handle. A failed worker yields
/// `FpWorkerFailed` with its message.
#[no_mangle]
pub unsafe extern "C" fn fp_solution_list_get(
    list: *const FpSolutionList,
    index: usize,
    out: *mut *mut FpSolution,
) -> FpStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = ptr::null_mut();
        let l = as_ref(list, "list")?;
        match l.slots.get(index) {
            None => fail(FpStatus::OutOfRange, format!("slot {index} out of range")),
            Some(Err(msg)) => fail(FpStatus::WorkerFailed, msg.clone()),
            Some(Ok(rec)) => {
                *out = Box::into_raw(Box::new(FpSolution { inner: rec.clone() }));
                Ok(())
            }
        }
    })
}

/// Writes the successful slots as newline-delimited JSON records.
#[no_mangle]
pub unsafe extern "C" fn fp_solution_list_write(list: *const FpSolutionList, path: *const c_char) -> FpStatus {
    guard(|| {
        let l = as_ref(list, "list")?;
        let path = path_arg(path, "path")?;
        let recs: Vec<SolutionRecord> = l.slots.iter().filter_map(|s| s.as_ref().ok().cloned()).collect();
        io::write_records(&recs, &path)?;
        Ok(())
    })
}
