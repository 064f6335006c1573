// SPDX-License-Identifier: Apache-2.0

//! `floorplan` command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 no legal solution.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::annealer::{AnnealConfig, SolutionRecord};
use crate::benchgen::{augment, derive_fixed_outline, AugmentSpec};
use crate::cost::{total_cost, CostWeights, Mode};
use crate::error::{Error, Result};
use crate::io::{
    parse_blocks, parse_bookshelf, parse_constraints, pareto_svg, read_records, read_records_many,
    render_svg, write_constraints, write_records, BookshelfBundle, ConstraintsFile,
};
use crate::model::{dims_from_ar, Outline, Problem, AREA_REL_TOL};
use crate::parallel::{pareto_front, run_pool, whitespace_pct, PoolConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NO_LEGAL: i32 = 2;

/// Soft-block aspect-ratio range applied by `--soft`.
pub const SOFT_AR_RANGE: (f64, f64) = (1.0 / 3.0, 3.0);

#[derive(Debug, Parser)]
#[command(name = "floorplan", version, about = "Constraints-aware B*-tree floorplanner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a pool of annealing searches and write their records.
    Solve(SolveArgs),
    /// Generate a seeded constraints file for a benchmark.
    Augment(AugmentArgs),
    /// Re-evaluate records and extract the legal HPWL/whitespace front.
    Pareto(ParetoArgs),
    /// Draw one record as SVG.
    Render(RenderArgs),
}

/// `WxH` or `auto`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutlineArg {
    Auto,
    Fixed(Outline),
}

impl FromStr for OutlineArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(OutlineArg::Auto);
        }
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected WxH or auto, got `{s}`"))?;
        let parse = |v: &str| match v.trim().parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
            _ => Err(format!("invalid outline dimension `{v}`")),
        };
        Ok(OutlineArg::Fixed(Outline { w: parse(w)?, h: parse(h)? }))
    }
}

impl OutlineArg {
    fn resolve(self, problem: &Problem) -> Outline {
        match self {
            OutlineArg::Auto => derive_fixed_outline(problem),
            OutlineArg::Fixed(o) => o,
        }
    }
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[arg(long)]
    pub blocks: PathBuf,
    #[arg(long)]
    pub nets: PathBuf,
    #[arg(long)]
    pub pl: PathBuf,
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    /// Overrides any outline in the constraints file.
    #[arg(long)]
    pub outline: Option<OutlineArg>,
    /// Soft blocks reshape within [1/3, 3].
    #[arg(long)]
    pub soft: bool,
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 10.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 10.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 10.0)]
    pub zeta: f64,
    #[arg(long, default_value_t = 10.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 10.0)]
    pub mu: f64,
}

impl WeightArgs {
    fn weights(&self) -> CostWeights {
        CostWeights {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            eta: self.eta,
            zeta: self.zeta,
            theta: self.theta,
            mu: self.mu,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value = "casa")]
    pub mode: Mode,
    /// Blocks keep their parsed shape.
    #[arg(long, conflicts_with = "soft")]
    pub hard: bool,
    /// Defaults to the number of available cores.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = 10_000_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.99)]
    pub cooling_ratio: f64,
    #[arg(long, default_value_t = 1000)]
    pub moves_per_temperature: u64,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long)]
    pub blocks: PathBuf,
    #[arg(long)]
    pub pl: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "auto")]
    pub outline: OutlineArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ParetoArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub records: Vec<PathBuf>,
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Front records, re-evaluated.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long)]
    pub blocks: PathBuf,
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    #[arg(long)]
    pub outline: Option<OutlineArg>,
    #[arg(long)]
    pub out: PathBuf,
}

fn apply_constraints(
    problem: &mut Problem,
    constraints: Option<&Path>,
    outline: Option<OutlineArg>,
) -> Result<()> {
    if let Some(path) = constraints {
        let ConstraintsFile { constraints, outline } = parse_constraints(path, problem)?;
        problem.set_constraints(constraints);
        problem.outline = outline;
    }
    if let Some(o) = outline {
        problem.outline = Some(o.resolve(problem));
    }
    Ok(())
}

fn load_problem(args: &ProblemArgs) -> Result<Problem> {
    let mut p = parse_bookshelf(&BookshelfBundle::new(&args.blocks, &args.nets, &args.pl))?;
    if args.soft {
        p.set_soft_ar_range(SOFT_AR_RANGE.0, SOFT_AR_RANGE.1);
    }
    apply_constraints(&mut p, args.constraints.as_deref(), args.outline)?;
    Ok(p)
}

/// Blocks whose placed rectangle does not have the block's area and an
/// admissible aspect ratio.
pub fn shape_violations(rec: &SolutionRecord, problem: &Problem) -> Vec<usize> {
    let mut bad = Vec::new();
    for (b, r) in rec.floorplan.placements.iter().enumerate() {
        let blk = &problem.blocks[b];
        if problem.is_preplaced(b) {
            continue;
        }
        let area_ok = (r.w * r.h - blk.area).abs() <= 1e-6 * blk.area;
        let ar = r.w / r.h;
        let shape_ok = if blk.is_soft && !rec.config.hard_blocks {
            ar >= blk.ar_min * (1.0 - 1e-9) && ar <= blk.ar_max * (1.0 + 1e-9)
        } else {
            dims_from_ar(blk.area, blk.aspect_ratio).is_ok_and(|(w, h)| {
                (w - r.w).abs() <= AREA_REL_TOL.sqrt() * w && (h - r.h).abs() <= AREA_REL_TOL.sqrt() * h
            })
        };
        if !(r.is_valid() && area_ok && shape_ok) {
            bad.push(b);
        }
    }
    bad
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let problem = load_problem(&args.problem)?;
    let anneal = AnnealConfig {
        steps: args.steps,
        mode: args.mode,
        weights: args.weights.weights(),
        cooling_ratio: args.cooling_ratio,
        moves_per_temperature: args.moves_per_temperature,
        hard_blocks: args.hard,
        ..AnnealConfig::default()
    };
    let mut pool = PoolConfig::new(anneal, args.seed);
    if let Some(n) = args.workers {
        pool.n_workers = n;
    }
    let outcomes = run_pool(&problem, &pool)?;
    let mut records = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(f) => {
                writeln!(out, "{f}").ok();
            }
        }
    }
    write_records(&records, &args.out)?;

    let legal: Vec<&SolutionRecord> = records.iter().filter(|r| r.report.legal).collect();
    writeln!(out, "records: {} ({} legal) -> {}", records.len(), legal.len(), args.out.display()).ok();
    if let Some(best) = legal.iter().min_by(|a, b| a.report.hpwl.total_cmp(&b.report.hpwl)) {
        writeln!(
            out,
            "best legal: seed {} hpwl {:.6} whitespace {:.6}%",
            best.seed,
            best.report.hpwl,
            whitespace_pct(&best.floorplan)
        )
        .ok();
    }
    for r in &records {
        writeln!(
            out,
            "seed {}: legal {} hpwl {:.6} boundary_violations {} grouping_violations {} preplaced_deviation {:.6} outline_respected {}",
            r.seed,
            r.report.legal,
            r.report.hpwl,
            r.report.boundary_violation_count,
            r.report.grouping_violation_count,
            r.report.preplaced_deviation,
            r.report.outline_respected
        )
        .ok();
    }
    Ok(if legal.is_empty() { EXIT_NO_LEGAL } else { EXIT_OK })
}

pub fn cmd_augment(args: &AugmentArgs, out: &mut dyn Write) -> Result<i32> {
    let mut problem = parse_blocks(&args.blocks, Some(&args.pl))?;
    let outline = args.outline.resolve(&problem);
    problem.outline = Some(outline);
    let cs = augment(&problem, &AugmentSpec::new(args.seed))?;
    let n = cs.boundary.len() + cs.groups.iter().map(Vec::len).sum::<usize>() + cs.preplaced.len();
    write_constraints(&ConstraintsFile { constraints: cs, outline: Some(outline) }, &problem, &args.out)?;
    writeln!(out, "constrained blocks: {n} -> {}", args.out.display()).ok();
    Ok(EXIT_OK)
}

pub fn cmd_pareto(args: &ParetoArgs, out: &mut dyn Write) -> Result<i32> {
    let problem = load_problem(&args.problem)?;
    let mut records = read_records_many(&args.records)?;
    let mut points = Vec::with_capacity(records.len());
    for (i, rec) in records.iter_mut().enumerate() {
        if rec.floorplan.len() != problem.blocks.len() {
            return Err(Error::domain(format!(
                "record {i} places {} blocks but the problem has {}",
                rec.floorplan.len(),
                problem.blocks.len()
            )));
        }
        let mut fresh = total_cost(&rec.floorplan, &problem, &rec.config.weights, rec.config.mode);
        let misshapen = shape_violations(rec, &problem);
        if !misshapen.is_empty() {
            writeln!(out, "record {i} (seed {}): {} blocks have invalid shapes", rec.seed, misshapen.len()).ok();
            fresh.legal = false;
        }
        if fresh != rec.report {
            writeln!(
                out,
                "record {i} (seed {}): stored report differs from re-evaluation (hpwl {} vs {}, legal {} vs {}); using re-evaluation",
                rec.seed, rec.report.hpwl, fresh.hpwl, rec.report.legal, fresh.legal
            )
            .ok();
            rec.report = fresh;
        }
        points.push((rec.report.hpwl, whitespace_pct(&rec.floorplan), rec.report.legal));
    }
    let front = pareto_front(&records);
    let chosen: Vec<SolutionRecord> = front.iter().map(|p| records[p.index].clone()).collect();
    write_records(&chosen, &args.out)?;
    if let Some(plot) = &args.plot {
        crate::io::write_text(plot, &pareto_svg(&points, &front))?;
    }
    writeln!(out, "records: {} front: {}", records.len(), front.len()).ok();
    for p in &front {
        writeln!(out, "seed {} hpwl {:.6} whitespace {:.6}%", p.seed, p.hpwl, p.whitespace_pct).ok();
    }
    Ok(if front.is_empty() { EXIT_NO_LEGAL } else { EXIT_OK })
}

pub fn cmd_render(args: &RenderArgs, out: &mut dyn Write) -> Result<i32> {
    let mut problem = parse_blocks(&args.blocks, None)?;
    apply_constraints(&mut problem, args.constraints.as_deref(), args.outline)?;
    let records = read_records(&args.records)?;
    let rec = records.get(args.index).ok_or_else(|| {
        Error::domain(format!("index {} out of range ({} records)", args.index, records.len()))
    })?;
    if rec.floorplan.len() != problem.blocks.len() {
        return Err(Error::domain("record does not match the block file"));
    }
    render_svg(&rec.floorplan, &problem, &args.out)?;
    writeln!(out, "wrote {}", args.out.display()).ok();
    Ok(EXIT_OK)
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Augment(a) => cmd_augment(a, out),
        Command::Pareto(a) => cmd_pareto(a, out),
        Command::Render(a) => cmd_render(a, out),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INPUT;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}
