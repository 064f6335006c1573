// SPDX-License-Identifier: Apache-2.0

//! Constraints-aware simulated annealing over B*-trees.
//!
//! Every step either applies a standard move (reshape, swap, relocate) that is
//! accepted by the Metropolis rule, or, rarely and only while boundary
//! constraints are violated, a constraints-fixing move that is always kept.
//! The classical mode drops fixing moves and anchoring and prices every
//! constraint in the cost function instead.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::btree::{random_tree, BStarTree, LinkSnapshot, Packer, Side};
use crate::cost::{bbox_of, edge_satisfied, CostReport, CostWeights, Evaluator, Mode};
use crate::error::{Error, Result};
use crate::model::{validate_problem, Edge, Floorplan, Problem, Rect};

/// Random moves sampled when calibrating the initial temperature.
pub const CALIBRATION_SAMPLES: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub steps: u64,
    pub mode: Mode,
    pub weights: CostWeights,
    pub fixing_move_prob: f64,
    pub ar_move_prob: f64,
    pub swap_vs_move_prob: f64,
    pub left_vs_right_prob: f64,
    pub cooling_ratio: f64,
    pub moves_per_temperature: u64,
    pub initial_acceptance_target: f64,
    pub hard_blocks: bool,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            steps: 10_000_000,
            mode: Mode::Casa,
            weights: CostWeights::default(),
            fixing_move_prob: 0.0005,
            ar_move_prob: 0.333,
            swap_vs_move_prob: 0.5,
            left_vs_right_prob: 0.5,
            cooling_ratio: 0.99,
            moves_per_temperature: 1000,
            initial_acceptance_target: 0.9,
            hard_blocks: false,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("fixing_move_prob", self.fixing_move_prob),
            ("ar_move_prob", self.ar_move_prob),
            ("swap_vs_move_prob", self.swap_vs_move_prob),
            ("left_vs_right_prob", self.left_vs_right_prob),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if !(self.cooling_ratio > 0.0 && self.cooling_ratio < 1.0) {
            return Err(Error::domain(format!(
                "cooling ratio must lie in (0, 1), got {}",
                self.cooling_ratio
            )));
        }
        if !(self.initial_acceptance_target > 0.0 && self.initial_acceptance_target < 1.0) {
            return Err(Error::domain("initial acceptance target must lie in (0, 1)"));
        }
        if self.moves_per_temperature == 0 {
            return Err(Error::domain("moves_per_temperature must be at least 1"));
        }
        self.weights.validate()
    }
}

/// Result of one annealing run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub seed: u64,
    pub config: AnnealConfig,
    pub floorplan: Floorplan,
    pub report: CostReport,
    pub steps: u64,
    /// Not persisted: record files must be reproducible byte for byte.
    #[serde(skip)]
    pub wall_seconds: f64,
}

/// Which branch of the move set a step takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Fixing,
    AspectRatio,
    Swap,
    Move(Side),
}

/// A reversible record of one applied move.
#[derive(Clone, Debug, PartialEq)]
pub enum MoveDescriptor {
    AspectRatio { block: usize, previous: Vec<(usize, f64)> },
    Swap { a: usize, b: usize },
    Relocate { block: usize, parent: usize, side: Side, undo: LinkSnapshot },
    /// Nothing changed.
    Rejected,
}

impl MoveDescriptor {
    pub fn undo(&self, tree: &mut BStarTree) {
        match self {
            MoveDescriptor::AspectRatio { previous, .. } => {
                for &(b, ar) in previous.iter().rev() {
                    tree.set_aspect_ratio(b, ar);
                }
            }
            MoveDescriptor::Swap { a, b } => {
                tree.swap_nodes(*a, *b).expect("swap descriptor holds valid ids");
            }
            MoveDescriptor::Relocate { undo, .. } => tree.restore_links(undo),
            MoveDescriptor::Rejected => {}
        }
    }

    pub fn is_rejected(&self) -> bool {
        matches!(self, MoveDescriptor::Rejected)
    }
}

/// Blocks eligible for each kind of standard move.
#[derive(Clone, Debug)]
pub struct MoveContext {
    reshapable: Vec<usize>,
    block_count: usize,
}

impl MoveContext {
    pub fn new(problem: &Problem, config: &AnnealConfig) -> Self {
        MoveContext {
            reshapable: if config.hard_blocks {
                Vec::new()
            } else {
                problem.reshapable_blocks()
            },
            block_count: problem.blocks.len(),
        }
    }

    fn ar_enabled(&self) -> bool {
        !self.reshapable.is_empty()
    }

    fn pairs_enabled(&self) -> bool {
        self.block_count >= 2
    }
}

/// Draws the move-set branch for one step.
///
/// The fixing branch fires with probability `fixing_move_prob` and only when
/// `violations_present`. Otherwise a reshape is chosen with probability
/// `ar_move_prob` and the remainder is split between swap and relocation.
pub fn select_branch<R: Rng + ?Sized>(
    rng: &mut R,
    config: &AnnealConfig,
    ctx: &MoveContext,
    violations_present: bool,
) -> Branch {
    let fixing_draw: f64 = rng.gen();
    if config.mode == Mode::Casa && violations_present && fixing_draw < config.fixing_move_prob {
        return Branch::Fixing;
    }
    let ar_draw: f64 = rng.gen();
    if ctx.ar_enabled() && (!ctx.pairs_enabled() || ar_draw < config.ar_move_prob) {
        return Branch::AspectRatio;
    }
    if !ctx.pairs_enabled() {
        // single hard block: nothing can change
        return Branch::AspectRatio;
    }
    if rng.gen::<f64>() < config.swap_vs_move_prob {
        Branch::Swap
    } else if rng.gen::<f64>() < config.left_vs_right_prob {
        Branch::Move(Side::Left)
    } else {
        Branch::Move(Side::Right)
    }
}

fn random_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (usize, usize) {
    let a = rng.gen_range(0..n);
    let b = (a + rng.gen_range(1..n)) % n;
    (a, b)
}

/// Applies a non-fixing branch to the tree.
pub fn apply_branch<R: Rng + ?Sized>(
    tree: &mut BStarTree,
    problem: &Problem,
    ctx: &MoveContext,
    branch: Branch,
    rng: &mut R,
) -> MoveDescriptor {
    match branch {
        Branch::AspectRatio => {
            let Some(&block) = ctx.reshapable.choose(rng) else {
                return MoveDescriptor::Rejected;
            };
            match tree.perturb_ar(problem, block, rng) {
                Ok(Some(previous)) => MoveDescriptor::AspectRatio { block, previous },
                _ => MoveDescriptor::Rejected,
            }
        }
        Branch::Swap => {
            let (a, b) = random_pair(rng, ctx.block_count);
            tree.swap_nodes(a, b).expect("pair ids are in range");
            MoveDescriptor::Swap { a, b }
        }
        Branch::Move(side) => {
            let (block, parent) = random_pair(rng, ctx.block_count);
            let undo = tree.snapshot_links();
            tree.move_node(block, parent, side).expect("pair ids are in range");
            MoveDescriptor::Relocate { block, parent, side, undo }
        }
        Branch::Fixing => MoveDescriptor::Rejected,
    }
}

/// Draws and applies one standard (never fixing) move.
pub fn propose_standard_move<R: Rng + ?Sized>(
    tree: &mut BStarTree,
    problem: &Problem,
    config: &AnnealConfig,
    ctx: &MoveContext,
    rng: &mut R,
) -> MoveDescriptor {
    let branch = select_branch(rng, config, ctx, false);
    apply_branch(tree, problem, ctx, branch, rng)
}

/// Repairs one boundary violation.
///
/// A random violator is swapped with an unconstrained block already on its
/// required edge; when that edge holds only constrained blocks, the violator
/// is re-hung above (left/right edges) or to the right of (top/bottom edges)
/// one of them. Corner constraints pick one of their violated edges.
pub fn fixing_move<R: Rng + ?Sized>(
    tree: &mut BStarTree,
    fp: &[Rect],
    problem: &Problem,
    rng: &mut R,
) -> Result<MoveDescriptor> {
    let cs = &problem.constraints;
    let floorplan_bbox = bounding_box_of(fp)?;
    let violators: Vec<usize> = cs
        .boundary
        .iter()
        .filter(|(&b, kind)| !kind.edges().iter().all(|&e| edge_satisfied(&fp[b], &floorplan_bbox, e)))
        .map(|(&b, _)| b)
        .collect();
    let Some(&b) = violators.choose(rng) else {
        return Err(Error::domain("fixing move requested without boundary violations"));
    };
    let violated: Vec<Edge> = cs.boundary[&b]
        .edges()
        .iter()
        .copied()
        .filter(|&e| !edge_satisfied(&fp[b], &floorplan_bbox, e))
        .collect();
    let edge = *violated.choose(rng).expect("violator has a violated edge");

    let at_edge = |c: usize| c != b && edge_satisfied(&fp[c], &floorplan_bbox, edge);
    let unconstrained: Vec<usize> = (0..fp.len())
        .filter(|&c| at_edge(c) && !cs.boundary.contains_key(&c) && !problem.is_preplaced(c))
        .collect();
    if let Some(&s) = unconstrained.choose(rng) {
        tree.swap_nodes(b, s)?;
        return Ok(MoveDescriptor::Swap { a: b, b: s });
    }
    let constrained: Vec<usize> = cs.boundary.keys().copied().filter(|&c| at_edge(c)).collect();
    let Some(&s) = constrained.choose(rng) else {
        return Ok(MoveDescriptor::Rejected);
    };
    let side = match edge {
        Edge::Left | Edge::Right => Side::Right,
        Edge::Top | Edge::Bottom => Side::Left,
    };
    let undo = tree.snapshot_links();
    tree.move_node(b, s, side)?;
    Ok(MoveDescriptor::Relocate { block: b, parent: s, side, undo })
}

fn bounding_box_of(fp: &[Rect]) -> Result<Rect> {
    bbox_of(fp).ok_or_else(|| Error::domain("empty floorplan"))
}

/// Metropolis acceptance.
pub fn accept<R: Rng + ?Sized>(delta: f64, temperature: f64, rng: &mut R) -> bool {
    if delta <= 0.0 {
        return true;
    }
    if temperature <= 0.0 {
        return false;
    }
    rng.gen::<f64>() < (-delta / temperature).exp()
}

/// Temperature at which a move of cost `mean_uphill` is accepted with probability `target`.
pub fn temperature_for_acceptance(mean_uphill: f64, target: f64) -> f64 {
    -mean_uphill / target.ln()
}

/// Samples random standard moves from `tree` and sizes the starting
/// temperature so the mean uphill move is accepted with probability `target`.
pub fn calibrate_initial_temperature<R: Rng + ?Sized>(
    problem: &Problem,
    tree: &BStarTree,
    config: &AnnealConfig,
    rng: &mut R,
    target: f64,
) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::domain(format!("acceptance target must lie in (0, 1), got {target}")));
    }
    let anchoring = config.mode.anchoring();
    let mut ev = Evaluator::new(problem, config.weights, config.mode).for_packing(anchoring);
    let ctx = MoveContext::new(problem, config);
    let mut packer = Packer::new();
    let mut rects = Vec::new();
    let mut report = CostReport::default();
    packer.pack_into(tree, problem, anchoring, &mut rects);
    ev.evaluate_into(&rects, &mut report);
    let base = report.total;

    let mut work = tree.clone();
    let (mut sum, mut count) = (0.0, 0usize);
    for _ in 0..CALIBRATION_SAMPLES {
        let mv = propose_standard_move(&mut work, problem, config, &ctx, rng);
        if mv.is_rejected() {
            continue;
        }
        packer.pack_into(&work, problem, anchoring, &mut rects);
        ev.evaluate_into(&rects, &mut report);
        let delta = report.total - base;
        if delta > 0.0 {
            sum += delta;
            count += 1;
        }
        mv.undo(&mut work);
    }
    if count == 0 {
        return Ok(1.0);
    }
    Ok(temperature_for_acceptance(sum / count as f64, target))
}

/// Legal beats illegal; then lower total cost.
pub fn is_better(candidate: &CostReport, incumbent: &CostReport) -> bool {
    match (candidate.legal, incumbent.legal) {
        (true, false) => true,
        (false, true) => false,
        _ => candidate.total < incumbent.total,
    }
}

/// Snapshot handed to step observers.
#[derive(Debug)]
pub struct StepEvent<'a> {
    pub step: u64,
    pub branch: Branch,
    pub accepted: bool,
    pub temperature: f64,
    /// Current state after the step.
    pub placements: &'a [Rect],
    pub report: &'a CostReport,
    pub best: &'a CostReport,
}

/// Runs one annealing search.
pub fn run(problem: &Problem, config: &AnnealConfig, seed: u64) -> Result<SolutionRecord> {
    run_observed(problem, config, seed, |_| {})
}

/// Like [`run`], calling `observe` after every step.
pub fn run_observed<F>(
    problem: &Problem,
    config: &AnnealConfig,
    seed: u64,
    mut observe: F,
) -> Result<SolutionRecord>
where
    F: FnMut(&StepEvent<'_>),
{
    let issues = validate_problem(problem);
    if !issues.is_empty() {
        return Err(Error::InvalidProblem(issues));
    }
    config.validate()?;
    let started = Instant::now();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tree = random_tree(problem, &mut rng)?;
    let anchoring = config.mode.anchoring();
    let mut ev = Evaluator::new(problem, config.weights, config.mode).for_packing(anchoring);
    let ctx = MoveContext::new(problem, config);
    let mut packer = Packer::new();

    let mut current = Vec::new();
    let mut current_report = CostReport::default();
    packer.pack_into(&tree, problem, anchoring, &mut current);
    ev.evaluate_into(&current, &mut current_report);

    let mut temperature = calibrate_initial_temperature(
        problem,
        &tree,
        config,
        &mut rng,
        config.initial_acceptance_target,
    )?;

    let mut best = current.clone();
    let mut best_report = current_report.clone();
    let mut candidate = Vec::with_capacity(current.len());
    let mut candidate_report = CostReport::default();

    for step in 0..config.steps {
        let violations = current_report.boundary_violation_count > 0;
        let branch = select_branch(&mut rng, config, &ctx, violations);
        let accepted = if branch == Branch::Fixing {
            let mv = fixing_move(&mut tree, &current, problem, &mut rng)?;
            if !mv.is_rejected() {
                packer.pack_into(&tree, problem, anchoring, &mut current);
                ev.evaluate_into(&current, &mut current_report);
            }
            true
        } else {
            let mv = apply_branch(&mut tree, problem, &ctx, branch, &mut rng);
            if mv.is_rejected() {
                false
            } else {
                packer.pack_into(&tree, problem, anchoring, &mut candidate);
                ev.evaluate_into(&candidate, &mut candidate_report);
                let delta = candidate_report.total - current_report.total;
                if accept(delta, temperature, &mut rng) {
                    std::mem::swap(&mut current, &mut candidate);
                    std::mem::swap(&mut current_report, &mut candidate_report);
                    true
                } else {
                    mv.undo(&mut tree);
                    false
                }
            }
        };
        if accepted && is_better(&current_report, &best_report) {
            best.clone_from(&current);
            best_report.clone_from(&current_report);
        }
        if (step + 1) % config.moves_per_temperature == 0 {
            temperature *= config.cooling_ratio;
        }
        observe(&StepEvent {
            step,
            branch,
            accepted,
            temperature,
            placements: &current,
            report: &current_report,
            best: &best_report,
        });
    }

    Ok(SolutionRecord {
        seed,
        config: config.clone(),
        floorplan: Floorplan::new(best),
        report: best_report,
        steps: config.steps,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::btree::pack_with;
    use crate::cost::total_cost;
    use crate::model::{Block, Boundary, ConstraintSet, Net, Outline, Terminal};

    fn problem(n: usize, seed: u64) -> Problem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks: Vec<Block> = (0..n)
            .map(|i| Block::soft(i, format!("b{i}"), rng.gen_range(4.0..40.0), 1.0 / 3.0, 3.0))
            .collect();
        let total: f64 = blocks.iter().map(|b| b.area).sum();
        let side = (1.1 * total).sqrt();
        let terminals = (0..4)
            .map(|i| Terminal { name: format!("p{i}"), x: side * (i as f64) / 3.0, y: 0.0 })
            .collect();
        let nets = (0..2 * n)
            .map(|_| Net {
                block_endpoints: vec![rng.gen_range(0..n), rng.gen_range(0..n)],
                terminal_endpoints: if rng.gen_bool(0.3) { vec![rng.gen_range(0..4)] } else { vec![] },
            })
            .collect();
        Problem {
            blocks,
            terminals,
            nets,
            constraints: ConstraintSet::default(),
            outline: Some(Outline { w: side, h: side }),
        }
    }

    fn constrained(n: usize, seed: u64) -> Problem {
        let mut p = problem(n, seed);
        let mut cs = ConstraintSet::default();
        cs.boundary.insert(0, Boundary::Left);
        cs.boundary.insert(1, Boundary::Right);
        cs.boundary.insert(2, Boundary::Top);
        cs.boundary.insert(3, Boundary::Bottom);
        cs.boundary.insert(4, Boundary::TopRight);
        cs.groups.push(vec![5, 6, 7]);
        let (w, h) = crate::model::dims_from_ar(p.blocks[8].area, 1.0).unwrap();
        cs.preplaced.insert(8, Rect::new(3.0, 4.0, w, h));
        p.set_constraints(cs);
        p
    }

    fn short(mode: Mode, steps: u64) -> AnnealConfig {
        AnnealConfig { steps, mode, moves_per_temperature: 100, ..AnnealConfig::default() }
    }

    #[test]
    fn accept_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..1000).all(|_| accept(-5.0, 1.0, &mut rng)));
        assert!((0..1000).all(|_| accept(0.0, 1e-12, &mut rng)));
        let hits = (0..10_000).filter(|_| accept(1.0, 1e-6, &mut rng)).count();
        assert_eq!(hits, 0);
    }

    #[test]
    fn accept_ln2_is_a_coin_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = 3.7;
        let n = 100_000;
        let hits = (0..n).filter(|_| accept(t * std::f64::consts::LN_2, t, &mut rng)).count();
        let f = hits as f64 / n as f64;
        assert!((f - 0.5).abs() <= 0.01, "{f}");
    }

    #[test]
    fn closed_form_temperature() {
        let t = temperature_for_acceptance(10.0, 0.9);
        assert!((t - 94.912_215_810_2).abs() < 1e-6, "{t}");
        assert!(temperature_for_acceptance(10.0, 0.99) > temperature_for_acceptance(10.0, 0.9));
        assert!(temperature_for_acceptance(10.0, 0.999_999) > 1e6);
    }

    #[test]
    fn calibration_is_deterministic() {
        let p = problem(20, 1);
        let cfg = AnnealConfig::default();
        let t = random_tree(&p, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let a = calibrate_initial_temperature(&p, &t, &cfg, &mut ChaCha8Rng::seed_from_u64(5), 0.9)
            .unwrap();
        let b = calibrate_initial_temperature(&p, &t, &cfg, &mut ChaCha8Rng::seed_from_u64(5), 0.9)
            .unwrap();
        assert_eq!(a, b);
        assert!(a > 0.0);
        assert!(calibrate_initial_temperature(&p, &t, &cfg, &mut ChaCha8Rng::seed_from_u64(5), 1.0)
            .is_err());
    }

    #[test]
    fn calibration_defaults_without_uphill_moves() {
        let p = problem(5, 2);
        let cfg = AnnealConfig { weights: CostWeights::zero(), ..AnnealConfig::default() };
        let t = random_tree(&p, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let t0 = calibrate_initial_temperature(&p, &t, &cfg, &mut ChaCha8Rng::seed_from_u64(0), 0.9)
            .unwrap();
        assert_eq!(t0, 1.0);
    }

    #[test]
    fn hard_blocks_never_reshape() {
        let p = problem(10, 3);
        let cfg = AnnealConfig { hard_blocks: true, ..AnnealConfig::default() };
        let ctx = MoveContext::new(&p, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100_000 {
            assert_ne!(select_branch(&mut rng, &cfg, &ctx, true), Branch::AspectRatio);
        }
    }

    #[test]
    fn single_block_only_reshapes() {
        let p = problem(1, 3);
        let cfg = AnnealConfig::default();
        let ctx = MoveContext::new(&p, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert_eq!(select_branch(&mut rng, &cfg, &ctx, false), Branch::AspectRatio);
        }
    }

    #[test]
    fn undo_restores_packing() {
        let p = constrained(30, 4);
        let cfg = AnnealConfig::default();
        let ctx = MoveContext::new(&p, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut tree = random_tree(&p, &mut rng).unwrap();
        for _ in 0..2000 {
            let before_tree = tree.clone();
            let before = pack_with(&tree, &p, crate::btree::Anchoring::Anchored);
            let mv = propose_standard_move(&mut tree, &p, &cfg, &ctx, &mut rng);
            mv.undo(&mut tree);
            assert_eq!(tree, before_tree);
            assert_eq!(pack_with(&tree, &p, crate::btree::Anchoring::Anchored), before);
            // walk on so later samples start from different trees
            propose_standard_move(&mut tree, &p, &cfg, &ctx, &mut rng);
        }
    }

    #[test]
    fn fixing_swaps_with_unconstrained_edge_block() {
        // 0 must be left; 1 (unconstrained) holds the left edge, 0 sits right of it
        let p = Problem {
            blocks: vec![Block::hard(0, "v", 1.0, 1.0), Block::hard(1, "u", 1.0, 1.0)],
            constraints: ConstraintSet {
                boundary: [(0, Boundary::Left)].into_iter().collect(),
                ..Default::default()
            },
            ..Default::default()
        };
        let mut tree =
            BStarTree::from_links(1, &[(1, Side::Left, 0)], vec![1.0, 1.0]).unwrap();
        let fp = crate::btree::pack(&tree, &p);
        assert_eq!(crate::cost::boundary_violations(&fp, &p.constraints), vec![0]);
        let mv = fixing_move(&mut tree, &fp.placements, &p, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap();
        assert_eq!(mv, MoveDescriptor::Swap { a: 0, b: 1 });
        let fp = crate::btree::pack(&tree, &p);
        assert!(crate::cost::boundary_violations(&fp, &p.constraints).is_empty());
    }

    #[test]
    fn fixing_rehangs_when_edge_is_full() {
        // bottom row 0,1,2 (bottom-constrained); right column 3,4 (right-constrained);
        // block 5 must be on the bottom but sits above the row
        let dims = [(2.0, 1.0); 6];
        let mut p = Problem {
            blocks: dims
                .iter()
                .enumerate()
                .map(|(i, &(w, h))| Block::hard(i, format!("b{i}"), w, h))
                .collect(),
            ..Default::default()
        };
        let mut cs = ConstraintSet::default();
        for b in [0, 1, 2, 5] {
            cs.boundary.insert(b, Boundary::Bottom);
        }
        for b in [3, 4] {
            cs.boundary.insert(b, Boundary::Right);
        }
        p.set_constraints(cs);
        let ar = vec![2.0; 6];
        let mut tree = BStarTree::from_links(
            0,
            &[
                (0, Side::Left, 1),
                (1, Side::Left, 2),
                (2, Side::Right, 3),
                (3, Side::Right, 4),
                (0, Side::Right, 5),
            ],
            ar,
        )
        .unwrap();
        let fp = crate::btree::pack(&tree, &p);
        assert_eq!(crate::cost::boundary_violations(&fp, &p.constraints), vec![5]);
        let mv = fixing_move(&mut tree, &fp.placements, &p, &mut ChaCha8Rng::seed_from_u64(1))
            .unwrap();
        let MoveDescriptor::Relocate { block, parent, side, .. } = mv else {
            panic!("expected relocation, got {mv:?}");
        };
        assert_eq!(block, 5);
        assert!([0, 1, 2].contains(&parent));
        assert_eq!(side, Side::Left);
        let after = crate::btree::pack(&tree, &p);
        assert_eq!(after.placements[5].y, 0.0);
    }

    #[test]
    fn fixing_corner_uses_a_violated_edge() {
        let mut p = problem(12, 9);
        let mut cs = ConstraintSet::default();
        cs.boundary.insert(3, Boundary::TopRight);
        p.set_constraints(cs);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut checked = 0;
        for _ in 0..200 {
            let mut tree = random_tree(&p, &mut rng).unwrap();
            let fp = crate::btree::pack(&tree, &p);
            let before = crate::cost::boundary_violations(&fp, &p.constraints);
            if before.is_empty() {
                continue;
            }
            let mv = fixing_move(&mut tree, &fp.placements, &p, &mut rng).unwrap();
            tree.check_structure().unwrap();
            let after = crate::btree::pack(&tree, &p);
            if !mv.is_rejected() {
                assert_ne!(after, fp);
            }
            checked += 1;
        }
        assert!(checked > 20);
    }

    #[test]
    fn fixing_without_violations_is_an_error() {
        let p = problem(4, 1);
        let mut tree = random_tree(&p, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let fp = crate::btree::pack(&tree, &p);
        assert!(fixing_move(&mut tree, &fp.placements, &p, &mut ChaCha8Rng::seed_from_u64(0))
            .is_err());
    }

    #[test]
    fn zero_steps_returns_initial_packing() {
        let p = problem(15, 5);
        let cfg = short(Mode::Casa, 0);
        let rec = run(&p, &cfg, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tree = random_tree(&p, &mut rng).unwrap();
        assert_eq!(rec.floorplan, crate::btree::pack(&tree, &p));
        assert_eq!(rec.steps, 0);
    }

    #[test]
    fn runs_are_deterministic() {
        let p = constrained(20, 6);
        for mode in [Mode::Casa, Mode::Classical] {
            let cfg = short(mode, 5000);
            let mut a = run(&p, &cfg, 11).unwrap();
            let mut b = run(&p, &cfg, 11).unwrap();
            a.wall_seconds = 0.0;
            b.wall_seconds = 0.0;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn record_report_matches_reevaluation() {
        let p = constrained(20, 7);
        for mode in [Mode::Casa, Mode::Classical] {
            let cfg = short(mode, 3000);
            let rec = run(&p, &cfg, 2).unwrap();
            assert_eq!(total_cost(&rec.floorplan, &p, &cfg.weights, mode), rec.report);
        }
    }

    #[test]
    fn invalid_problem_rejected_before_search() {
        let mut p = problem(5, 1);
        p.nets[0].block_endpoints.push(99);
        assert!(matches!(run(&p, &short(Mode::Casa, 10), 0), Err(Error::InvalidProblem(_))));
    }

    #[test]
    fn step_invariants_hold() {
        let p = constrained(25, 8);
        let mut cfg = short(Mode::Casa, 20_000);
        cfg.fixing_move_prob = 0.05;
        let mut fixes = 0;
        let mut best_legal = f64::INFINITY;
        let mut last_viol = 0usize;
        run_observed(&p, &cfg, 4, |ev| {
            // anchored blocks never drift
            assert_eq!(ev.report.preplaced_deviation, 0.0);
            if ev.branch == Branch::Fixing {
                assert!(last_viol > 0, "fixing move fired without violations");
                assert!(ev.accepted);
                fixes += 1;
            }
            last_viol = ev.report.boundary_violation_count;
            if ev.best.legal {
                assert!(ev.best.total <= best_legal);
                best_legal = ev.best.total;
            }
        })
        .unwrap();
        assert!(fixes > 0);
    }

    #[test]
    fn rejected_moves_leave_state_unchanged() {
        let p = constrained(15, 9);
        let cfg = short(Mode::Classical, 3000);
        let mut prev: Option<(Vec<Rect>, CostReport)> = None;
        run_observed(&p, &cfg, 1, |ev| {
            if let Some((rects, report)) = &prev {
                if !ev.accepted {
                    assert_eq!(rects.as_slice(), ev.placements);
                    assert_eq!(report, ev.report);
                }
            }
            prev = Some((ev.placements.to_vec(), ev.report.clone()));
        })
        .unwrap();
    }

    #[test]
    fn config_validation() {
        assert!(AnnealConfig::default().validate().is_ok());
        let bad = AnnealConfig { cooling_ratio: 1.0, ..AnnealConfig::default() };
        assert!(bad.validate().is_err());
        let bad = AnnealConfig { ar_move_prob: 1.5, ..AnnealConfig::default() };
        assert!(bad.validate().is_err());
    }
}
