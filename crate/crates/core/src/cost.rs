// SPDX-License-Identifier: Apache-2.0

//! Cost terms and legality of a floorplan.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::btree::Anchoring;
use crate::error::{Error, Result};
use crate::model::{ConstraintSet, Edge, Floorplan, Net, Outline, Problem, Rect, Terminal};

/// Absolute tolerance for edge contact and abutment.
pub const GEOM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    /// HPWL
    pub alpha: f64,
    /// bounding-box area
    pub beta: f64,
    /// violated-constraint count (classical mode only)
    pub gamma: f64,
    /// fixed outline
    pub eta: f64,
    /// grouping
    pub zeta: f64,
    /// preplaced deviation (classical mode only)
    pub theta: f64,
    /// pairwise overlap area
    pub mu: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights {
            alpha: 1.0,
            beta: 0.0,
            gamma: 10.0,
            eta: 10.0,
            zeta: 10.0,
            theta: 10.0,
            mu: 10.0,
        }
    }
}

impl CostWeights {
    pub fn zero() -> Self {
        CostWeights {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            eta: 0.0,
            zeta: 0.0,
            theta: 0.0,
            mu: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("eta", self.eta),
            ("zeta", self.zeta),
            ("theta", self.theta),
            ("mu", self.mu),
        ];
        for (name, w) in all {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::domain(format!("weight {name} must be non-negative, got {w}")));
            }
        }
        Ok(())
    }
}

/// Which cost function and packing rules a search uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Constraints-aware: anchored preplacement, fixing moves for boundaries.
    Casa,
    /// All constraints as penalty terms, no anchoring, no fixing moves.
    Classical,
}

impl Mode {
    pub fn anchoring(self) -> Anchoring {
        match self {
            Mode::Casa => Anchoring::Anchored,
            Mode::Classical => Anchoring::TreeOnly,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Casa => "casa",
            Mode::Classical => "classical",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "casa" => Ok(Mode::Casa),
            "classical" => Ok(Mode::Classical),
            other => Err(Error::domain(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub hpwl: f64,
    pub bbox_area: f64,
    /// Weighted outline term.
    pub outline_cost: f64,
    /// Weighted grouping term.
    pub grouping_cost: f64,
    pub boundary_violation_count: usize,
    /// Groups that form more than one cluster.
    pub grouping_violation_count: usize,
    /// Unweighted L1 distance of preplaced blocks from their targets.
    pub preplaced_deviation: f64,
    pub overlap_area: f64,
    pub outline_respected: bool,
    pub total: f64,
    pub legal: bool,
    pub violating_block_ids: Vec<usize>,
}

/// Sum over nets of the half perimeter of the box around block centres and terminals.
pub fn hpwl(fp: &Floorplan, nets: &[Net], terminals: &[Terminal]) -> f64 {
    let mut total = 0.0;
    for net in nets {
        if net.degree() < 2 {
            continue;
        }
        let mut lo = (f64::INFINITY, f64::INFINITY);
        let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let points = net
            .block_endpoints
            .iter()
            .map(|&b| fp.placements[b].center())
            .chain(net.terminal_endpoints.iter().map(|&t| (terminals[t].x, terminals[t].y)));
        for (x, y) in points {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        total += (hi.0 - lo.0) + (hi.1 - lo.1);
    }
    total
}

/// Smallest rectangle containing all placements; `None` for an empty floorplan.
pub fn bounding_box(fp: &Floorplan) -> Option<Rect> {
    bbox_of(&fp.placements)
}

pub(crate) fn bbox_of(rects: &[Rect]) -> Option<Rect> {
    let first = rects.first()?;
    let (mut x0, mut y0, mut x1, mut y1) = (first.x, first.y, first.right(), first.top());
    for r in &rects[1..] {
        x0 = x0.min(r.x);
        y0 = y0.min(r.y);
        x1 = x1.max(r.right());
        y1 = y1.max(r.top());
    }
    Some(Rect::new(x0, y0, x1 - x0, y1 - y0))
}

pub fn outline_cost(bbox: &Rect, outline: &Outline, eta: f64) -> f64 {
    eta * ((bbox.w - outline.w).max(0.0) + (bbox.h - outline.h).max(0.0))
}

/// Whether the bounding box lies inside the outline anchored at the origin.
pub fn fits_outline(bbox: &Rect, outline: &Outline) -> bool {
    bbox.x >= -GEOM_TOL
        && bbox.y >= -GEOM_TOL
        && bbox.right() <= outline.w + GEOM_TOL
        && bbox.top() <= outline.h + GEOM_TOL
}

/// True when two rectangles share a boundary segment (or interior) of positive length.
#[inline]
pub fn touches(a: &Rect, b: &Rect) -> bool {
    let dx = a.right().min(b.right()) - a.x.max(b.x);
    let dy = a.top().min(b.top()) - a.y.max(b.y);
    dx >= -GEOM_TOL && dy >= -GEOM_TOL && (dx > GEOM_TOL || dy > GEOM_TOL)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn cluster_count(rects: &[Rect], group: &[usize]) -> usize {
    let k = group.len();
    let mut parent: Vec<usize> = (0..k).collect();
    let mut clusters = k;
    for i in 0..k {
        for j in (i + 1)..k {
            if touches(&rects[group[i]], &rects[group[j]]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                    clusters -= 1;
                }
            }
        }
    }
    clusters
}

/// Number of connected clusters the group's blocks form under abutment.
pub fn grouping_clusters(fp: &Floorplan, group: &[usize]) -> Result<usize> {
    if group.is_empty() {
        return Err(Error::domain("empty group"));
    }
    if let Some(&b) = group.iter().find(|&&b| b >= fp.len()) {
        return Err(Error::UnknownBlock(b));
    }
    Ok(cluster_count(&fp.placements, group))
}

pub fn grouping_cost(fp: &Floorplan, groups: &[Vec<usize>], zeta: f64) -> Result<f64> {
    let mut sum = 0.0;
    for g in groups {
        let z = grouping_clusters(fp, g)?;
        sum += (z - 1) as f64 / g.len() as f64;
    }
    Ok(zeta * sum)
}

#[inline]
pub fn edge_satisfied(r: &Rect, bbox: &Rect, edge: Edge) -> bool {
    match edge {
        Edge::Left => (r.x - bbox.x).abs() <= GEOM_TOL,
        Edge::Right => (r.right() - bbox.right()).abs() <= GEOM_TOL,
        Edge::Bottom => (r.y - bbox.y).abs() <= GEOM_TOL,
        Edge::Top => (r.top() - bbox.top()).abs() <= GEOM_TOL,
    }
}

fn boundary_violations_in(rects: &[Rect], bbox: &Rect, cs: &ConstraintSet, out: &mut Vec<usize>) {
    out.clear();
    for (&b, &kind) in &cs.boundary {
        if !kind.edges().iter().all(|&e| edge_satisfied(&rects[b], bbox, e)) {
            out.push(b);
        }
    }
}

/// Boundary-constrained blocks not touching their required bounding-box edge(s).
pub fn boundary_violations(fp: &Floorplan, constraints: &ConstraintSet) -> Vec<usize> {
    let mut out = Vec::new();
    if let Some(bbox) = bounding_box(fp) {
        boundary_violations_in(&fp.placements, &bbox, constraints, &mut out);
    }
    out
}

fn deviation_of(rects: &[Rect], cs: &ConstraintSet) -> f64 {
    cs.preplaced
        .iter()
        .map(|(&b, t)| (rects[b].x - t.x).abs() + (rects[b].y - t.y).abs())
        .fold(0.0, |acc, d| acc + d)
}

/// Unweighted L1 deviation of preplaced blocks from their targets.
pub fn preplaced_deviation(fp: &Floorplan, constraints: &ConstraintSet) -> f64 {
    deviation_of(&fp.placements, constraints)
}

pub fn preplaced_cost(fp: &Floorplan, constraints: &ConstraintSet, theta: f64) -> f64 {
    theta * preplaced_deviation(fp, constraints)
}

fn overlap_sweep(rects: &[Rect], order: &mut Vec<usize>) -> f64 {
    order.clear();
    order.extend(0..rects.len());
    order.sort_unstable_by(|&a, &b| rects[a].x.total_cmp(&rects[b].x));
    let mut total = 0.0;
    for (k, &i) in order.iter().enumerate() {
        let ri = &rects[i];
        for &j in &order[k + 1..] {
            let rj = &rects[j];
            if rj.x >= ri.right() {
                break;
            }
            total += crate::model::rect_overlap_area(ri, rj);
        }
    }
    total
}

/// Total pairwise overlap area.
pub fn overlap_area(fp: &Floorplan) -> f64 {
    overlap_sweep(&fp.placements, &mut Vec::new())
}

/// Full evaluation of a floorplan under the given weights and mode.
pub fn total_cost(fp: &Floorplan, problem: &Problem, weights: &CostWeights, mode: Mode) -> CostReport {
    let mut ev = Evaluator::new(problem, *weights, mode);
    let mut report = CostReport::default();
    ev.evaluate_into(&fp.placements, &mut report);
    report
}

/// Reusable evaluator with precomputed net data.
///
/// Per net the terminal bounding box is fixed, so only block pins are
/// scanned on each evaluation.
#[derive(Clone, Debug)]
pub struct Evaluator<'a> {
    problem: &'a Problem,
    weights: CostWeights,
    mode: Mode,
    pin_offsets: Vec<usize>,
    pins: Vec<usize>,
    /// (x_lo, y_lo, x_hi, y_hi) over terminals, infinite when the net has none
    net_terminal_box: Vec<(f64, f64, f64, f64)>,
    overlap_free: bool,
    scratch: Vec<usize>,
}

impl<'a> Evaluator<'a> {
    pub fn new(problem: &'a Problem, weights: CostWeights, mode: Mode) -> Self {
        let mut pin_offsets = Vec::with_capacity(problem.nets.len() + 1);
        let mut pins = Vec::new();
        let mut net_terminal_box = Vec::new();
        pin_offsets.push(0);
        for net in problem.nets.iter().filter(|n| n.degree() >= 2) {
            pins.extend_from_slice(&net.block_endpoints);
            pin_offsets.push(pins.len());
            let mut bx = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
            for &t in &net.terminal_endpoints {
                let t = &problem.terminals[t];
                bx = (bx.0.min(t.x), bx.1.min(t.y), bx.2.max(t.x), bx.3.max(t.y));
            }
            net_terminal_box.push(bx);
        }
        Evaluator {
            problem,
            weights,
            mode,
            pin_offsets,
            pins,
            net_terminal_box,
            overlap_free: false,
            scratch: Vec::new(),
        }
    }

    /// Declares that every evaluated layout comes from packing with `anchoring`,
    /// so overlap is only computed when anchors can cause it.
    pub fn for_packing(mut self, anchoring: Anchoring) -> Self {
        self.overlap_free =
            anchoring == Anchoring::TreeOnly || self.problem.constraints.preplaced.is_empty();
        self
    }

    pub fn weights(&self) -> &CostWeights {
        &self.weights
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn hpwl(&self, rects: &[Rect]) -> f64 {
        let mut total = 0.0;
        for (k, tb) in self.net_terminal_box.iter().enumerate() {
            let (mut x0, mut y0, mut x1, mut y1) = *tb;
            for &b in &self.pins[self.pin_offsets[k]..self.pin_offsets[k + 1]] {
                let r = &rects[b];
                let cx = r.x + 0.5 * r.w;
                let cy = r.y + 0.5 * r.h;
                if cx < x0 {
                    x0 = cx;
                }
                if cx > x1 {
                    x1 = cx;
                }
                if cy < y0 {
                    y0 = cy;
                }
                if cy > y1 {
                    y1 = cy;
                }
            }
            total += (x1 - x0) + (y1 - y0);
        }
        total
    }

    pub fn evaluate_into(&mut self, rects: &[Rect], out: &mut CostReport) {
        let p = self.problem;
        let cs = &p.constraints;
        let w = &self.weights;
        let Some(bbox) = bbox_of(rects) else {
            *out = CostReport { legal: true, outline_respected: true, ..Default::default() };
            return;
        };

        out.hpwl = self.hpwl(rects);
        out.bbox_area = bbox.area();
        let (outline_cost_v, outline_ok) = match &p.outline {
            Some(o) => (outline_cost(&bbox, o, w.eta), fits_outline(&bbox, o)),
            None => (0.0, true),
        };
        out.outline_cost = outline_cost_v;
        out.outline_respected = outline_ok;

        let mut group_sum = 0.0;
        let mut group_violations = 0;
        for g in &cs.groups {
            let z = cluster_count(rects, g);
            if z > 1 {
                group_violations += 1;
            }
            group_sum += (z - 1) as f64 / g.len() as f64;
        }
        out.grouping_cost = w.zeta * group_sum;
        out.grouping_violation_count = group_violations;

        boundary_violations_in(rects, &bbox, cs, &mut out.violating_block_ids);
        out.boundary_violation_count = out.violating_block_ids.len();
        out.preplaced_deviation = deviation_of(rects, cs);
        out.overlap_area = if self.overlap_free {
            0.0
        } else {
            overlap_sweep(rects, &mut self.scratch)
        };

        let base = w.alpha * out.hpwl
            + w.beta * out.bbox_area
            + out.outline_cost
            + out.grouping_cost
            + w.mu * out.overlap_area;
        out.total = match self.mode {
            Mode::Casa => base,
            Mode::Classical => {
                let violated = (out.boundary_violation_count + out.grouping_violation_count) as f64;
                base + w.gamma * violated + w.theta * out.preplaced_deviation
            }
        };
        out.legal = out.boundary_violation_count == 0
            && out.grouping_violation_count == 0
            && out.outline_respected
            && out.overlap_area == 0.0
            && out.preplaced_deviation == 0.0;
    }
}
