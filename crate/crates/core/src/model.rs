// SPDX-License-Identifier: Apache-2.0

//! Domain types shared by every stage of the floorplanner.
//!
//! All types here are plain value data. A [`Problem`] is built once (usually
//! by the Bookshelf parser) and then shared read-only between workers.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for `w * h == area` checks on derived dimensions.
pub const AREA_REL_TOL: f64 = 1e-9;

/// Axis-aligned rectangle, lower-left anchored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    #[inline]
    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    #[inline]
    pub fn top(&self) -> f64 {
        self.y + self.h
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    #[inline]
    pub fn center(&self) -> (f64, f64) {
        (self.x + 0.5 * self.w, self.y + 0.5 * self.h)
    }

    pub fn is_valid(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.w > 0.0 && self.h > 0.0
    }
}

/// Width and height of a block with the given area and aspect ratio (`w / h`).
pub fn dims_from_ar(area: f64, ar: f64) -> Result<(f64, f64)> {
    if !(area > 0.0 && area.is_finite()) {
        return Err(Error::domain(format!("area must be positive, got {area}")));
    }
    if !(ar > 0.0 && ar.is_finite()) {
        return Err(Error::domain(format!("aspect ratio must be positive, got {ar}")));
    }
    Ok(((area * ar).sqrt(), (area / ar).sqrt()))
}

/// Area of the intersection of two rectangles (zero when interiors are disjoint).
#[inline]
pub fn rect_overlap_area(a: &Rect, b: &Rect) -> f64 {
    let dx = a.right().min(b.right()) - a.x.max(b.x);
    let dy = a.top().min(b.top()) - a.y.max(b.y);
    dx.max(0.0) * dy.max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub id: usize,
    pub name: String,
    pub area: f64,
    /// Nominal aspect ratio, `w / h`.
    pub aspect_ratio: f64,
    pub ar_min: f64,
    pub ar_max: f64,
    pub is_soft: bool,
    pub instance_group: Option<usize>,
}

impl Block {
    /// A soft block whose nominal aspect ratio is the one closest to square.
    pub fn soft(id: usize, name: impl Into<String>, area: f64, ar_min: f64, ar_max: f64) -> Self {
        Block {
            id,
            name: name.into(),
            area,
            aspect_ratio: 1.0_f64.clamp(ar_min.min(ar_max), ar_max.max(ar_min)),
            ar_min,
            ar_max,
            is_soft: true,
            instance_group: None,
        }
    }

    pub fn hard(id: usize, name: impl Into<String>, w: f64, h: f64) -> Self {
        let ar = w / h;
        Block {
            id,
            name: name.into(),
            area: w * h,
            aspect_ratio: ar,
            ar_min: ar,
            ar_max: ar,
            is_soft: false,
            instance_group: None,
        }
    }

    #[inline]
    pub fn clamp_ar(&self, ar: f64) -> f64 {
        ar.clamp(self.ar_min, self.ar_max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Terminal {
    pub name: String,
    pub x: f64,
    pub y: f64,
}

/// A hyperedge over blocks and terminals.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub block_endpoints: Vec<usize>,
    pub terminal_endpoints: Vec<usize>,
}

impl Net {
    pub fn degree(&self) -> usize {
        self.block_endpoints.len() + self.terminal_endpoints.len()
    }
}

/// One side of the floorplan bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Edge {
    Left,
    Right,
    Top,
    Bottom,
}

/// Required edge or corner for a boundary-constrained block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Boundary {
    Left,
    Right,
    Top,
    Bottom,
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
}

impl Boundary {
    pub const ALL: [Boundary; 8] = [
        Boundary::Left,
        Boundary::Right,
        Boundary::Top,
        Boundary::Bottom,
        Boundary::TopLeft,
        Boundary::TopRight,
        Boundary::BottomLeft,
        Boundary::BottomRight,
    ];

    /// Edges the block must touch; corners require both.
    pub fn edges(self) -> &'static [Edge] {
        match self {
            Boundary::Left => &[Edge::Left],
            Boundary::Right => &[Edge::Right],
            Boundary::Top => &[Edge::Top],
            Boundary::Bottom => &[Edge::Bottom],
            Boundary::TopLeft => &[Edge::Top, Edge::Left],
            Boundary::TopRight => &[Edge::Top, Edge::Right],
            Boundary::BottomLeft => &[Edge::Bottom, Edge::Left],
            Boundary::BottomRight => &[Edge::Bottom, Edge::Right],
        }
    }

    pub fn includes(self, edge: Edge) -> bool {
        self.edges().contains(&edge)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Left => "left",
            Boundary::Right => "right",
            Boundary::Top => "top",
            Boundary::Bottom => "bottom",
            Boundary::TopLeft => "tl",
            Boundary::TopRight => "tr",
            Boundary::BottomLeft => "bl",
            Boundary::BottomRight => "br",
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "left" => Boundary::Left,
            "right" => Boundary::Right,
            "top" => Boundary::Top,
            "bottom" => Boundary::Bottom,
            "tl" => Boundary::TopLeft,
            "tr" => Boundary::TopRight,
            "bl" => Boundary::BottomLeft,
            "br" => Boundary::BottomRight,
            other => return Err(Error::domain(format!("unknown boundary `{other}`"))),
        })
    }
}

/// Placement constraints, keyed by block id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintSet {
    pub boundary: BTreeMap<usize, Boundary>,
    pub groups: Vec<Vec<usize>>,
    pub preplaced: BTreeMap<usize, Rect>,
    pub instance_groups: Vec<Vec<usize>>,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
            && self.groups.is_empty()
            && self.preplaced.is_empty()
            && self.instance_groups.is_empty()
    }

    /// Checks the set-level invariants that do not need the block list.
    pub fn check_conflicts(&self) -> Vec<Issue> {
        let mut issues = Vec::new();
        for &b in self.boundary.keys() {
            if self.preplaced.contains_key(&b) {
                issues.push(Issue::ConflictingConstraint {
                    block: b,
                    reason: "both preplaced and boundary-constrained",
                });
            }
        }
        for (i, g) in self.groups.iter().enumerate() {
            if g.len() < 2 {
                issues.push(Issue::SmallGroup { kind: "grouping", index: i });
            }
        }
        for (i, g) in self.instance_groups.iter().enumerate() {
            if g.len() < 2 {
                issues.push(Issue::SmallGroup { kind: "instance", index: i });
            }
        }
        let mut seen = HashSet::new();
        for g in &self.instance_groups {
            for &b in g {
                if !seen.insert(b) {
                    issues.push(Issue::ConflictingConstraint {
                        block: b,
                        reason: "member of more than one instance group",
                    });
                }
                if self.preplaced.contains_key(&b) {
                    issues.push(Issue::ConflictingConstraint {
                        block: b,
                        reason: "preplaced block in an instance group",
                    });
                }
            }
        }
        issues
    }
}

/// Fixed outline anchored at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outline {
    pub w: f64,
    pub h: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Problem {
    pub blocks: Vec<Block>,
    pub terminals: Vec<Terminal>,
    pub nets: Vec<Net>,
    pub constraints: ConstraintSet,
    pub outline: Option<Outline>,
}

impl Problem {
    /// Installs a constraint set and mirrors instance-group membership onto the blocks.
    pub fn set_constraints(&mut self, constraints: ConstraintSet) {
        for b in &mut self.blocks {
            b.instance_group = None;
        }
        for (gi, group) in constraints.instance_groups.iter().enumerate() {
            for &b in group {
                if let Some(block) = self.blocks.get_mut(b) {
                    block.instance_group = Some(gi);
                }
            }
        }
        self.constraints = constraints;
    }

    pub fn total_block_area(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| match self.constraints.preplaced.get(&b.id) {
                Some(r) => r.area(),
                None => b.area,
            })
            .sum()
    }

    pub fn block_index(&self) -> HashMap<&str, usize> {
        self.blocks.iter().map(|b| (b.name.as_str(), b.id)).collect()
    }

    #[inline]
    pub fn is_preplaced(&self, block: usize) -> bool {
        self.constraints.preplaced.contains_key(&block)
    }

    /// Soft blocks whose aspect ratio may be perturbed.
    pub fn reshapable_blocks(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .filter(|b| b.is_soft && b.ar_min < b.ar_max && !self.is_preplaced(b.id))
            .map(|b| b.id)
            .collect()
    }

    /// Makes every block soft with the given aspect-ratio range, keeping its
    /// area and clamping its current ratio into the range.
    pub fn set_soft_ar_range(&mut self, ar_min: f64, ar_max: f64) {
        for b in self.blocks.iter_mut() {
            b.is_soft = true;
            b.ar_min = ar_min;
            b.ar_max = ar_max;
            b.aspect_ratio = b.aspect_ratio.clamp(ar_min, ar_max);
        }
    }
}

/// Concrete placement: one rectangle per block, indexed by block id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Floorplan {
    pub placements: Vec<Rect>,
}

impl Floorplan {
    pub fn new(placements: Vec<Rect>) -> Self {
        Floorplan { placements }
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }
}

/// A violated problem invariant. Issues are reported, never raised.
#[derive(Clone, Debug, PartialEq)]
pub enum Issue {
    NoBlocks,
    BlockIdMismatch { index: usize, id: usize },
    DuplicateName { name: String },
    NonPositiveArea { block: usize },
    InvalidAspectRange { block: usize },
    NonFiniteTerminal { terminal: usize },
    EmptyNet { net: usize },
    UnknownEndpoint { net: usize, endpoint: String },
    UnknownConstrainedBlock { block: usize, kind: &'static str },
    ConflictingConstraint { block: usize, reason: &'static str },
    SmallGroup { kind: &'static str, index: usize },
    InvalidPreplacement { block: usize },
    PreplacedOutsideOutline { block: usize },
    InstanceGroupMismatch { block: usize },
    InvalidOutline,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::NoBlocks => write!(f, "problem has no blocks"),
            Issue::BlockIdMismatch { index, id } => {
                write!(f, "block at index {index} carries id {id}")
            }
            Issue::DuplicateName { name } => write!(f, "duplicate block name `{name}`"),
            Issue::NonPositiveArea { block } => write!(f, "block {block} has non-positive area"),
            Issue::InvalidAspectRange { block } => {
                write!(f, "block {block} aspect ratio outside [ar_min, ar_max]")
            }
            Issue::NonFiniteTerminal { terminal } => {
                write!(f, "terminal {terminal} has non-finite coordinates")
            }
            Issue::EmptyNet { net } => write!(f, "net {net} has no endpoints"),
            Issue::UnknownEndpoint { net, endpoint } => {
                write!(f, "net {net} references unknown endpoint {endpoint}")
            }
            Issue::UnknownConstrainedBlock { block, kind } => {
                write!(f, "{kind} constraint references unknown block {block}")
            }
            Issue::ConflictingConstraint { block, reason } => {
                write!(f, "conflicting constraints on block {block}: {reason}")
            }
            Issue::SmallGroup { kind, index } => {
                write!(f, "{kind} group {index} has fewer than 2 blocks")
            }
            Issue::InvalidPreplacement { block } => {
                write!(f, "preplacement of block {block} is not a valid rectangle")
            }
            Issue::PreplacedOutsideOutline { block } => {
                write!(f, "preplaced block {block} lies outside the outline")
            }
            Issue::InstanceGroupMismatch { block } => {
                write!(f, "instance group of block {block} is inconsistent")
            }
            Issue::InvalidOutline => write!(f, "outline dimensions must be positive"),
        }
    }
}

/// Lists every violated problem invariant; empty iff the problem is well formed.
pub fn validate_problem(p: &Problem) -> Vec<Issue> {
    let mut issues = Vec::new();
    let n = p.blocks.len();
    if n == 0 {
        issues.push(Issue::NoBlocks);
    }

    let mut names = HashSet::new();
    for (i, b) in p.blocks.iter().enumerate() {
        if b.id != i {
            issues.push(Issue::BlockIdMismatch { index: i, id: b.id });
        }
        if !names.insert(b.name.as_str()) {
            issues.push(Issue::DuplicateName { name: b.name.clone() });
        }
        if !(b.area > 0.0 && b.area.is_finite()) {
            issues.push(Issue::NonPositiveArea { block: i });
        }
        let range_ok = b.ar_min > 0.0
            && b.ar_min <= b.ar_max
            && b.ar_max.is_finite()
            && b.aspect_ratio >= b.ar_min
            && b.aspect_ratio <= b.ar_max;
        if !range_ok {
            issues.push(Issue::InvalidAspectRange { block: i });
        }
    }

    for (i, t) in p.terminals.iter().enumerate() {
        if !(t.x.is_finite() && t.y.is_finite()) {
            issues.push(Issue::NonFiniteTerminal { terminal: i });
        }
    }

    for (i, net) in p.nets.iter().enumerate() {
        if net.degree() == 0 {
            issues.push(Issue::EmptyNet { net: i });
        }
        for &b in &net.block_endpoints {
            if b >= n {
                issues.push(Issue::UnknownEndpoint {
                    net: i,
                    endpoint: format!("block {b}"),
                });
            }
        }
        for &t in &net.terminal_endpoints {
            if t >= p.terminals.len() {
                issues.push(Issue::UnknownEndpoint {
                    net: i,
                    endpoint: format!("terminal {t}"),
                });
            }
        }
    }

    let cs = &p.constraints;
    let check_id = |issues: &mut Vec<Issue>, b: usize, kind: &'static str| {
        if b >= n {
            issues.push(Issue::UnknownConstrainedBlock { block: b, kind });
        }
    };
    for &b in cs.boundary.keys() {
        check_id(&mut issues, b, "boundary");
    }
    for g in &cs.groups {
        for &b in g {
            check_id(&mut issues, b, "grouping");
        }
    }
    for g in &cs.instance_groups {
        for &b in g {
            check_id(&mut issues, b, "instance");
        }
    }
    for (&b, r) in &cs.preplaced {
        check_id(&mut issues, b, "preplacement");
        if !r.is_valid() || r.x < 0.0 || r.y < 0.0 {
            issues.push(Issue::InvalidPreplacement { block: b });
        }
        if let Some(o) = p.outline {
            let eps = 1e-9 * o.w.max(o.h).max(1.0);
            if r.right() > o.w + eps || r.top() > o.h + eps {
                issues.push(Issue::PreplacedOutsideOutline { block: b });
            }
        }
    }
    issues.extend(cs.check_conflicts());

    // Block-side instance membership must mirror the constraint set, and members share bounds.
    for (gi, g) in cs.instance_groups.iter().enumerate() {
        let Some(&first) = g.first() else { continue };
        if first >= n {
            continue;
        }
        let lead = &p.blocks[first];
        for &b in g.iter().filter(|&&b| b < n) {
            let blk = &p.blocks[b];
            if blk.instance_group != Some(gi)
                || blk.ar_min != lead.ar_min
                || blk.ar_max != lead.ar_max
                || blk.is_soft != lead.is_soft
            {
                issues.push(Issue::InstanceGroupMismatch { block: b });
            }
        }
    }
    for b in &p.blocks {
        if let Some(gi) = b.instance_group {
            if cs.instance_groups.get(gi).is_none_or(|g| !g.contains(&b.id)) {
                issues.push(Issue::InstanceGroupMismatch { block: b.id });
            }
        }
    }

    if let Some(o) = p.outline {
        if !(o.w > 0.0 && o.h > 0.0 && o.w.is_finite() && o.h.is_finite()) {
            issues.push(Issue::InvalidOutline);
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn dims_examples() {
        assert_eq!(dims_from_ar(4.0, 1.0).unwrap(), (2.0, 2.0));
        assert_eq!(dims_from_ar(4.0, 4.0).unwrap(), (4.0, 1.0));
        let (w, h) = dims_from_ar(12.0, 3.0).unwrap();
        assert!(close(w, 6.0) && close(h, 2.0));
        assert!(close(w * h, 12.0) && close(w / h, 3.0));
    }

    #[test]
    fn dims_reject_non_positive() {
        assert!(dims_from_ar(0.0, 1.0).is_err());
        assert!(dims_from_ar(-1.0, 1.0).is_err());
        assert!(dims_from_ar(1.0, 0.0).is_err());
        assert!(dims_from_ar(1.0, f64::NAN).is_err());
    }

    #[test]
    fn overlap_examples() {
        let unit = Rect::new(0.0, 0.0, 1.0, 1.0);
        assert_eq!(rect_overlap_area(&unit, &unit), 1.0);
        assert_eq!(rect_overlap_area(&unit, &Rect::new(5.0, 5.0, 1.0, 1.0)), 0.0);
        assert_eq!(
            rect_overlap_area(&Rect::new(0.0, 0.0, 4.0, 4.0), &Rect::new(2.0, 2.0, 4.0, 4.0)),
            4.0
        );
        // edge contact is not overlap
        assert_eq!(rect_overlap_area(&unit, &Rect::new(1.0, 0.0, 1.0, 1.0)), 0.0);
    }

    fn tiny_problem() -> Problem {
        Problem {
            blocks: vec![
                Block::soft(0, "a", 4.0, 1.0 / 3.0, 3.0),
                Block::soft(1, "b", 9.0, 1.0 / 3.0, 3.0),
                Block::hard(2, "c", 2.0, 1.0),
            ],
            terminals: vec![Terminal { name: "p1".into(), x: 0.0, y: 5.0 }],
            nets: vec![Net { block_endpoints: vec![0, 1], terminal_endpoints: vec![0] }],
            constraints: ConstraintSet::default(),
            outline: Some(Outline { w: 10.0, h: 10.0 }),
        }
    }

    #[test]
    fn validate_accepts_well_formed() {
        assert!(validate_problem(&tiny_problem()).is_empty());
    }

    #[test]
    fn validate_flags_unknown_endpoint() {
        let mut p = tiny_problem();
        p.nets[0].block_endpoints.push(7);
        let issues = validate_problem(&p);
        assert!(matches!(issues.as_slice(), [Issue::UnknownEndpoint { net: 0, .. }]));
    }

    #[test]
    fn validate_flags_conflicting_constraint() {
        let mut p = tiny_problem();
        p.constraints.boundary.insert(1, Boundary::Left);
        p.constraints.preplaced.insert(1, Rect::new(1.0, 1.0, 3.0, 3.0));
        let issues = validate_problem(&p);
        assert_eq!(
            issues,
            vec![Issue::ConflictingConstraint {
                block: 1,
                reason: "both preplaced and boundary-constrained"
            }]
        );
        // idempotent, side-effect free
        assert_eq!(validate_problem(&p), issues);
    }

    #[test]
    fn validate_flags_preplaced_outside_outline() {
        let mut p = tiny_problem();
        p.constraints.preplaced.insert(0, Rect::new(9.0, 9.0, 2.0, 2.0));
        assert_eq!(validate_problem(&p), vec![Issue::PreplacedOutsideOutline { block: 0 }]);
    }

    #[test]
    fn instance_groups_sync_onto_blocks() {
        let mut p = tiny_problem();
        let cs = ConstraintSet { instance_groups: vec![vec![0, 1]], ..Default::default() };
        p.set_constraints(cs);
        assert_eq!(p.blocks[0].instance_group, Some(0));
        assert_eq!(p.blocks[1].instance_group, Some(0));
        assert!(validate_problem(&p).is_empty());
        p.blocks[2].instance_group = Some(0);
        assert_eq!(validate_problem(&p), vec![Issue::InstanceGroupMismatch { block: 2 }]);
    }

    #[test]
    fn boundary_strings_round_trip() {
        for b in Boundary::ALL {
            assert_eq!(b.as_str().parse::<Boundary>().unwrap(), b);
        }
        assert!("middle".parse::<Boundary>().is_err());
    }

    fn arb_rect() -> impl Strategy<Value = Rect> {
        (-50.0..50.0f64, -50.0..50.0f64, 0.1..30.0f64, 0.1..30.0f64)
            .prop_map(|(x, y, w, h)| Rect::new(x, y, w, h))
    }

    proptest! {
        #[test]
        fn overlap_is_symmetric(a in arb_rect(), b in arb_rect()) {
            prop_assert_eq!(rect_overlap_area(&a, &b), rect_overlap_area(&b, &a));
            let disjoint = a.right() <= b.x || b.right() <= a.x || a.top() <= b.y || b.top() <= a.y;
            prop_assert_eq!(rect_overlap_area(&a, &b) == 0.0, disjoint);
        }

        #[test]
        fn dims_round_trip(area in 1e-3..1e7f64, ar in 0.01..100.0f64) {
            let (w, h) = dims_from_ar(area, ar).unwrap();
            prop_assert!(((w * h) - area).abs() <= 1e-9 * area);
            prop_assert!(((w / h) - ar).abs() <= 1e-9 * ar);
        }
    }
}
