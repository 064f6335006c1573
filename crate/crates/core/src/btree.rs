// SPDX-License-Identifier: Apache-2.0

//! B*-tree floorplan representation.
//!
//! A node's left child sits immediately to the right of it, its right child
//! directly above it (same x). Packing walks the tree in preorder and drops
//! every block onto a horizontal contour. Preplaced blocks are anchored: they
//! ignore the position dictated by the tree but still raise the contour, and
//! their children are placed relative to the anchored rectangle.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{dims_from_ar, Floorplan, Problem, Rect};

/// Ratio bound of the multiplicative aspect-ratio step.
pub const AR_STEP: f64 = 1.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Whether packing honours preplacement anchors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Anchoring {
    /// Preplaced blocks sit at their target rectangles.
    Anchored,
    /// Every block follows the tree rules (preplaced blocks keep fixed dimensions).
    TreeOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BStarTree {
    parent: Vec<Option<usize>>,
    left: Vec<Option<usize>>,
    right: Vec<Option<usize>>,
    root: usize,
    ar: Vec<f64>,
}

/// Link state of a whole tree, used to undo structural moves.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkSnapshot {
    parent: Vec<Option<usize>>,
    left: Vec<Option<usize>>,
    right: Vec<Option<usize>>,
    root: usize,
}

impl BStarTree {
    /// A tree with a single root and no children. Mostly useful in tests.
    pub fn single(block_count: usize, root: usize, ar: Vec<f64>) -> Self {
        assert_eq!(ar.len(), block_count);
        BStarTree {
            parent: vec![None; block_count],
            left: vec![None; block_count],
            right: vec![None; block_count],
            root,
            ar,
        }
    }

    /// Builds a tree from explicit `(parent, side, child)` links. The links must
    /// form a valid tree over every block.
    pub fn from_links(root: usize, links: &[(usize, Side, usize)], ar: Vec<f64>) -> Result<Self> {
        let mut t = BStarTree::single(ar.len(), root, ar);
        for &(p, side, c) in links {
            if p >= t.len() || c >= t.len() {
                return Err(Error::UnknownBlock(p.max(c)));
            }
            if t.child(p, side).is_some() || t.parent[c].is_some() || c == root {
                return Err(Error::domain(format!("slot conflict linking {c} under {p}")));
            }
            t.set_child(p, side, Some(c));
            t.parent[c] = Some(p);
        }
        t.check_structure().map_err(Error::Domain)?;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, b: usize) -> Option<usize> {
        self.parent[b]
    }

    pub fn left(&self, b: usize) -> Option<usize> {
        self.left[b]
    }

    pub fn right(&self, b: usize) -> Option<usize> {
        self.right[b]
    }

    pub fn child(&self, b: usize, side: Side) -> Option<usize> {
        match side {
            Side::Left => self.left[b],
            Side::Right => self.right[b],
        }
    }

    fn set_child(&mut self, b: usize, side: Side, c: Option<usize>) {
        match side {
            Side::Left => self.left[b] = c,
            Side::Right => self.right[b] = c,
        }
    }

    /// Which slot of its parent `b` occupies, or `None` for the root.
    pub fn side_of(&self, b: usize) -> Option<Side> {
        let p = self.parent[b]?;
        if self.left[p] == Some(b) {
            Some(Side::Left)
        } else {
            Some(Side::Right)
        }
    }

    pub fn aspect_ratio(&self, b: usize) -> f64 {
        self.ar[b]
    }

    pub fn aspect_ratios(&self) -> &[f64] {
        &self.ar
    }

    pub fn set_aspect_ratio(&mut self, b: usize, ar: f64) {
        self.ar[b] = ar;
    }

    /// Blocks in packing order: node, left subtree, right subtree.
    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            order.push(n);
            if let Some(r) = self.right[n] {
                stack.push(r);
            }
            if let Some(l) = self.left[n] {
                stack.push(l);
            }
        }
        order
    }

    /// Verifies one root, consistent parent/child links, acyclicity and full coverage.
    pub fn check_structure(&self) -> std::result::Result<(), String> {
        let n = self.len();
        if n == 0 {
            return Err("empty tree".into());
        }
        if self.root >= n || self.parent[self.root].is_some() {
            return Err(format!("root {} is invalid or has a parent", self.root));
        }
        for b in 0..n {
            for c in [self.left[b], self.right[b]].into_iter().flatten() {
                if c >= n || self.parent[c] != Some(b) {
                    return Err(format!("child {c} of {b} does not point back"));
                }
            }
            if let Some(p) = self.parent[b] {
                if self.left[p] != Some(b) && self.right[p] != Some(b) {
                    return Err(format!("parent {p} of {b} does not own it"));
                }
            } else if b != self.root {
                return Err(format!("block {b} is detached"));
            }
            if self.left[b].is_some() && self.left[b] == self.right[b] {
                return Err(format!("block {b} has the same child twice"));
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![self.root];
        let mut count = 0;
        while let Some(b) = stack.pop() {
            if std::mem::replace(&mut seen[b], true) {
                return Err(format!("cycle through block {b}"));
            }
            count += 1;
            stack.extend(self.left[b]);
            stack.extend(self.right[b]);
        }
        if count != n {
            return Err(format!("{} of {n} blocks reachable from the root", count));
        }
        Ok(())
    }

    pub fn snapshot_links(&self) -> LinkSnapshot {
        LinkSnapshot {
            parent: self.parent.clone(),
            left: self.left.clone(),
            right: self.right.clone(),
            root: self.root,
        }
    }

    pub fn restore_links(&mut self, snap: &LinkSnapshot) {
        self.parent.clone_from(&snap.parent);
        self.left.clone_from(&snap.left);
        self.right.clone_from(&snap.right);
        self.root = snap.root;
    }

    fn check_id(&self, b: usize) -> Result<()> {
        if b < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownBlock(b))
        }
    }

    /// Exchanges the tree positions of two blocks. Aspect ratios stay with the blocks.
    pub fn swap_nodes(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_id(a)?;
        self.check_id(b)?;
        if a == b {
            return Err(Error::domain("cannot swap a block with itself"));
        }
        let map = |x: Option<usize>| {
            x.map(|v| {
                if v == a {
                    b
                } else if v == b {
                    a
                } else {
                    v
                }
            })
        };
        let mut touched = [a, b, 0, 0, 0, 0, 0, 0];
        let mut k = 2;
        for v in [
            self.parent[a],
            self.left[a],
            self.right[a],
            self.parent[b],
            self.left[b],
            self.right[b],
        ]
        .into_iter()
        .flatten()
        {
            if !touched[..k].contains(&v) {
                touched[k] = v;
                k += 1;
            }
        }
        self.parent.swap(a, b);
        self.left.swap(a, b);
        self.right.swap(a, b);
        // relabel every link that mentions a or b, exactly once per node
        for &v in &touched[..k] {
            self.parent[v] = map(self.parent[v]);
            self.left[v] = map(self.left[v]);
            self.right[v] = map(self.right[v]);
        }
        self.root = map(Some(self.root)).unwrap_or(self.root);
        Ok(())
    }

    /// Unlinks `b`, splicing its children into its old slot.
    ///
    /// With two children the left child is promoted and the right child is
    /// hung off the end of the promoted node's right chain.
    fn detach(&mut self, b: usize) {
        let replacement = match (self.left[b], self.right[b]) {
            (None, None) => None,
            (Some(c), None) | (None, Some(c)) => Some(c),
            (Some(l), Some(r)) => {
                let mut t = l;
                while let Some(next) = self.right[t] {
                    t = next;
                }
                self.right[t] = Some(r);
                self.parent[r] = Some(t);
                Some(l)
            }
        };
        let parent = self.parent[b];
        if let Some(c) = replacement {
            self.parent[c] = parent;
        }
        match parent {
            Some(p) => {
                if self.left[p] == Some(b) {
                    self.left[p] = replacement;
                } else {
                    self.right[p] = replacement;
                }
            }
            None => {
                if let Some(c) = replacement {
                    self.root = c;
                }
            }
        }
        self.parent[b] = None;
        self.left[b] = None;
        self.right[b] = None;
    }

    /// Hangs the detached block `b` in `parent`'s slot, pushing any occupant
    /// down into `b`'s same-side slot.
    fn attach(&mut self, b: usize, parent: usize, side: Side) {
        let occupant = self.child(parent, side);
        self.set_child(parent, side, Some(b));
        self.parent[b] = Some(parent);
        if let Some(o) = occupant {
            self.set_child(b, side, Some(o));
            self.parent[o] = Some(b);
        }
    }

    /// Removes `b` and re-inserts it as the `side` child of `new_parent`.
    pub fn move_node(&mut self, b: usize, new_parent: usize, side: Side) -> Result<()> {
        self.check_id(b)?;
        self.check_id(new_parent)?;
        if b == new_parent {
            return Err(Error::domain("cannot move a block under itself"));
        }
        self.detach(b);
        self.attach(b, new_parent, side);
        Ok(())
    }

    /// Multiplies the aspect ratio of `b` by a random factor in
    /// `[1/AR_STEP, AR_STEP]`, clamped to the block's shape limits. Every
    /// member of the block's instance group receives the same new ratio.
    ///
    /// Returns the previous ratios of all changed blocks, or `None` when the
    /// block cannot be reshaped (hard or preplaced).
    pub fn perturb_ar<R: Rng + ?Sized>(
        &mut self,
        problem: &Problem,
        b: usize,
        rng: &mut R,
    ) -> Result<Option<Vec<(usize, f64)>>> {
        self.check_id(b)?;
        let block = problem.blocks.get(b).ok_or(Error::UnknownBlock(b))?;
        if !block.is_soft || problem.is_preplaced(b) {
            return Ok(None);
        }
        let factor = rng.gen_range(1.0 / AR_STEP..=AR_STEP);
        let new_ar = block.clamp_ar(self.ar[b] * factor);
        let mut previous = Vec::with_capacity(1);
        match block.instance_group {
            Some(g) => {
                for &m in &problem.constraints.instance_groups[g] {
                    previous.push((m, self.ar[m]));
                    self.ar[m] = new_ar;
                }
            }
            None => {
                previous.push((b, self.ar[b]));
                self.ar[b] = new_ar;
            }
        }
        Ok(Some(previous))
    }
}

/// Random initial tree: blocks in random order, each hung from a uniformly
/// random free slot of the blocks already inserted.
pub fn random_tree<R: Rng + ?Sized>(problem: &Problem, rng: &mut R) -> Result<BStarTree> {
    let n = problem.blocks.len();
    if n == 0 {
        return Err(Error::domain("cannot build a tree without blocks"));
    }
    let ar = problem
        .blocks
        .iter()
        .map(|b| b.clamp_ar(1.0))
        .collect::<Vec<_>>();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut tree = BStarTree::single(n, order[0], ar);
    let mut free: Vec<(usize, Side)> = vec![(order[0], Side::Left), (order[0], Side::Right)];
    for &b in &order[1..] {
        let (p, side) = free.swap_remove(rng.gen_range(0..free.len()));
        tree.set_child(p, side, Some(b));
        tree.parent[b] = Some(p);
        free.push((b, Side::Left));
        free.push((b, Side::Right));
    }
    Ok(tree)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub x0: f64,
    pub x1: f64,
    pub height: f64,
}

/// Horizontal skyline over `[0, inf)`, kept as contiguous segments with
/// distinct neighbouring heights.
#[derive(Clone, Debug)]
pub struct Contour {
    segs: Vec<Segment>,
}

impl Default for Contour {
    fn default() -> Self {
        Self::new()
    }
}

impl Contour {
    pub fn new() -> Self {
        Contour {
            segs: vec![Segment { x0: 0.0, x1: f64::INFINITY, height: 0.0 }],
        }
    }

    pub fn reset(&mut self) {
        self.segs.clear();
        self.segs.push(Segment { x0: 0.0, x1: f64::INFINITY, height: 0.0 });
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segs
    }

    /// Highest point of the contour over the open span `(x0, x1)`.
    pub fn max_height(&self, x0: f64, x1: f64) -> f64 {
        let start = self.segs.partition_point(|s| s.x1 <= x0);
        self.segs[start..]
            .iter()
            .take_while(|s| s.x0 < x1)
            .fold(0.0, |m, s| m.max(s.height))
    }

    /// Sets the contour to `height` over `[x0, x1)`.
    pub fn set(&mut self, x0: f64, x1: f64, height: f64) {
        let mut i = self.segs.partition_point(|s| s.x1 <= x0);
        let mut j = self.segs.partition_point(|s| s.x0 < x1);
        if i >= j {
            // span lies left of the first segment
            j = i;
        }
        let mut pieces = [Segment { x0, x1, height }; 3];
        let mut count = 0;
        if i < j && self.segs[i].x0 < x0 {
            let s = self.segs[i];
            pieces[count] = Segment { x0: s.x0, x1: x0, height: s.height };
            count += 1;
        }
        pieces[count] = Segment { x0, x1, height };
        count += 1;
        if i < j && self.segs[j - 1].x1 > x1 {
            let s = self.segs[j - 1];
            pieces[count] = Segment { x0: x1, x1: s.x1, height: s.height };
            count += 1;
        }
        let mut merged: [Segment; 3] = pieces;
        let mut m = 0;
        for p in &pieces[..count] {
            if m > 0 && merged[m - 1].height == p.height {
                merged[m - 1].x1 = p.x1;
            } else {
                merged[m] = *p;
                m += 1;
            }
        }
        if i > 0 && self.segs[i - 1].height == merged[0].height {
            merged[0].x0 = self.segs[i - 1].x0;
            i -= 1;
        }
        if j < self.segs.len() && self.segs[j].height == merged[m - 1].height {
            merged[m - 1].x1 = self.segs[j].x1;
            j += 1;
        }
        if j - i == m {
            self.segs[i..j].copy_from_slice(&merged[..m]);
        } else {
            self.segs.splice(i..j, merged[..m].iter().copied());
        }
    }
}

#[inline]
pub(crate) fn block_dims(problem: &Problem, tree_ar: &[f64], b: usize) -> (f64, f64) {
    match problem.constraints.preplaced.get(&b) {
        Some(r) => (r.w, r.h),
        None => {
            let area = problem.blocks[b].area;
            let ar = tree_ar[b];
            ((area * ar).sqrt(), (area / ar).sqrt())
        }
    }
}

/// Reusable packing buffers.
#[derive(Clone, Debug, Default)]
pub struct Packer {
    contour: Contour,
    stack: Vec<usize>,
}

impl Packer {
    pub fn new() -> Self {
        Packer::default()
    }

    /// Packs `tree` into `out` (resized to the block count).
    pub fn pack_into(
        &mut self,
        tree: &BStarTree,
        problem: &Problem,
        anchoring: Anchoring,
        out: &mut Vec<Rect>,
    ) {
        let n = tree.len();
        out.clear();
        out.resize(n, Rect::new(0.0, 0.0, 0.0, 0.0));
        self.contour.reset();
        self.stack.clear();
        self.stack.push(tree.root);
        while let Some(b) = self.stack.pop() {
            let anchor = match anchoring {
                Anchoring::Anchored => problem.constraints.preplaced.get(&b).copied(),
                Anchoring::TreeOnly => None,
            };
            let rect = match anchor {
                Some(r) => r,
                None => {
                    let (w, h) = block_dims(problem, &tree.ar, b);
                    let x = match tree.parent[b] {
                        None => 0.0,
                        Some(p) => {
                            let pr = &out[p];
                            if tree.left[p] == Some(b) {
                                pr.x + pr.w
                            } else {
                                pr.x
                            }
                        }
                    };
                    let y = if tree.parent[b].is_none() {
                        0.0
                    } else {
                        self.contour.max_height(x, x + w)
                    };
                    Rect::new(x, y, w, h)
                }
            };
            self.contour.set(rect.x, rect.right(), rect.top());
            out[b] = rect;
            if let Some(r) = tree.right[b] {
                self.stack.push(r);
            }
            if let Some(l) = tree.left[b] {
                self.stack.push(l);
            }
        }
    }
}

/// Packs with preplacement anchors honoured.
pub fn pack(tree: &BStarTree, problem: &Problem) -> Floorplan {
    pack_with(tree, problem, Anchoring::Anchored)
}

pub fn pack_with(tree: &BStarTree, problem: &Problem, anchoring: Anchoring) -> Floorplan {
    let mut out = Vec::with_capacity(tree.len());
    Packer::new().pack_into(tree, problem, anchoring, &mut out);
    Floorplan::new(out)
}

/// Finds an aspect ratio whose derived dimensions are bit-identical to `(w, h)`.
fn recover_ar(area: f64, w: f64, h: f64) -> Option<f64> {
    let guess = w / h;
    let hit = |ar: f64| matches!(dims_from_ar(area, ar), Ok((dw, dh)) if dw == w && dh == h);
    if hit(guess) {
        return Some(guess);
    }
    let (mut up, mut down) = (guess, guess);
    for _ in 0..64 {
        up = up.next_up();
        down = down.next_down();
        if hit(up) {
            return Some(up);
        }
        if hit(down) {
            return Some(down);
        }
    }
    None
}

#[inline]
fn x_key(x: f64) -> u64 {
    (x + 0.0).to_bits()
}

/// Rebuilds a tree whose packing reproduces `fp` exactly.
///
/// The layout must be overlap-free, stacked (every block rests on the highest
/// block beneath it, or on the floor) and free of preplaced blocks. Blocks are
/// visited depth-first from the lower-left block; a node's left child is the
/// lowest unvisited block starting at its right edge and its right child the
/// lowest unvisited block sharing its x, restricted to blocks whose supports
/// have all been placed.
pub fn tree_from_layout(fp: &Floorplan, problem: &Problem) -> Result<BStarTree> {
    let n = problem.blocks.len();
    if n == 0 || fp.len() != n {
        return Err(Error::domain(format!(
            "floorplan has {} placements for {n} blocks",
            fp.len()
        )));
    }
    if !problem.constraints.preplaced.is_empty() {
        return Err(Error::domain("layout translation does not support preplaced blocks"));
    }
    let r = &fp.placements;
    let name = |b: usize| problem.blocks[b].name.clone();

    let mut ar = Vec::with_capacity(n);
    for (b, rect) in r.iter().enumerate() {
        let a = recover_ar(problem.blocks[b].area, rect.w, rect.h).ok_or_else(|| {
            Error::domain(format!("dimensions of `{}` do not match its area", name(b)))
        })?;
        ar.push(a);
    }

    // blocks_above[c]: blocks sharing part of c's x-span that sit above c
    let mut blocks_above: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pending_below = vec![0usize; n];
    for a in 0..n {
        if r[a].x < 0.0 || r[a].y < 0.0 {
            return Err(Error::NotCompact {
                block: name(a),
                reason: "lies outside the first quadrant".into(),
            });
        }
        let mut support = 0.0f64;
        for b in 0..n {
            if a == b {
                continue;
            }
            let x_overlap = r[a].x < r[b].right() && r[b].x < r[a].right();
            if !x_overlap {
                continue;
            }
            if r[b].top() <= r[a].y {
                support = support.max(r[b].top());
                blocks_above[b].push(a);
                pending_below[a] += 1;
            } else if r[a].top() > r[b].y {
                return Err(Error::NotCompact {
                    block: name(a),
                    reason: format!("overlaps `{}`", name(b)),
                });
            }
        }
        if support != r[a].y {
            return Err(Error::NotCompact {
                block: name(a),
                reason: "can move down".into(),
            });
        }
    }

    let root = (0..n)
        .find(|&b| r[b].x == 0.0 && r[b].y == 0.0)
        .ok_or_else(|| Error::domain("no block sits at the origin"))?;

    let mut by_x: HashMap<u64, Vec<usize>> = HashMap::new();
    for b in 0..n {
        by_x.entry(x_key(r[b].x)).or_default().push(b);
    }
    for list in by_x.values_mut() {
        list.sort_by(|&a, &b| r[a].y.total_cmp(&r[b].y));
    }

    let mut placed = vec![false; n];
    let mut tree = BStarTree::single(n, root, ar);

    let place = |b: usize, placed: &mut Vec<bool>, pending: &mut Vec<usize>| {
        placed[b] = true;
        for &a in &blocks_above[b] {
            pending[a] -= 1;
        }
    };
    let pick = |x: f64, placed: &[bool], pending: &[usize]| -> Option<usize> {
        by_x
            .get(&x_key(x))?
            .iter()
            .copied()
            .find(|&c| !placed[c] && pending[c] == 0)
    };

    place(root, &mut placed, &mut pending_below);
    // (node, next side to fill)
    let mut stack: Vec<(usize, Side)> = vec![(root, Side::Left)];
    while let Some(&mut (node, ref mut phase)) = stack.last_mut() {
        match *phase {
            Side::Left => {
                *phase = Side::Right;
                if let Some(c) = pick(r[node].right(), &placed, &pending_below) {
                    tree.set_child(node, Side::Left, Some(c));
                    tree.parent[c] = Some(node);
                    place(c, &mut placed, &mut pending_below);
                    stack.push((c, Side::Left));
                }
            }
            Side::Right => {
                stack.pop();
                if let Some(c) = pick(r[node].x, &placed, &pending_below) {
                    tree.set_child(node, Side::Right, Some(c));
                    tree.parent[c] = Some(node);
                    place(c, &mut placed, &mut pending_below);
                    stack.push((c, Side::Left));
                }
            }
        }
    }

    if let Some(b) = placed.iter().position(|&p| !p) {
        return Err(Error::NotCompact {
            block: name(b),
            reason: "is not reachable from the lower-left block".into(),
        });
    }
    let repacked = pack(&tree, problem);
    if let Some(b) = (0..n).find(|&b| repacked.placements[b] != r[b]) {
        return Err(Error::NotCompact {
            block: name(b),
            reason: "cannot be reproduced by any tree".into(),
        });
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Block, ConstraintSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hard_problem(dims: &[(f64, f64)]) -> Problem {
        Problem {
            blocks: dims
                .iter()
                .enumerate()
                .map(|(i, &(w, h))| Block::hard(i, format!("b{i}"), w, h))
                .collect(),
            ..Default::default()
        }
    }

    fn ars(p: &Problem) -> Vec<f64> {
        p.blocks.iter().map(|b| b.aspect_ratio).collect()
    }

    fn soft_problem(n: usize, seed: u64) -> Problem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Problem {
            blocks: (0..n)
                .map(|i| Block::soft(i, format!("s{i}"), rng.gen_range(1.0..50.0), 1.0 / 3.0, 3.0))
                .collect(),
            ..Default::default()
        }
    }

    fn approx(r: Rect, x: f64, y: f64) -> bool {
        (r.x - x).abs() < 1e-12 && (r.y - y).abs() < 1e-12
    }

    #[test]
    fn single_root_at_origin() {
        let p = hard_problem(&[(4.0, 2.0)]);
        let t = BStarTree::single(1, 0, ars(&p));
        let fp = pack(&t, &p);
        assert!(approx(fp.placements[0], 0.0, 0.0));
        assert!((fp.placements[0].w - 4.0).abs() < 1e-12);
    }

    #[test]
    fn left_and_right_child_rules() {
        let p = hard_problem(&[(4.0, 2.0), (3.0, 3.0)]);
        let t = BStarTree::from_links(0, &[(0, Side::Left, 1)], ars(&p)).unwrap();
        assert!(approx(pack(&t, &p).placements[1], 4.0, 0.0));
        let t = BStarTree::from_links(0, &[(0, Side::Right, 1)], ars(&p)).unwrap();
        assert!(approx(pack(&t, &p).placements[1], 0.0, 2.0));
    }

    #[test]
    fn contour_lifts_right_child_partially() {
        // root (2,5), its left child (3,1) at (2,0), that child's right child of width 4
        let p = hard_problem(&[(2.0, 5.0), (3.0, 1.0), (4.0, 1.0)]);
        let t = BStarTree::from_links(0, &[(0, Side::Left, 1), (1, Side::Right, 2)], ars(&p))
            .unwrap();
        let fp = pack(&t, &p);
        assert!(approx(fp.placements[1], 2.0, 0.0));
        assert!(approx(fp.placements[2], 2.0, 1.0));
    }

    #[test]
    fn anchored_block_sits_on_target() {
        let mut p = hard_problem(&[(3.0, 3.0), (2.0, 2.0), (1.0, 1.0)]);
        let mut cs = ConstraintSet::default();
        cs.preplaced.insert(1, Rect::new(10.0, 10.0, 2.0, 2.0));
        p.set_constraints(cs);
        let t = BStarTree::from_links(0, &[(0, Side::Left, 1), (1, Side::Left, 2)], ars(&p))
            .unwrap();
        let fp = pack(&t, &p);
        assert_eq!(fp.placements[1], Rect::new(10.0, 10.0, 2.0, 2.0));
        // child of the anchor placed relative to it, on the contour to its right
        assert!(approx(fp.placements[2], 12.0, 0.0));
        let fp = pack_with(&t, &p, Anchoring::TreeOnly);
        assert!(approx(fp.placements[1], 3.0, 0.0));
    }

    #[test]
    fn contour_stays_merged_and_contiguous() {
        let mut c = Contour::new();
        c.set(0.0, 2.0, 3.0);
        c.set(2.0, 4.0, 3.0);
        assert_eq!(c.segments().len(), 2);
        assert_eq!(c.segments()[0], Segment { x0: 0.0, x1: 4.0, height: 3.0 });
        c.set(1.0, 2.0, 5.0);
        assert_eq!(c.max_height(0.0, 1.0), 3.0);
        assert_eq!(c.max_height(0.5, 1.5), 5.0);
        assert_eq!(c.max_height(2.0, 10.0), 3.0);
        assert_eq!(c.max_height(4.0, 10.0), 0.0);
        c.set(0.0, 10.0, 1.0);
        assert_eq!(c.segments().len(), 2);
        for w in c.segments().windows(2) {
            assert_eq!(w[0].x1, w[1].x0);
            assert_ne!(w[0].height, w[1].height);
        }
    }

    #[test]
    fn random_tree_is_deterministic_and_valid() {
        let p = soft_problem(100, 1);
        let t1 = random_tree(&p, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let t2 = random_tree(&p, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(t1, t2);
        t1.check_structure().unwrap();
        assert_eq!(t1.preorder().len(), 100);
        let one = soft_problem(1, 1);
        let t = random_tree(&one, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(t.root(), 0);
        assert!(random_tree(&Problem::default(), &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn swap_is_an_involution() {
        let p = soft_problem(30, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let orig = random_tree(&p, &mut rng).unwrap();
        for _ in 0..500 {
            let a = rng.gen_range(0..30);
            let b = (a + rng.gen_range(1..30)) % 30;
            let mut t = orig.clone();
            t.swap_nodes(a, b).unwrap();
            t.check_structure().unwrap();
            t.swap_nodes(a, b).unwrap();
            assert_eq!(t, orig);
        }
    }

    #[test]
    fn swap_root_with_leaf() {
        let p = hard_problem(&[(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)]);
        let mut t = BStarTree::from_links(0, &[(0, Side::Left, 1), (1, Side::Right, 2)], ars(&p))
            .unwrap();
        let before = pack(&t, &p);
        t.swap_nodes(0, 2).unwrap();
        assert_eq!(t.root(), 2);
        assert_eq!(t.right(1), Some(0));
        t.check_structure().unwrap();
        assert_ne!(pack(&t, &p), before);
        assert!(t.swap_nodes(1, 1).is_err());
        assert!(t.swap_nodes(1, 9).is_err());
    }

    #[test]
    fn move_leaf_and_occupied_slot() {
        let p = hard_problem(&[(1.0, 1.0); 4]);
        let mut t = BStarTree::from_links(
            0,
            &[(0, Side::Left, 1), (0, Side::Right, 2), (2, Side::Left, 3)],
            ars(&p),
        )
        .unwrap();
        t.move_node(3, 1, Side::Left).unwrap();
        assert_eq!(t.left(1), Some(3));
        assert_eq!(t.left(2), None);
        t.check_structure().unwrap();
        // 2's left slot is empty; move 1 (with child 3) into 0's occupied right slot
        t.move_node(1, 0, Side::Right).unwrap();
        t.check_structure().unwrap();
        assert_eq!(t.right(0), Some(1));
        assert_eq!(t.right(1), Some(2));
        assert_eq!(t.left(0), Some(3));
        assert!(t.move_node(2, 2, Side::Left).is_err());
    }

    #[test]
    fn detach_with_two_children_promotes_left() {
        let p = hard_problem(&[(1.0, 1.0); 6]);
        // 0 -> L1, R2 ; 1 -> R3 ; 3 -> R4 ; 5 child of 2
        let mut t = BStarTree::from_links(
            0,
            &[
                (0, Side::Left, 1),
                (0, Side::Right, 2),
                (1, Side::Right, 3),
                (3, Side::Right, 4),
                (2, Side::Left, 5),
            ],
            ars(&p),
        )
        .unwrap();
        t.move_node(0, 5, Side::Right).unwrap();
        t.check_structure().unwrap();
        assert_eq!(t.root(), 1);
        assert_eq!(t.right(4), Some(2));
        assert_eq!(t.right(5), Some(0));
    }

    #[test]
    fn random_moves_preserve_structure() {
        let p = soft_problem(40, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut t = random_tree(&p, &mut rng).unwrap();
        for _ in 0..5000 {
            let a = rng.gen_range(0..40);
            let b = (a + rng.gen_range(1..40)) % 40;
            if rng.gen_bool(0.5) {
                t.swap_nodes(a, b).unwrap();
            } else {
                let side = if rng.gen_bool(0.5) { Side::Left } else { Side::Right };
                t.move_node(a, b, side).unwrap();
            }
            t.check_structure().unwrap();
        }
    }

    #[test]
    fn perturb_clamps_and_preserves_area() {
        let p = soft_problem(3, 6);
        let mut t = random_tree(&p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        t.set_aspect_ratio(0, 3.0);
        for _ in 0..200 {
            t.perturb_ar(&p, 0, &mut rng).unwrap().unwrap();
            let ar = t.aspect_ratio(0);
            assert!((1.0 / 3.0..=3.0).contains(&ar));
            let (w, h) = block_dims(&p, t.aspect_ratios(), 0);
            assert!((w * h - p.blocks[0].area).abs() <= 1e-9 * p.blocks[0].area);
        }
    }

    #[test]
    fn perturb_at_upper_bound_stays_clamped() {
        let p = soft_problem(1, 6);
        let mut t = random_tree(&p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        t.set_aspect_ratio(0, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut saw_up = false;
        for _ in 0..100 {
            let before = t.aspect_ratio(0);
            t.perturb_ar(&p, 0, &mut rng).unwrap();
            if before == 3.0 && t.aspect_ratio(0) == 3.0 {
                saw_up = true;
            }
            t.set_aspect_ratio(0, 3.0);
        }
        assert!(saw_up);
    }

    #[test]
    fn perturb_moves_instance_group_together() {
        let mut p = soft_problem(5, 7);
        let cs = ConstraintSet { instance_groups: vec![vec![0, 2, 4]], ..Default::default() };
        p.set_constraints(cs);
        let mut t = random_tree(&p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let prev = t.perturb_ar(&p, 2, &mut rng).unwrap().unwrap();
            assert_eq!(prev.len(), 3);
            assert_eq!(t.aspect_ratio(0), t.aspect_ratio(2));
            assert_eq!(t.aspect_ratio(2), t.aspect_ratio(4));
        }
    }

    #[test]
    fn perturb_rejects_hard_and_preplaced() {
        let mut p = hard_problem(&[(1.0, 2.0), (2.0, 2.0)]);
        let mut t = BStarTree::from_links(0, &[(0, Side::Left, 1)], ars(&p)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(t.perturb_ar(&p, 0, &mut rng).unwrap(), None);
        p.blocks[1] = Block::soft(1, "s", 4.0, 0.5, 2.0);
        let mut cs = ConstraintSet::default();
        cs.preplaced.insert(1, Rect::new(0.0, 0.0, 2.0, 2.0));
        p.set_constraints(cs);
        assert_eq!(t.perturb_ar(&p, 1, &mut rng).unwrap(), None);
        assert!(t.perturb_ar(&p, 5, &mut rng).is_err());
    }

    #[test]
    fn layout_round_trip_small() {
        let p = hard_problem(&[(4.0, 2.0)]);
        let fp = Floorplan::new(vec![Rect::new(0.0, 0.0, 4.0, 2.0)]);
        let t = tree_from_layout(&fp, &p).unwrap();
        assert_eq!(t.root(), 0);
        assert_eq!(pack(&t, &p), fp);

        // lower-left block becomes the root
        let p = hard_problem(&[(2.0, 1.0), (1.0, 1.0), (3.0, 1.0)]);
        let fp = Floorplan::new(vec![
            Rect::new(1.0, 0.0, 2.0, 1.0),
            Rect::new(0.0, 0.0, 1.0, 1.0),
            Rect::new(0.0, 1.0, 3.0, 1.0),
        ]);
        let t = tree_from_layout(&fp, &p).unwrap();
        assert_eq!(t.root(), 1);
        assert_eq!(pack(&t, &p), fp);
    }

    #[test]
    fn layout_rejects_floating_block() {
        let p = hard_problem(&[(1.0, 1.0), (1.0, 1.0)]);
        let fp = Floorplan::new(vec![Rect::new(0.0, 0.0, 1.0, 1.0), Rect::new(1.0, 0.5, 1.0, 1.0)]);
        match tree_from_layout(&fp, &p) {
            Err(Error::NotCompact { block, .. }) => assert_eq!(block, "b1"),
            other => panic!("expected NotCompact, got {other:?}"),
        }
    }

    #[test]
    fn layout_round_trip_random() {
        for seed in 0..300 {
            let p = soft_problem(25, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut t = random_tree(&p, &mut rng).unwrap();
            for b in 0..25 {
                t.perturb_ar(&p, b, &mut rng).unwrap();
            }
            let fp = pack(&t, &p);
            let back = tree_from_layout(&fp, &p)
                .unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            assert_eq!(pack(&back, &p), fp, "seed {seed}");
        }
    }
}
