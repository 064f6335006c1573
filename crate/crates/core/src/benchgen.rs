// SPDX-License-Identifier: Apache-2.0

//! Seeded constraint augmentation of unconstrained benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dims_from_ar, Boundary, ConstraintSet, Outline, Problem, Rect};

/// Whitespace allowance of a derived fixed outline.
pub const OUTLINE_SLACK: f64 = 1.1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentSpec {
    pub n_edge_groups: usize,
    pub edge_group_size: usize,
    pub n_corner_blocks: usize,
    pub n_grouping_groups: usize,
    pub grouping_group_size: usize,
    pub n_preplaced: usize,
    pub seed: u64,
}

impl AugmentSpec {
    pub fn new(seed: u64) -> Self {
        AugmentSpec {
            n_edge_groups: 4,
            edge_group_size: 7,
            n_corner_blocks: 4,
            n_grouping_groups: 3,
            grouping_group_size: 3,
            n_preplaced: 10,
            seed,
        }
    }

    pub fn picked_blocks(&self) -> usize {
        self.n_edge_groups * self.edge_group_size
            + self.n_corner_blocks
            + self.n_grouping_groups * self.grouping_group_size
            + self.n_preplaced
    }
}

impl Default for AugmentSpec {
    fn default() -> Self {
        AugmentSpec::new(0)
    }
}

const EDGES: [Boundary; 4] = [Boundary::Left, Boundary::Right, Boundary::Top, Boundary::Bottom];
const CORNERS: [Boundary; 4] =
    [Boundary::BottomLeft, Boundary::BottomRight, Boundary::TopLeft, Boundary::TopRight];

/// Draws disjoint edge groups, corner blocks, grouping triples and
/// preplaced blocks. Preplaced targets keep each block's current shape and
/// sit uniformly at random inside the outline.
pub fn augment(problem: &Problem, spec: &AugmentSpec) -> Result<ConstraintSet> {
    let needed = spec.picked_blocks();
    let n = problem.blocks.len();
    if n < needed {
        return Err(Error::domain(format!("augmentation picks {needed} blocks but the problem has {n}")));
    }
    if spec.grouping_group_size == 1 {
        return Err(Error::domain("grouping constraints need at least 2 blocks"));
    }
    let outline = problem
        .outline
        .ok_or_else(|| Error::domain("augmentation needs a fixed outline"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut rng);
    let mut picks = ids.into_iter();
    let mut take = |k: usize| picks.by_ref().take(k).collect::<Vec<_>>();

    let mut cs = ConstraintSet::default();
    for g in 0..spec.n_edge_groups {
        for b in take(spec.edge_group_size) {
            cs.boundary.insert(b, EDGES[g % EDGES.len()]);
        }
    }
    for (i, b) in take(spec.n_corner_blocks).into_iter().enumerate() {
        cs.boundary.insert(b, CORNERS[i % CORNERS.len()]);
    }
    for _ in 0..spec.n_grouping_groups {
        let mut g = take(spec.grouping_group_size);
        g.sort_unstable();
        if !g.is_empty() {
            cs.groups.push(g);
        }
    }
    let mut preplaced = take(spec.n_preplaced);
    preplaced.sort_unstable();
    for b in preplaced {
        let blk = &problem.blocks[b];
        let (w, h) = dims_from_ar(blk.area, blk.aspect_ratio)?;
        if w > outline.w || h > outline.h {
            return Err(Error::domain(format!("block `{}` does not fit the outline", blk.name)));
        }
        let x = rng.gen_range(0.0..=outline.w - w);
        let y = rng.gen_range(0.0..=outline.h - h);
        cs.preplaced.insert(b, Rect::new(x, y, w, h));
    }
    cs.instance_groups = problem.constraints.instance_groups.clone();
    Ok(cs)
}

/// Square outline holding the total block area plus 10% whitespace.
pub fn derive_fixed_outline(problem: &Problem) -> Outline {
    let total: f64 = problem.blocks.iter().map(|b| b.area).sum();
    let side = (OUTLINE_SLACK * total).sqrt();
    Outline { w: side, h: side }
}
