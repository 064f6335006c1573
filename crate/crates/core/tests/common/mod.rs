// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

//! Deterministic stand-in for the GSRC n100 benchmark: 100 hard blocks,
//! 334 perimeter terminals and 885 nets with spatial locality, written out
//! in Bookshelf form so every test goes through the parser.

use std::path::{Path, PathBuf};

use floorplan::io::{parse_bookshelf, write_bookshelf, BookshelfBundle};
use floorplan::model::{Block, Net, Problem, Terminal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const N_BLOCKS: usize = 100;
pub const N_TERMINALS: usize = 334;
pub const N_NETS: usize = 885;
pub const TOTAL_AREA: f64 = 179_501.0;

/// Location of a user-supplied copy of the real benchmark.
pub fn real_n100() -> Option<BookshelfBundle> {
    let stem = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/gsrc/n100");
    let b = BookshelfBundle::from_stem(stem);
    (b.blocks.exists() && b.nets.exists() && b.pl.exists()).then_some(b)
}

pub fn synthetic_n100() -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e31_3030);
    let raw: Vec<f64> = (0..N_BLOCKS).map(|_| rng.gen_range(1.0f64..8.0).powi(2)).collect();
    let scale = TOTAL_AREA / raw.iter().sum::<f64>();
    let blocks: Vec<Block> = raw
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let area = (a * scale).round().max(1.0);
            let ar = rng.gen_range(-0.7f64..0.7).exp();
            let w = (area * ar).sqrt().round().max(1.0);
            let h = (area / w).round().max(1.0);
            Block::hard(i, format!("bk{i}"), w, h)
        })
        .collect();
    let area: f64 = blocks.iter().map(|b| b.area).sum();
    let side = (1.1 * area).sqrt();

    // planted positions on a jittered 10 x 10 grid
    let mut slots: Vec<usize> = (0..N_BLOCKS).collect();
    for i in (1..N_BLOCKS).rev() {
        slots.swap(i, rng.gen_range(0..=i));
    }
    let cell = side / 10.0;
    let planted: Vec<(f64, f64)> = slots
        .iter()
        .map(|&s| {
            let (r, c) = ((s / 10) as f64, (s % 10) as f64);
            (cell * (c + rng.gen_range(0.2..0.8)), cell * (r + rng.gen_range(0.2..0.8)))
        })
        .collect();

    let perimeter = 4.0 * side;
    let terminals: Vec<Terminal> = (0..N_TERMINALS)
        .map(|k| {
            let d = perimeter * (k as f64 + 0.5) / N_TERMINALS as f64;
            let (x, y) = match (d / side) as usize {
                0 => (d, 0.0),
                1 => (side, d - side),
                2 => (3.0 * side - d, side),
                _ => (0.0, 4.0 * side - d),
            };
            Terminal { name: format!("p{}", k + 1), x: x.round(), y: y.round() }
        })
        .collect();

    let nearest = |x: f64, y: f64, k: usize| -> Vec<usize> {
        let mut ids: Vec<usize> = (0..N_BLOCKS).collect();
        ids.sort_by(|&a, &b| {
            let da = (planted[a].0 - x).hypot(planted[a].1 - y);
            let db = (planted[b].0 - x).hypot(planted[b].1 - y);
            da.total_cmp(&db).then(a.cmp(&b))
        });
        ids.truncate(k);
        ids
    };
    let mut nets = Vec::with_capacity(N_NETS);
    for n in 0..N_NETS {
        let degree = match rng.gen_range(0..100) {
            0..=59 => 2,
            60..=84 => 3,
            85..=94 => 4,
            _ => rng.gen_range(5..=9),
        };
        let (anchor, terminal) = if n < N_TERMINALS {
            let t = &terminals[n];
            (nearest(t.x, t.y, 3)[rng.gen_range(0..3)], Some(n))
        } else {
            (rng.gen_range(0..N_BLOCKS), None)
        };
        let pool = nearest(planted[anchor].0, planted[anchor].1, 12);
        let mut members = vec![anchor];
        let want = degree - usize::from(terminal.is_some());
        let mut guard = 0;
        while members.len() < want.max(1) && guard < 100 {
            let b = if rng.gen_bool(0.9) { pool[rng.gen_range(0..pool.len())] } else { rng.gen_range(0..N_BLOCKS) };
            if !members.contains(&b) {
                members.push(b);
            }
            guard += 1;
        }
        nets.push(Net { block_endpoints: members, terminal_endpoints: terminal.into_iter().collect() });
    }
    Problem { blocks, terminals, nets, ..Default::default() }
}

/// Writes the stand-in to `dir` and parses it back.
pub fn synthetic_bundle(dir: &Path) -> (BookshelfBundle, Problem) {
    let bundle = BookshelfBundle::from_stem(dir.join("n100"));
    write_bookshelf(&synthetic_n100(), &bundle).expect("write stand-in");
    let p = parse_bookshelf(&bundle).expect("parse stand-in");
    (bundle, p)
}

/// The real benchmark when present, otherwise the stand-in.
pub fn n100(dir: &Path) -> (BookshelfBundle, Problem, bool) {
    if let Some(b) = real_n100() {
        let p = parse_bookshelf(&b).expect("parse real n100");
        return (b, p, true);
    }
    let (b, p) = synthetic_bundle(dir);
    (b, p, false)
}

pub fn tmp_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
