// SPDX-License-Identifier: Apache-2.0

//! GSRC Bookshelf `.blocks` / `.nets` / `.pl` reader and writer.
//!
//! Both `UCSC` and `UCLA` header spellings are accepted. Pin offsets on net
//! lines are ignored: wire-length is measured between block centers.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::{read_text, write_text};
use crate::model::{dims_from_ar, Block, Net, Problem, Terminal};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BookshelfBundle {
    pub blocks: PathBuf,
    pub nets: PathBuf,
    pub pl: PathBuf,
}

impl BookshelfBundle {
    pub fn new(blocks: impl Into<PathBuf>, nets: impl Into<PathBuf>, pl: impl Into<PathBuf>) -> Self {
        BookshelfBundle { blocks: blocks.into(), nets: nets.into(), pl: pl.into() }
    }

    /// `stem.blocks`, `stem.nets`, `stem.pl`.
    pub fn from_stem(stem: impl AsRef<Path>) -> Self {
        let stem = stem.as_ref();
        let with = |ext: &str| {
            let mut s = stem.as_os_str().to_owned();
            s.push(".");
            s.push(ext);
            PathBuf::from(s)
        };
        BookshelfBundle { blocks: with("blocks"), nets: with("nets"), pl: with("pl") }
    }
}

/// Non-comment, non-blank lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        }
        .trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn is_format_header(line: &str) -> bool {
    let first = line.split_whitespace().next().unwrap_or("");
    first == "UCSC" || first == "UCLA"
}

/// `Key : value` header lines.
fn header_field(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once(':')?;
    let k = k.trim();
    k.starts_with("Num").then(|| (k, v.trim()))
}

fn parse_count(file: &Path, line: usize, value: &str) -> Result<usize> {
    value
        .split_whitespace()
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::parse(file, line, format!("expected a count, got `{value}`")))
}

fn parse_real(file: &Path, line: usize, tok: Option<&str>, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::parse(file, line, format!("missing {what}")))?;
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(file, line, format!("invalid {what} `{tok}`"))),
    }
}

struct BlocksFile {
    blocks: Vec<Block>,
    terminals: Vec<String>,
}

fn parse_blocks_text(file: &Path, text: &str) -> Result<BlocksFile> {
    let mut blocks = Vec::new();
    let mut terminals = Vec::new();
    let (mut n_soft, mut n_hard, mut n_term) = (None, None, None);
    let (mut seen_soft, mut seen_hard) = (0usize, 0usize);
    for (ln, line) in content_lines(text) {
        if is_format_header(line) {
            continue;
        }
        if let Some((key, value)) = header_field(line) {
            let n = parse_count(file, ln, value)?;
            match key {
                "NumSoftRectangularBlocks" => n_soft = Some(n),
                "NumHardRectilinearBlocks" => n_hard = Some(n),
                "NumTerminals" => n_term = Some(n),
                _ => {}
            }
            continue;
        }
        let mut toks = line.split_whitespace();
        let name = toks.next().expect("line is non-empty");
        let kind = toks
            .next()
            .ok_or_else(|| Error::parse(file, ln, format!("block `{name}` has no type")))?;
        match kind {
            "softrectangular" => {
                let area = parse_real(file, ln, toks.next(), "area")?;
                let ar_min = parse_real(file, ln, toks.next(), "minimum aspect ratio")?;
                let ar_max = parse_real(file, ln, toks.next(), "maximum aspect ratio")?;
                if area <= 0.0 || ar_min <= 0.0 || ar_min > ar_max {
                    return Err(Error::parse(file, ln, format!("invalid soft block `{name}`")));
                }
                blocks.push(Block::soft(blocks.len(), name, area, ar_min, ar_max));
                seen_soft += 1;
            }
            "hardrectilinear" => {
                let rest: String = toks
                    .collect::<Vec<_>>()
                    .join(" ")
                    .chars()
                    .map(|c| if matches!(c, '(' | ')' | ',') { ' ' } else { c })
                    .collect();
                let nums: Vec<&str> = rest.split_whitespace().collect();
                let count = parse_count(file, ln, nums.first().copied().unwrap_or(""))?;
                if count < 4 || nums.len() != 1 + 2 * count {
                    return Err(Error::parse(file, ln, format!("malformed vertex list for `{name}`")));
                }
                let mut xs = Vec::with_capacity(count);
                let mut ys = Vec::with_capacity(count);
                for k in 0..count {
                    xs.push(parse_real(file, ln, Some(nums[1 + 2 * k]), "vertex x")?);
                    ys.push(parse_real(file, ln, Some(nums[2 + 2 * k]), "vertex y")?);
                }
                let span = |v: &[f64]| {
                    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                        - v.iter().cloned().fold(f64::INFINITY, f64::min)
                };
                let (w, h) = (span(&xs), span(&ys));
                if w <= 0.0 || h <= 0.0 {
                    return Err(Error::parse(file, ln, format!("degenerate block `{name}`")));
                }
                blocks.push(Block::hard(blocks.len(), name, w, h));
                seen_hard += 1;
            }
            "terminal" => terminals.push(name.to_string()),
            other => {
                return Err(Error::parse(file, ln, format!("unknown block type `{other}`")));
            }
        }
    }
    let check = |declared: Option<usize>, seen: usize, what: &str| match declared {
        Some(d) if d != seen => Err(Error::parse(
            file,
            0,
            format!("header declares {d} {what} but {seen} were listed"),
        )),
        _ => Ok(()),
    };
    check(n_soft, seen_soft, "soft blocks")?;
    check(n_hard, seen_hard, "hard blocks")?;
    check(n_term, terminals.len(), "terminals")?;
    Ok(BlocksFile { blocks, terminals })
}

fn parse_pl_text(file: &Path, text: &str, names: &HashMap<&str, Option<usize>>) -> Result<HashMap<usize, (f64, f64)>> {
    let mut at = HashMap::new();
    for (ln, line) in content_lines(text) {
        if is_format_header(line) {
            continue;
        }
        let mut toks = line.split_whitespace();
        let name = toks.next().expect("line is non-empty");
        let x = parse_real(file, ln, toks.next(), "x")?;
        let y = parse_real(file, ln, toks.next(), "y")?;
        match names.get(name) {
            Some(Some(t)) => {
                at.insert(*t, (x, y));
            }
            Some(None) => {}
            None => {
                return Err(Error::parse(file, ln, format!("unknown object `{name}`")));
            }
        }
    }
    Ok(at)
}

fn locate_terminals(pl: &Path, bf: &BlocksFile) -> Result<Vec<Terminal>> {
    let text = read_text(pl)?;
    let mut names: HashMap<&str, Option<usize>> =
        bf.blocks.iter().map(|b| (b.name.as_str(), None)).collect();
    for (i, t) in bf.terminals.iter().enumerate() {
        names.insert(t.as_str(), Some(i));
    }
    let at = parse_pl_text(pl, &text, &names)?;
    bf.terminals
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let &(x, y) = at.get(&i).ok_or_else(|| {
                Error::parse(pl, 0, format!("terminal `{name}` has no location"))
            })?;
            Ok(Terminal { name: name.clone(), x, y })
        })
        .collect()
}

/// Reads only the block list, plus terminal locations when `pl` is given.
pub fn parse_blocks(blocks: &Path, pl: Option<&Path>) -> Result<Problem> {
    let bf = parse_blocks_text(blocks, &read_text(blocks)?)?;
    let terminals = match pl {
        Some(pl) => locate_terminals(pl, &bf)?,
        None => Vec::new(),
    };
    Ok(Problem { blocks: bf.blocks, terminals, ..Default::default() })
}

fn parse_nets_text(
    file: &Path,
    text: &str,
    blocks: &HashMap<&str, usize>,
    terminals: &HashMap<&str, usize>,
) -> Result<Vec<Net>> {
    let mut nets: Vec<Net> = Vec::new();
    let (mut n_nets, mut n_pins) = (None, None);
    let mut pending = 0usize;
    let mut pins = 0usize;
    for (ln, line) in content_lines(text) {
        if is_format_header(line) {
            continue;
        }
        if let Some((key, value)) = line.split_once(':').map(|(k, v)| (k.trim(), v.trim())) {
            match key {
                "NumNets" => {
                    n_nets = Some(parse_count(file, ln, value)?);
                    continue;
                }
                "NumPins" => {
                    n_pins = Some(parse_count(file, ln, value)?);
                    continue;
                }
                "NetDegree" => {
                    if pending > 0 {
                        return Err(Error::parse(file, ln, format!("previous net is missing {pending} pins")));
                    }
                    pending = parse_count(file, ln, value)?;
                    nets.push(Net { block_endpoints: Vec::new(), terminal_endpoints: Vec::new() });
                    continue;
                }
                _ => {}
            }
        }
        let name = line.split_whitespace().next().expect("line is non-empty");
        if pending == 0 {
            return Err(Error::parse(file, ln, format!("pin `{name}` outside any net")));
        }
        let net = nets.last_mut().expect("pending implies an open net");
        if let Some(&b) = blocks.get(name) {
            net.block_endpoints.push(b);
        } else if let Some(&t) = terminals.get(name) {
            net.terminal_endpoints.push(t);
        } else {
            return Err(Error::UnknownEndpoint {
                file: file.to_path_buf(),
                net: nets.len() - 1,
                name: name.to_string(),
            });
        }
        pending -= 1;
        pins += 1;
    }
    if pending > 0 {
        return Err(Error::parse(file, 0, format!("last net is missing {pending} pins")));
    }
    if let Some(n) = n_nets.filter(|&n| n != nets.len()) {
        return Err(Error::parse(file, 0, format!("header declares {n} nets but {} were listed", nets.len())));
    }
    if let Some(n) = n_pins.filter(|&n| n != pins) {
        return Err(Error::parse(file, 0, format!("header declares {n} pins but {pins} were listed")));
    }
    Ok(nets)
}

/// Reads a full benchmark.
pub fn parse_bookshelf(bundle: &BookshelfBundle) -> Result<Problem> {
    let bf = parse_blocks_text(&bundle.blocks, &read_text(&bundle.blocks)?)?;
    let terminals = locate_terminals(&bundle.pl, &bf)?;
    let block_names: HashMap<&str, usize> =
        bf.blocks.iter().map(|b| (b.name.as_str(), b.id)).collect();
    let term_names: HashMap<&str, usize> =
        terminals.iter().enumerate().map(|(i, t)| (t.name.as_str(), i)).collect();
    let nets = parse_nets_text(&bundle.nets, &read_text(&bundle.nets)?, &block_names, &term_names)?;
    Ok(Problem { blocks: bf.blocks, terminals, nets, ..Default::default() })
}

/// Writes `problem` as a Bookshelf bundle. Hard blocks are emitted at their
/// current dimensions.
pub fn write_bookshelf(problem: &Problem, bundle: &BookshelfBundle) -> Result<()> {
    let n_soft = problem.blocks.iter().filter(|b| b.is_soft).count();
    let mut s = String::new();
    writeln!(s, "UCSC blocks 1.0").unwrap();
    writeln!(s).unwrap();
    writeln!(s, "NumSoftRectangularBlocks : {n_soft}").unwrap();
    writeln!(s, "NumHardRectilinearBlocks : {}", problem.blocks.len() - n_soft).unwrap();
    writeln!(s, "NumTerminals : {}", problem.terminals.len()).unwrap();
    writeln!(s).unwrap();
    for b in &problem.blocks {
        if b.is_soft {
            writeln!(s, "{} softrectangular {} {} {}", b.name, b.area, b.ar_min, b.ar_max).unwrap();
        } else {
            let (w, h) = dims_from_ar(b.area, b.aspect_ratio)?;
            writeln!(s, "{} hardrectilinear 4 (0, 0) (0, {h}) ({w}, {h}) ({w}, 0)", b.name).unwrap();
        }
    }
    writeln!(s).unwrap();
    for t in &problem.terminals {
        writeln!(s, "{} terminal", t.name).unwrap();
    }
    write_text(&bundle.blocks, &s)?;

    let mut s = String::new();
    let pins: usize = problem.nets.iter().map(|n| n.degree()).sum();
    writeln!(s, "UCLA nets 1.0").unwrap();
    writeln!(s).unwrap();
    writeln!(s, "NumNets : {}", problem.nets.len()).unwrap();
    writeln!(s, "NumPins : {pins}").unwrap();
    for n in &problem.nets {
        writeln!(s, "NetDegree : {}", n.degree()).unwrap();
        for &b in &n.block_endpoints {
            writeln!(s, "{} B", problem.blocks[b].name).unwrap();
        }
        for &t in &n.terminal_endpoints {
            writeln!(s, "{} B", problem.terminals[t].name).unwrap();
        }
    }
    write_text(&bundle.nets, &s)?;

    let mut s = String::new();
    writeln!(s, "UCSC pl 1.0").unwrap();
    writeln!(s).unwrap();
    for t in &problem.terminals {
        writeln!(s, "{} {} {}", t.name, t.x, t.y).unwrap();
    }
    write_text(&bundle.pl, &s)
}
