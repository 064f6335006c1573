// SPDX-License-Identifier: Apache-2.0

//! Constraints JSON, keyed by block name.
//!
//! ```json
//! {
//!   "boundary": {"sb5": "left", "sb9": "tr"},
//!   "groups": [["sb1", "sb2", "sb3"]],
//!   "preplaced": {"sb7": {"x": 10.0, "y": 4.0, "w": 3.0, "h": 2.0}},
//!   "instance_groups": [["sb11", "sb12"]],
//!   "outline": {"w": 100.0, "h": 100.0}
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_text, write_text};
use crate::model::{Boundary, ConstraintSet, Issue, Outline, Problem, Rect};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    boundary: BTreeMap<String, String>,
    #[serde(default)]
    groups: Vec<Vec<String>>,
    #[serde(default)]
    preplaced: BTreeMap<String, Rect>,
    #[serde(default)]
    instance_groups: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    outline: Option<Outline>,
}

/// Parsed contents of a constraints file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintsFile {
    pub constraints: ConstraintSet,
    pub outline: Option<Outline>,
}

/// Parses a constraints document against the block names of `problem`.
pub fn read_constraints_str(file: &Path, text: &str, problem: &Problem) -> Result<ConstraintsFile> {
    let doc: Document = serde_json::from_str(text)
        .map_err(|e| Error::parse(file, e.line(), e.to_string()))?;
    let names = problem.block_index();
    let id = |name: &str| {
        names.get(name).copied().ok_or_else(|| {
            Error::parse(file, 0, format!("constraint names unknown block `{name}`"))
        })
    };
    let mut cs = ConstraintSet::default();
    for (name, kind) in &doc.boundary {
        let kind: Boundary = kind
            .parse()
            .map_err(|_| Error::parse(file, 0, format!("block `{name}`: unknown boundary `{kind}`")))?;
        cs.boundary.insert(id(name)?, kind);
    }
    for g in &doc.groups {
        cs.groups.push(g.iter().map(|n| id(n)).collect::<Result<_>>()?);
    }
    for (name, rect) in &doc.preplaced {
        cs.preplaced.insert(id(name)?, *rect);
    }
    for g in &doc.instance_groups {
        cs.instance_groups.push(g.iter().map(|n| id(n)).collect::<Result<_>>()?);
    }
    if let Some(issue) = cs.check_conflicts().into_iter().next() {
        return Err(match issue {
            Issue::ConflictingConstraint { block, reason } => Error::ConflictingConstraint {
                block: problem.blocks[block].name.clone(),
                reason: reason.to_string(),
            },
            other => Error::parse(file, 0, other.to_string()),
        });
    }
    Ok(ConstraintsFile { constraints: cs, outline: doc.outline })
}

pub fn parse_constraints(path: &Path, problem: &Problem) -> Result<ConstraintsFile> {
    read_constraints_str(path, &read_text(path)?, problem)
}

/// Serializes with stable key order.
pub fn constraints_to_string(file: &ConstraintsFile, problem: &Problem) -> String {
    let name = |b: usize| problem.blocks[b].name.clone();
    let cs = &file.constraints;
    let doc = Document {
        boundary: cs.boundary.iter().map(|(&b, k)| (name(b), k.to_string())).collect(),
        groups: cs.groups.iter().map(|g| g.iter().map(|&b| name(b)).collect()).collect(),
        preplaced: cs.preplaced.iter().map(|(&b, r)| (name(b), *r)).collect(),
        instance_groups: cs
            .instance_groups
            .iter()
            .map(|g| g.iter().map(|&b| name(b)).collect())
            .collect(),
        outline: file.outline,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("document is serializable");
    s.push('\n');
    s
}

pub fn write_constraints(file: &ConstraintsFile, problem: &Problem, path: &Path) -> Result<()> {
    write_text(path, &constraints_to_string(file, problem))
}
