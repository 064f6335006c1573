// SPDX-License-Identifier: Apache-2.0

//! Newline-delimited JSON solution records. Files from several hosts can be
//! concatenated and read back as one list.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::annealer::SolutionRecord;
use crate::error::{Error, Result};
use crate::io::{read_text, write_text};

pub fn records_to_string(records: &[SolutionRecord]) -> String {
    let mut s = String::new();
    for r in records {
        let line = serde_json::to_string(r).expect("records hold finite numbers");
        writeln!(s, "{line}").unwrap();
    }
    s
}

pub fn write_records(records: &[SolutionRecord], path: &Path) -> Result<()> {
    write_text(path, &records_to_string(records))
}

pub fn records_from_str(file: &Path, text: &str) -> Result<Vec<SolutionRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(file, i + 1, e.to_string())))
        .collect()
}

pub fn read_records(path: &Path) -> Result<Vec<SolutionRecord>> {
    records_from_str(path, &read_text(path)?)
}

/// Reads and concatenates several record files, in order.
pub fn read_records_many<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<SolutionRecord>> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(read_records(p.as_ref())?);
    }
    Ok(all)
}

/// Path-tagged variant of [`read_records_many`] for callers that report sources.
pub fn read_records_tagged<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<(PathBuf, SolutionRecord)>> {
    let mut all = Vec::new();
    for p in paths {
        let p = p.as_ref();
        all.extend(read_records(p)?.into_iter().map(|r| (p.to_path_buf(), r)));
    }
    Ok(all)
}
