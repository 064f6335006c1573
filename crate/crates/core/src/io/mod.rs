// SPDX-License-Identifier: Apache-2.0

//! Benchmark, constraint, record and SVG file formats.

pub mod bookshelf;
pub mod constraints;
pub mod records;
pub mod svg;

pub use bookshelf::{parse_blocks, parse_bookshelf, write_bookshelf, BookshelfBundle};
pub use constraints::{
    constraints_to_string, parse_constraints, read_constraints_str, write_constraints, ConstraintsFile,
};
pub use records::{read_records, read_records_many, records_to_string, write_records};
pub use svg::{pareto_svg, render_svg, svg_string};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
