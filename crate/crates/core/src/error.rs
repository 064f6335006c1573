// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use crate::model::Issue;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown block id {0}")]
    UnknownBlock(usize),

    #[error("problem failed validation: {}", format_issues(.0))]
    InvalidProblem(Vec<Issue>),

    #[error("layout is not compacted: block `{block}` {reason}")]
    NotCompact { block: String, reason: String },

    #[error("{}:{line}: {message}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: net {net} references unknown endpoint `{name}`", file.display())]
    UnknownEndpoint {
        file: PathBuf,
        net: usize,
        name: String,
    },

    #[error("conflicting constraints on block `{block}`: {reason}")]
    ConflictingConstraint { block: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(file: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn format_issues(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
