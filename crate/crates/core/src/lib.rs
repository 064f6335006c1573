// SPDX-License-Identifier: Apache-2.0

//! Constraints-aware simulated-annealing floorplanning on B*-trees.

pub mod annealer;
pub mod benchgen;
pub mod btree;
pub mod cli;
pub mod cost;
pub mod error;
pub mod io;
pub mod model;
pub mod parallel;

pub use error::{Error, Result};
