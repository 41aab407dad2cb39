//! File formats and command-line front end for the `starlab-core` mission
//! model: scenario documents, schedule files, simulation reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod document;
mod error;
pub mod plan_file;
pub mod report;

use std::path::Path;

pub use document::{emit_scenario, load_scenario, load_scenario_file, parse_scenario};
pub use error::Error;

pub(crate) fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write(path: &Path, contents: &[u8]) -> Result<(), Error> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
