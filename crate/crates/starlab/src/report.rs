//! Report emission: the full report as JSON, or the energy and storage
//! traces as CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use starlab_core::sim::Report;

use crate::error::Error;

pub const JSON_FILE: &str = "report.json";
pub const ENERGY_CSV: &str = "report_energy.csv";
pub const STORAGE_CSV: &str = "report_storage.csv";
pub const ENERGY_HEADER: &str = "t_s,soc_wh,generation_w,load_w";
pub const STORAGE_HEADER: &str = "t_s,used_bits,produced_bits,downlinked_bits,dropped_bits";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::UnsupportedFormat(other.to_owned())),
        }
    }
}

pub fn to_json(r: &Report) -> String {
    let mut text = serde_json::to_string_pretty(r).expect("reports always serialize");
    text.push('\n');
    text
}

pub fn from_json(text: &str) -> Result<Report, Error> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// `v` rounded to 6 significant digits, printed without exponent.
pub fn sig6(v: f64) -> String {
    let rounded: f64 = format!("{v:.5e}").parse().expect("formatted floats parse");
    // Avoid "-0".
    format!("{}", rounded + 0.0)
}

pub fn energy_csv(r: &Report) -> String {
    let mut out = format!("{ENERGY_HEADER}\n");
    for s in &r.energy_trace {
        let _ = writeln!(out, "{},{},{},{}", sig6(s.t_s), sig6(s.soc_wh), sig6(s.generation_w), sig6(s.load_w));
    }
    out
}

pub fn storage_csv(r: &Report) -> String {
    let mut out = format!("{STORAGE_HEADER}\n");
    for s in &r.storage_trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            sig6(s.t_s),
            sig6(s.used_bits as f64),
            sig6(s.produced_bits as f64),
            sig6(s.downlinked_bits as f64),
            sig6(s.dropped_bits as f64)
        );
    }
    out
}

/// Document name and bytes for each file of the report in `format`.
pub fn emit_report(r: &Report, format: Format) -> Vec<(&'static str, String)> {
    match format {
        Format::Json => vec![(JSON_FILE, to_json(r))],
        Format::Csv => vec![(ENERGY_CSV, energy_csv(r)), (STORAGE_CSV, storage_csv(r))],
    }
}

/// Writes the report files into `dir`, creating it if needed.
pub fn write_report(r: &Report, format: Format, dir: &Path) -> Result<Vec<PathBuf>, Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    emit_report(r, format)
        .into_iter()
        .map(|(name, text)| {
            let path = dir.join(name);
            crate::write(&path, text.as_bytes())?;
            Ok(path)
        })
        .collect()
}
