//! JSON documents and CSV tables.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use trapwell::spectrum::{EigenvalueRecord, Parity};
use trapwell::WellSpec;

#[derive(Debug, Clone, Serialize)]
pub struct EigenOut {
    pub n: usize,
    pub beta: f64,
    pub residual: f64,
    pub parity: Parity,
}

impl From<&EigenvalueRecord> for EigenOut {
    fn from(r: &EigenvalueRecord) -> Self {
        EigenOut { n: r.index_n, beta: r.beta, residual: r.residual, parity: r.parity }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Conversion {
    pub v1_ev: f64,
    pub v2_ev: f64,
    pub half_width_angstrom: f64,
    pub ramp_angstrom: f64,
    pub mass_kg: f64,
    /// Energy of beta = 1 in eV.
    pub energy_unit_ev: f64,
    pub v1: f64,
    pub v2: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub version: &'static str,
    pub command: &'static str,
    pub flags: BTreeMap<String, String>,
    /// Set when v1 < v2 was given and the well was reflected to v1 >= v2.
    pub mirrored: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conversion: Option<Conversion>,
}

#[derive(Debug, Serialize)]
pub struct Doc<D: Serialize> {
    pub well: WellSpec,
    pub eigenvalues: Vec<EigenOut>,
    pub diagnostics: D,
    pub meta: Meta,
}

pub fn write_json<D: Serialize>(doc: &Doc<D>, out: Option<&Path>) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(doc).map_err(io::Error::other)?;
    text.push('\n');
    match out {
        Some(p) => File::create(p)?.write_all(text.as_bytes()),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

/// Writes a header row and the given rows; floats use the shortest round-trip form, in exponent notation when tiny or huge.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()
}

pub fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}
