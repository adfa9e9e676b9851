use std::path::Path;

use serde::Serialize;

use solispec::certificate::CertificateRecord;
use solispec::ground_state::{FarFieldFit, GroundState, GroundStateSummary};
use solispec::jost::Expansion;
use solispec::nonlinearity::Nonlinearity;

use crate::config::RunConfig;
use crate::CliError;

/// Bumped whenever a JSON field or CSV column changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_hash: String,
    pub config: &'a RunConfig,
    pub result: &'a T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(command: &'static str, config: &'a RunConfig, result: &'a T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: "solispec",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_hash: config.hash(),
            config,
            result,
        }
    }
}

#[derive(Serialize)]
pub struct GroundReport {
    pub summary: GroundStateSummary,
    pub ode_residual: f64,
    pub first_integral_residual: f64,
    /// Fit of `Q` on `[8, 14]/√μ`.
    pub far_field: FarFieldFit,
    /// Fit of `Q'` on the same window.
    pub far_field_derivative: FarFieldFit,
}

impl GroundReport {
    pub fn new(gs: &GroundState, nl: &Nonlinearity) -> Result<Self, CliError> {
        let s = gs.mu.sqrt();
        let window = (8.0 / s, 14.0 / s);
        Ok(Self {
            summary: gs.summary(),
            ode_residual: gs.ode_residual(nl)?,
            first_integral_residual: gs.first_integral_residual(nl)?,
            far_field: gs.far_field_fit(window)?,
            far_field_derivative: gs.far_field_fit_derivative(window)?,
        })
    }
}

#[derive(Serialize)]
pub struct JostReport {
    pub lambda: f64,
    pub x_asym: f64,
    pub ode_residual: f64,
    pub plus_infinity: Expansion,
    pub minus_infinity: Expansion,
}

#[derive(Serialize)]
pub struct InvertReport {
    pub lambda: f64,
    pub x0: f64,
    pub x1: f64,
    pub r_u: f64,
    pub r_v: f64,
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

/// Writes to stdout, ignoring a closed pipe.
pub fn print(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

/// Shortest round-trip form, in exponent notation away from order one.
fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("cannot write {}: {e}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), CliError> {
    let mut text = to_json(v);
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn write_csv<const N: usize>(
    path: &Path,
    header: &[&str; N],
    rows: impl Iterator<Item = [f64; N]>,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_f64(*v)))
            .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

#[derive(Serialize)]
struct ScanRow<'a> {
    lambda: f64,
    v0: f64,
    v0p: f64,
    mismatch: f64,
    verdict: &'a str,
    parity_min: f64,
    u_positive: bool,
    v_signed: bool,
    threshold: bool,
}

pub fn write_scan_csv(path: &Path, records: &[CertificateRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for r in records {
        let verdict = serde_json::to_value(r.verdict).expect("verdict serializes");
        w.serialize(ScanRow {
            lambda: r.lambda,
            v0: r.v0,
            v0p: r.v0p,
            mismatch: r.mismatch,
            verdict: verdict.as_str().unwrap_or_default(),
            parity_min: r.parity_min,
            u_positive: r.u_positive,
            v_signed: r.v_signed,
            threshold: r.threshold,
        })
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}
