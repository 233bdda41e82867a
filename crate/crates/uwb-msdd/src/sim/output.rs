//! CSV and JSON result emission.
//!
//! CSV schemas are fixed and documented in the README:
//!
//! * BER records: `detector,M,L,Q,ebn0_db,bits,errors,ber,ci95,ops,wall_s`
//! * relative metrics: `detector,M,L,ebn0_db,rel_complexity_pct,rel_ber_pct`
//! * complexity: `detector,M,L,formula_units,measured_units_per_stage,`
//!   `measured_trace_evals_per_stage,states_binary,states_tuple`
//!
//! The JSON run summary echoes the configuration, the build description, and
//! the per-point records.

use crate::error::Error;
use crate::sim::complexity::{ComplexityReport, RelativeRecord};
use crate::sim::config::SimConfig;
use crate::sim::sweep::BerRecord;

use serde::Serialize;
use std::io::Write;
use std::process::Command;

pub fn write_ber_csv<W: Write>(out: &mut W, records: &[BerRecord]) -> Result<(), Error> {
    writeln!(out, "detector,M,L,Q,ebn0_db,bits,errors,ber,ci95,ops,wall_s")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:.9e},{:.9e},{},{:.3}",
            r.detector, r.m, r.l, r.q, r.ebn0_db, r.bits, r.errors, r.ber, r.ci95, r.ops, r.wall_s
        )?;
    }
    Ok(())
}

pub fn write_relative_csv<W: Write>(out: &mut W, records: &[RelativeRecord]) -> Result<(), Error> {
    writeln!(out, "detector,M,L,ebn0_db,rel_complexity_pct,rel_ber_pct")?;
    for r in records {
        let ber = r
            .rel_ber_pct
            .map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "undefined".to_string());
        writeln!(
            out,
            "{},{},{},{},{:.6},{}",
            r.detector, r.m, r.l, r.ebn0_db, r.rel_complexity_pct, ber
        )?;
    }
    Ok(())
}

pub fn write_complexity_csv<W: Write>(out: &mut W, report: &ComplexityReport) -> Result<(), Error> {
    writeln!(
        out,
        "detector,M,L,formula_units,measured_units_per_stage,measured_trace_evals_per_stage,states_binary,states_tuple"
    )?;
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{:.3},{:.3},{},{}",
            r.detector,
            r.m,
            r.l,
            r.formula_units,
            r.measured_units_per_stage,
            r.measured_trace_evals_per_stage,
            r.states_binary,
            r.states_tuple
        )?;
    }
    Ok(())
}

/// Build description for the run summary (`git describe`, if available).
pub fn build_description() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".to_string())
}

#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    config: &'a SimConfig,
    build: String,
    records: &'a [BerRecord],
}

pub fn write_json_summary<W: Write>(
    out: &mut W,
    cfg: &SimConfig,
    records: &[BerRecord],
) -> Result<(), Error> {
    let summary = RunSummary { config: cfg, build: build_description(), records };
    serde_json::to_writer_pretty(&mut *out, &summary)
        .map_err(|e| Error::invalid_input(format!("json serialization: {e}")))?;
    writeln!(out)?;
    Ok(())
}
