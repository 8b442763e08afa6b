//! CSV traces and the long-format report table.

use std::io::{Read, Write};
use std::path::Path;

use dme_dc::trace::TraceRow;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const TRACE_HEADER: [&str; 7] =
    ["k", "objective", "infeasibility", "xi_norm", "gap_norm", "inner_iters", "time_ms"];
pub const LONG_HEADER: [&str; 4] = ["run_id", "k", "metric", "value"];
/// Trace columns that become report metrics, in output order.
pub const METRICS: [&str; 6] = ["objective", "infeasibility", "xi_norm", "gap_norm", "inner_iters", "time_ms"];

pub fn write_trace<W: Write>(out: W, rows: &[TraceRow]) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_file(path: &Path, rows: &[TraceRow]) -> CliResult<()> {
    let file =
        std::fs::File::create(path).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    write_trace(std::io::BufWriter::new(file), rows)
}

fn schema(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("schema mismatch in {path}: {msg}"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongRow {
    pub run_id: String,
    pub k: usize,
    pub metric: String,
    pub value: f64,
}

/// Contents of a file given to `report`.
pub enum ReportInput {
    Trace(Vec<TraceRow>),
    Long(Vec<LongRow>),
}

/// Reads a trace CSV or a long-format CSV, telling them apart by header.
pub fn read_report_input<R: Read>(input: R, label: &str) -> CliResult<ReportInput> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = rdr.headers().map_err(|e| schema(label, e))?.iter().map(str::to_owned).collect();
    if header == TRACE_HEADER {
        let mut rows: Vec<TraceRow> = Vec::new();
        for rec in rdr.deserialize() {
            let row: TraceRow = rec.map_err(|e| schema(label, e))?;
            if rows.last().is_some_and(|prev| prev.k >= row.k) {
                return Err(schema(label, format!("k not strictly increasing at k = {}", row.k)));
            }
            rows.push(row);
        }
        Ok(ReportInput::Trace(rows))
    } else if header == LONG_HEADER {
        let rows = rdr.deserialize().collect::<Result<Vec<LongRow>, _>>().map_err(|e| schema(label, e))?;
        if let Some(bad) = rows.iter().find(|r| !METRICS.contains(&r.metric.as_str())) {
            return Err(schema(label, format!("unknown metric `{}`", bad.metric)));
        }
        Ok(ReportInput::Long(rows))
    } else {
        Err(schema(label, format!("unrecognized header {header:?}")))
    }
}

/// Long-format rows of one trace, restricted to `metrics`.
pub fn melt(run_id: &str, rows: &[TraceRow], metrics: &[String]) -> Vec<LongRow> {
    let mut out = Vec::with_capacity(rows.len() * metrics.len());
    for r in rows {
        for m in metrics {
            let value = match m.as_str() {
                "objective" => r.objective,
                "infeasibility" => r.infeasibility,
                "xi_norm" => r.xi_norm,
                "gap_norm" => r.gap_norm,
                "inner_iters" => r.inner_iters as f64,
                _ => r.time_ms,
            };
            out.push(LongRow { run_id: run_id.to_owned(), k: r.k, metric: m.clone(), value });
        }
    }
    out
}

pub fn write_long<W: Write>(out: W, rows: &[LongRow]) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(LONG_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
