use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::trace::{StopReason, Trace, TraceRow};

pub const CSV_HEADER: [&str; 8] = ["k", "s_goldstein", "s_approx", "s_subgrad", "eps", "g_norm", "gap", "dist"];

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trace_csv<W: Write>(trace: &Trace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &trace.rows {
        w.write_record([
            r.k.to_string(),
            r.s_goldstein.to_string(),
            r.s_approx.to_string(),
            r.s_subgrad.to_string(),
            float(r.eps),
            float(r.g_norm),
            float(r.gap),
            float(r.dist),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_trace_csv(trace: &Trace, path: &Path) -> Result<()> {
    write_trace_csv(trace, File::create(path)?)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::invalid(format!("bad `{}` value on data row {line}", CSV_HEADER[i])))
}

/// Reads a trace back. `value` is taken to be `gap`, the algorithm and stop
/// reason are unknown.
pub fn read_trace_csv<R: Read>(input: R) -> Result<Trace> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::invalid(format!(
            "unexpected trace header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let gap = field(&rec, 6, line)?;
        rows.push(TraceRow {
            k: field(&rec, 0, line)?,
            s_goldstein: field(&rec, 1, line)?,
            s_approx: field(&rec, 2, line)?,
            s_subgrad: field(&rec, 3, line)?,
            eps: field(&rec, 4, line)?,
            g_norm: field(&rec, 5, line)?,
            gap,
            dist: field(&rec, 7, line)?,
            value: gap,
        });
    }
    Ok(Trace {
        algorithm: None,
        rows,
        stop: StopReason::Iterations,
        retries: 0,
        brackets: Vec::new(),
    })
}

pub fn load_trace_csv(path: &Path) -> Result<Trace> {
    read_trace_csv(File::open(path)?)
}
