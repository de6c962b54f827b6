//! The metrics CSV: one row per record, fixed header, LF line endings and
//! shortest round-trip float formatting.

use std::io::{Read, Write};
use std::path::Path;

use superpilot::simharness::MetricsRecord;

use crate::CliError;

pub const HEADER: [&str; 9] =
    ["experiment", "method", "sweep_var", "sweep_value", "user", "metric", "value", "trials", "analytic_value"];

pub fn write_csv<W: Write>(records: &[MetricsRecord], out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.experiment.to_string(),
            r.method.to_string(),
            r.sweep_var.clone(),
            r.sweep_value.to_string(),
            r.user.to_string(),
            r.metric.to_string(),
            r.value.to_string(),
            r.trials.to_string(),
            r.analytic_value.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[MetricsRecord], path: &Path) -> Result<(), CliError> {
    let file = std::fs::File::create(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    write_csv(records, std::io::BufWriter::new(file))
        .map_err(|e| CliError::Io { path: path.to_path_buf(), source: std::io::Error::other(e.to_string()) })
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<MetricsRecord>, CliError> {
    let mut rd = csv::ReaderBuilder::new().from_reader(input);
    let headers = rd.headers().map_err(|e| CliError::Input(e.to_string()))?.clone();
    if headers.iter().ne(HEADER) {
        return Err(CliError::Input(format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let bad = |line: u64, what: &str, e: String| CliError::Input(format!("line {line}: bad {what}: {e}"));
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row.map_err(|e| CliError::Input(e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let f = |i: usize| row.get(i).unwrap_or("");
        let num = |i: usize| f(i).parse::<f64>().map_err(|e| bad(line, HEADER[i], e.to_string()));
        out.push(MetricsRecord {
            experiment: f(0).parse().map_err(|e: superpilot::Error| bad(line, "experiment", e.to_string()))?,
            method: f(1).parse().map_err(|e: superpilot::Error| bad(line, "method", e.to_string()))?,
            sweep_var: f(2).to_string(),
            sweep_value: num(3)?,
            user: f(4).parse().map_err(|e: superpilot::Error| bad(line, "user", e.to_string()))?,
            metric: f(5).parse().map_err(|e: superpilot::Error| bad(line, "metric", e.to_string()))?,
            value: num(6)?,
            trials: f(7).parse().map_err(|e: std::num::ParseIntError| bad(line, "trials", e.to_string()))?,
            analytic_value: if f(8).is_empty() { None } else { Some(num(8)?) },
        });
    }
    Ok(out)
}
