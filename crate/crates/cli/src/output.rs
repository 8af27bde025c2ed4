//! CSV and metadata artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::json;
use starnoma_core::{SeriesResult, SweepSpec};

pub const CSV_HEADER: [&str; 8] = [
    "axis_name",
    "axis_value",
    "metric_name",
    "mc_mean",
    "mc_stderr",
    "closed_form",
    "trials",
    "seed",
];

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(out: W, spec: &SweepSpec, rows: &[SeriesResult]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let trials = spec.trials.to_string();
    let seed = spec.seed.to_string();
    for row in rows {
        w.write_record([
            spec.axis.name(),
            &format_float(row.axis_value),
            row.metric.name(),
            &format_float(row.mc_mean),
            &format_float(row.mc_stderr),
            &row.closed_form.map(format_float).unwrap_or_default(),
            &trials,
            &seed,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn metadata(spec: &SweepSpec) -> serde_json::Value {
    json!({
        "artifact": spec.name,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": spec.seed,
        "trials": spec.trials,
        "spec": spec,
    })
}

pub fn write_series(dir: &Path, spec: &SweepSpec, rows: &[SeriesResult]) -> std::io::Result<()> {
    let csv_file = File::create(dir.join(format!("{}.csv", spec.name)))?;
    write_csv(BufWriter::new(csv_file), spec, rows).map_err(std::io::Error::other)?;
    let mut meta = BufWriter::new(File::create(dir.join(format!("{}.meta", spec.name)))?);
    serde_json::to_writer_pretty(&mut meta, &metadata(spec))?;
    meta.write_all(b"\n")?;
    meta.flush()
}

/// Largest `|mc − closed| / |closed|` over rows that have a closed form.
pub fn max_relative_deviation(rows: &[SeriesResult]) -> Option<f64> {
    rows.iter()
        .filter_map(SeriesResult::relative_deviation)
        .fold(None, |acc, d| Some(acc.map_or(d, |a: f64| a.max(d))))
}
