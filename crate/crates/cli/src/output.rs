//! CSV tables, number formatting and JSON fit summaries.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};
use spiral_core::fit::FitOutcome;

use crate::Failure;

/// Shortest round-trip representation; exponent form outside [1e-4, 1e15).
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub struct Table {
    text: String,
}

impl Table {
    pub fn new(config_line: &str, header: &str) -> Self {
        Self {
            text: format!("{config_line}\n{header}\n"),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Write the table to `path`, or to `out` when no path is given.
pub fn emit_table(table: &Table, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, table.text()),
        None => out.write_all(table.text().as_bytes()).map_err(io_failure),
    }
}

/// Print the summary and optionally save it.
pub fn emit_summary(summary: &Value, path: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    if let Some(p) = path {
        write_file(p, &format!("{text}\n"))?;
    }
    writeln!(out, "{text}").map_err(io_failure)
}

pub fn io_failure(e: std::io::Error) -> Failure {
    Failure::Usage(format!("output error: {e}"))
}

pub fn fit_json(f: &FitOutcome) -> Value {
    match f {
        FitOutcome::Fitted(l) => json!({
            "outcome": "fitted",
            "slope": l.slope,
            "intercept": l.intercept,
            "r2": l.r2,
            "points_used": l.points_used,
        }),
        FitOutcome::Exact => json!({
            "outcome": "exact",
            "slope": null,
            "intercept": null,
            "r2": null,
            "points_used": 0,
        }),
        FitOutcome::Insufficient { points_used } => json!({
            "outcome": "insufficient",
            "slope": null,
            "intercept": null,
            "r2": null,
            "points_used": points_used,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(20.0), "20");
        assert_eq!(num(1.25e-9), "1.25e-9");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(f64::NAN), "NaN");
        assert_eq!(num(-3e20), "-3e20");
    }
}
