//! Report model and its two frozen encodings.
//!
//! JSON (`qstruct-report/1`), keys in this order, maps sorted by key:
//!
//! ```text
//! { "schema", "experiment", "seed", "config": {param: value},
//!   "metrics": {name: real}, "pass": {name: bool},
//!   "series": {name: [real]}, "artifacts": [file name] }
//! ```
//!
//! CSV: header `metric,value`, then one row per metric in key order.
//! Reals are written as `{:.16e}` (17 significant digits), which parses back
//! to the identical `f64`.

use crate::config::Value;
use crate::error::{CliError, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

pub const SCHEMA: &str = "qstruct-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub experiment: String,
    pub seed: u64,
    pub config: BTreeMap<String, Value>,
    pub metrics: BTreeMap<String, f64>,
    pub pass: BTreeMap<String, bool>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.pass.values().all(|&b| b)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.pass.iter().filter(|(_, &ok)| !ok).map(|(k, _)| k.as_str()).collect()
    }

    /// Non-finite metrics or series entries cannot be encoded and signal a
    /// broken computation.
    pub fn check_finite(&self) -> Result<()> {
        for (name, v) in &self.metrics {
            if !v.is_finite() {
                return Err(CliError::Numerical(format!("metric {name} is not finite ({v})")));
            }
        }
        for (name, vs) in &self.series {
            if let Some(v) = vs.iter().find(|v| !v.is_finite()) {
                return Err(CliError::Numerical(format!("series {name} contains a non-finite value ({v})")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"schema\": {},", quote(SCHEMA));
        let _ = writeln!(out, "  \"experiment\": {},", quote(&self.experiment));
        let _ = writeln!(out, "  \"seed\": {},", self.seed);
        object(&mut out, "config", self.config.iter().map(|(k, v)| (k, v.render())));
        object(&mut out, "metrics", self.metrics.iter().map(|(k, v)| (k, real(*v))));
        object(&mut out, "pass", self.pass.iter().map(|(k, v)| (k, v.to_string())));
        object(
            &mut out,
            "series",
            self.series.iter().map(|(k, v)| (k, format!("[{}]", v.iter().map(|x| real(*x)).collect::<Vec<_>>().join(", ")))),
        );
        let artifacts: Vec<String> = self.artifacts.iter().map(|a| quote(a)).collect();
        let _ = writeln!(out, "  \"artifacts\": [{}]", artifacts.join(", "));
        out.push_str("}\n");
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        for (k, v) in &self.metrics {
            let _ = writeln!(out, "{k},{}", real(*v));
        }
        out
    }
}

pub fn emit_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    }
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn object<'a>(out: &mut String, name: &str, entries: impl Iterator<Item = (&'a String, String)>) {
    let body: Vec<String> = entries.map(|(k, v)| format!("    {}: {v}", quote(k))).collect();
    if body.is_empty() {
        let _ = writeln!(out, "  \"{name}\": {{}},");
    } else {
        let _ = writeln!(out, "  \"{name}\": {{\n{}\n  }},", body.join(",\n"));
    }
}

/// Writes `bytes` to `dir/name` through a temporary file in the same
/// directory, so readers never observe a partial report.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    }
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(dir))?;
    tmp.write_all(bytes).map_err(io(tmp.path()))?;
    tmp.as_file().sync_all().map_err(io(tmp.path()))?;
    tmp.persist(&target).map_err(|e| io(&target)(e.error))?;
    Ok(target)
}
