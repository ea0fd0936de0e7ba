//! Reproducible experiment harness over `qstruct-core`: a flat config format,
//! a registry of named experiments, and deterministic JSON/CSV reports.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

use error::{CliError, Result};
use report::{Format, Report};
use std::path::{Path, PathBuf};

pub const OUTPUT_DIR_ENV: &str = "QSTRUCT_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "reports";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub format: Format,
    pub seed: Option<u64>,
    /// Takes precedence over the config's `output_dir`.
    pub output_dir: Option<PathBuf>,
    /// Appended to the output directory; keeps batch runs apart.
    pub subdir: Option<String>,
}

/// Parses, runs and writes one config. Nothing is written unless the
/// experiment completes.
pub fn run_config_file(path: &Path, opts: &RunOptions) -> Result<(Report, PathBuf)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let cfg = config::parse_config(&text)?;
    let mut report = experiments::run_experiment(&cfg, opts.seed)?;

    let mut dir = opts
        .output_dir
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    if let Some(sub) = &opts.subdir {
        dir.push(sub);
    }
    let name = format!("{}.{}", report.experiment, opts.format.extension());
    report.artifacts.push(name.clone());
    let written = report::write_atomic(&dir, &name, report::emit_report(&report, opts.format).as_bytes())?;
    Ok((report, written))
}
