//! Command-line front end: configuration, single runs, dataset and mapping
//! generation, and the benchmark harness.

pub mod bench;
pub mod config;

use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::time::Instant;

use rdfizer::{load_mapping_file, run_system, EngineError, EngineOptions, RunReport};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::Config;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    /// Internal or unclassified failure.
    Other = 1,
    /// Bad flags or configuration.
    Usage = 2,
    /// Mapping file unreadable or invalid.
    Mapping = 3,
    /// A source failed; the output is partial.
    Source = 4,
    /// The output or report could not be written.
    Output = 5,
    Timeout = 6,
    /// Naive mode hit its materialization limit.
    Resource = 7,
}

impl ExitClass {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub class: ExitClass,
    pub message: String,
}

impl CliError {
    pub fn new(class: ExitClass, message: impl Into<String>) -> Self {
        Self {
            class,
            message: message.into(),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        let class = match e {
            EngineError::Source { .. } | EngineError::Classify(_) => ExitClass::Source,
            EngineError::Write(_) => ExitClass::Output,
            EngineError::Timeout(_) => ExitClass::Timeout,
            EngineError::Resource { .. } => ExitClass::Resource,
            EngineError::PlanMismatch { .. } => ExitClass::Other,
        };
        CliError::new(class, e.to_string())
    }
}

/// Peak resident set size of this process, from `VmHWM` in
/// `/proc/self/status`. `None` where that file does not exist.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// Report written by `rdfizer run --report`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CliReport {
    pub mapping: PathBuf,
    pub seed: Option<u64>,
    pub peak_rss_bytes: Option<u64>,
    #[serde(flatten)]
    pub run: RunReport,
}

/// Loads the configured mapping, runs it and writes output and report.
/// A run with failed maps still succeeds here; check `run.partial`.
pub fn execute_run(cfg: &Config) -> Result<CliReport, CliError> {
    let started = Instant::now();
    let mapping = cfg
        .mapping
        .clone()
        .ok_or_else(|| CliError::new(ExitClass::Usage, "no mapping given (use --mapping or a config file)"))?;
    let mut dis = load_mapping_file(&mapping).map_err(|e| CliError::new(ExitClass::Mapping, e.to_string()))?;
    if let Some(mode) = cfg.mode {
        dis.mode = mode;
    }
    dis.output_path = cfg.output.clone();
    let defaults = EngineOptions::default();
    let options = EngineOptions {
        reuse_pjtt: cfg.reuse_pjtt.unwrap_or(defaults.reuse_pjtt),
        batch_size: cfg.batch_size.unwrap_or(defaults.batch_size),
        deadline: cfg.timeout.map(|t| started + t),
        max_materialized: cfg.max_materialized,
    };
    let out_err = |e: io::Error| CliError::new(ExitClass::Output, format!("cannot write output: {e}"));
    let run = match &cfg.output {
        Some(path) => {
            let file = File::create(path).map_err(out_err)?;
            run_system(&dis, BufWriter::with_capacity(1 << 16, file), &options)?
        }
        None => run_system(&dis, io::stdout().lock(), &options)?,
    };
    let report = CliReport {
        mapping,
        seed: cfg.seed,
        peak_rss_bytes: peak_rss_bytes(),
        run,
    };
    if let Some(path) = &cfg.report {
        let text = serde_json::to_string_pretty(&report).expect("reports serialize");
        std::fs::write(path, text).map_err(|e| CliError::new(ExitClass::Output, format!("cannot write report: {e}")))?;
    }
    Ok(report)
}

/// One-line summary of a run for stderr.
pub fn summary(report: &CliReport) -> String {
    let r = &report.run;
    let emitted: u64 = r.predicates.values().map(|p| p.emitted).sum();
    let mut s = format!(
        "{} mode: {} generated, {} emitted, {:.3}s, counter laws {}",
        r.mode,
        r.totals.triples_generated,
        emitted,
        r.wall_time_secs,
        if r.laws_hold() { "hold" } else { "VIOLATED" }
    );
    if r.partial {
        s.push_str(&format!(", PARTIAL output ({} failed maps)", r.errors.len()));
    }
    s
}
