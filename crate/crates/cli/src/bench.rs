//! Benchmark harness. Every grid cell gets a generated dataset and
//! mapping; each (cell, mode) pair runs `rdfizer run` as a child process
//! under a timeout, and results go to JSON and CSV reports.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitStatus, Stdio};
use std::time::{Duration, Instant};

use rdfizer::mapping::OperatorKind;
use rdfizer::testbed::{generate_dataset, generate_mappings, TestbedError, TestbedSpec};
use rdfizer::Mode;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::CliReport;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Testbed(#[from] TestbedError),
    #[error("benchmark I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write CSV report: {0}")]
    Csv(#[from] csv::Error),
    #[error("repetitions must be at least 1")]
    NoRepetitions,
}

#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub cells: Vec<TestbedSpec>,
    pub modes: Vec<Mode>,
    pub repetitions: u32,
    pub timeout: Duration,
    pub work_dir: PathBuf,
    /// The `rdfizer` binary to launch.
    pub exe: PathBuf,
}

impl BenchPlan {
    /// Full cross product of the grid axes.
    #[allow(clippy::too_many_arguments)]
    pub fn grid(
        rows: &[u64],
        rates: &[f64],
        kinds: &[OperatorKind],
        pom_counts: &[u8],
        seed: u64,
        modes: Vec<Mode>,
        repetitions: u32,
        timeout: Duration,
        work_dir: PathBuf,
        exe: PathBuf,
    ) -> Self {
        let mut cells = Vec::new();
        for &r in rows {
            for &d in rates {
                for &k in kinds {
                    for &p in pom_counts {
                        cells.push(TestbedSpec::new(r, d, k, p, seed));
                    }
                }
            }
        }
        Self {
            cells,
            modes,
            repetitions,
            timeout,
            work_dir,
            exe,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CellStatus {
    Ok,
    Timeout,
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellResult {
    pub spec: TestbedSpec,
    pub mode: Mode,
    pub status: CellStatus,
    pub message: Option<String>,
    pub repetitions: u32,
    pub mean_wall_secs: Option<f64>,
    pub mean_process_secs: Option<f64>,
    pub peak_rss_bytes: Option<u64>,
    pub triples_generated: Option<u64>,
    pub triples_emitted: Option<u64>,
    pub pairwise_comparisons: Option<u64>,
    pub sort_comparisons: Option<u64>,
    pub predicted_ops: Option<u64>,
    pub measured_ops: Option<u64>,
    pub laws_hold: Option<bool>,
    /// Whether the naive triple set equals the optimized one (naive rows
    /// of cells where both modes completed).
    pub matches_optimized: Option<bool>,
    /// Last completed run's full report.
    pub report: Option<CliReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub repetitions: u32,
    pub timeout_secs: f64,
    pub results: Vec<CellResult>,
}

pub enum ChildOutcome {
    Exited { status: ExitStatus, elapsed: Duration },
    TimedOut { elapsed: Duration },
}

/// Runs `cmd` to completion or kills it once `timeout` has passed.
pub fn run_with_timeout(cmd: &mut Command, timeout: Duration) -> std::io::Result<ChildOutcome> {
    let started = Instant::now();
    let mut child = cmd.stdin(Stdio::null()).spawn()?;
    let mut pause = Duration::from_millis(1);
    loop {
        if let Some(status) = child.try_wait()? {
            return Ok(ChildOutcome::Exited {
                status,
                elapsed: started.elapsed(),
            });
        }
        if started.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Ok(ChildOutcome::TimedOut {
                elapsed: started.elapsed(),
            });
        }
        std::thread::sleep(pause);
        pause = (pause * 2).min(Duration::from_millis(50));
    }
}

/// Directory name for one cell.
pub fn cell_name(spec: &TestbedSpec) -> String {
    format!(
        "{}rows_{}dup_{}_{}pom",
        spec.rows,
        (spec.duplicate_rate * 100.0).round() as u32,
        spec.pom_kind,
        spec.pom_count
    )
}

/// Writes a cell's dataset and `mapping.ttl` into `dir`.
pub fn prepare_cell(spec: &TestbedSpec, dir: &Path) -> Result<PathBuf, BenchError> {
    std::fs::create_dir_all(dir)?;
    let ds = generate_dataset(spec, dir)?;
    for w in ds.warnings {
        eprintln!("warning: {w}");
    }
    let mapping = dir.join("mapping.ttl");
    std::fs::write(&mapping, generate_mappings(spec.pom_kind, spec.pom_count)?)?;
    Ok(mapping)
}

fn line_set(path: &Path) -> std::io::Result<BTreeSet<String>> {
    BufReader::new(File::open(path)?).lines().collect()
}

fn run_cell(plan: &BenchPlan, spec: &TestbedSpec, mode: Mode, dir: &Path, mapping: &Path) -> CellResult {
    let output = dir.join(format!("out-{mode}.nt"));
    let report_path = dir.join(format!("report-{mode}.json"));
    let mut result = CellResult {
        spec: spec.clone(),
        mode,
        status: CellStatus::Ok,
        message: None,
        repetitions: 0,
        mean_wall_secs: None,
        mean_process_secs: None,
        peak_rss_bytes: None,
        triples_generated: None,
        triples_emitted: None,
        pairwise_comparisons: None,
        sort_comparisons: None,
        predicted_ops: None,
        measured_ops: None,
        laws_hold: None,
        matches_optimized: None,
        report: None,
    };
    let (mut wall, mut process) = (0.0, 0.0);
    for _ in 0..plan.repetitions {
        let mut cmd = Command::new(&plan.exe);
        cmd.arg("run")
            .arg("--mapping")
            .arg(mapping)
            .arg("--output")
            .arg(&output)
            .arg("--mode")
            .arg(mode.to_string())
            .arg("--report")
            .arg(&report_path)
            .arg("--seed")
            .arg(spec.seed.to_string())
            .stdout(Stdio::null())
            .stderr(Stdio::null());
        match run_with_timeout(&mut cmd, plan.timeout) {
            Err(e) => {
                result.status = CellStatus::Failed;
                result.message = Some(format!("cannot launch {}: {e}", plan.exe.display()));
                return result;
            }
            Ok(ChildOutcome::TimedOut { elapsed }) => {
                result.status = CellStatus::Timeout;
                result.message = Some(format!("timed out after {:.1}s", elapsed.as_secs_f64()));
                return result;
            }
            Ok(ChildOutcome::Exited { status, elapsed }) => {
                if !status.success() {
                    result.status = CellStatus::Failed;
                    result.message = Some(format!("engine exited with {status}"));
                    return result;
                }
                let report: CliReport = match std::fs::read_to_string(&report_path)
                    .map_err(|e| e.to_string())
                    .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
                {
                    Ok(r) => r,
                    Err(e) => {
                        result.status = CellStatus::Failed;
                        result.message = Some(format!("unreadable report: {e}"));
                        return result;
                    }
                };
                result.repetitions += 1;
                wall += report.run.wall_time_secs;
                process += elapsed.as_secs_f64();
                result.peak_rss_bytes = result.peak_rss_bytes.max(report.peak_rss_bytes);
                result.report = Some(report);
            }
        }
    }
    let n = f64::from(result.repetitions);
    result.mean_wall_secs = Some(wall / n);
    result.mean_process_secs = Some(process / n);
    if let Some(r) = &result.report {
        let run = &r.run;
        result.triples_generated = Some(run.totals.triples_generated);
        result.triples_emitted = Some(run.predicates.values().map(|p| p.emitted).sum());
        result.pairwise_comparisons = Some(run.totals.pairwise_comparisons);
        result.sort_comparisons = Some(run.totals.sort_comparisons);
        result.predicted_ops = Some(run.operators.iter().map(|o| o.predicted.exact).sum());
        result.measured_ops = Some(run.operators.iter().map(|o| o.measured).sum());
        result.laws_hold = Some(run.laws_hold());
    }
    result
}

/// Runs every cell in every mode. Timeouts and engine failures are cell
/// results; only harness-level I/O errors abort.
pub fn run_benchmark(plan: &BenchPlan) -> Result<BenchReport, BenchError> {
    if plan.repetitions == 0 {
        return Err(BenchError::NoRepetitions);
    }
    let mut results = Vec::new();
    for spec in &plan.cells {
        let dir = plan.work_dir.join(cell_name(spec));
        let mapping = prepare_cell(spec, &dir)?;
        let mut optimized_ok = false;
        for &mode in &plan.modes {
            let mut r = run_cell(plan, spec, mode, &dir, &mapping);
            if r.status == CellStatus::Ok {
                match mode {
                    Mode::Optimized => optimized_ok = true,
                    Mode::Naive if optimized_ok => {
                        let a = line_set(&dir.join(format!("out-{}.nt", Mode::Optimized)))?;
                        let b = line_set(&dir.join(format!("out-{}.nt", Mode::Naive)))?;
                        r.matches_optimized = Some(a == b);
                    }
                    Mode::Naive => {}
                }
            }
            eprintln!(
                "{} {}: {:?}{}",
                cell_name(spec),
                mode,
                r.status,
                r.mean_wall_secs.map(|s| format!(" {s:.3}s")).unwrap_or_default()
            );
            results.push(r);
        }
    }
    Ok(BenchReport {
        repetitions: plan.repetitions,
        timeout_secs: plan.timeout.as_secs_f64(),
        results,
    })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes `bench.json` and `bench.csv` into `dir`.
pub fn write_reports(report: &BenchReport, dir: &Path) -> Result<(PathBuf, PathBuf), BenchError> {
    std::fs::create_dir_all(dir)?;
    let json = dir.join("bench.json");
    std::fs::write(&json, serde_json::to_string_pretty(report).expect("reports serialize"))?;
    let csv_path = dir.join("bench.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record([
        "rows",
        "duplicate_rate",
        "kind",
        "poms",
        "seed",
        "mode",
        "status",
        "repetitions",
        "mean_wall_secs",
        "mean_process_secs",
        "peak_rss_bytes",
        "generated",
        "emitted",
        "pairwise_comparisons",
        "sort_comparisons",
        "predicted_ops",
        "measured_ops",
        "laws_hold",
        "matches_optimized",
    ])?;
    for r in &report.results {
        let status = match r.status {
            CellStatus::Ok => "OK",
            CellStatus::Timeout => "TIMEOUT",
            CellStatus::Failed => "FAILED",
        };
        w.write_record([
            r.spec.rows.to_string(),
            r.spec.duplicate_rate.to_string(),
            r.spec.pom_kind.to_string(),
            r.spec.pom_count.to_string(),
            r.spec.seed.to_string(),
            r.mode.to_string(),
            status.to_owned(),
            r.repetitions.to_string(),
            opt(r.mean_wall_secs),
            opt(r.mean_process_secs),
            opt(r.peak_rss_bytes),
            opt(r.triples_generated),
            opt(r.triples_emitted),
            opt(r.pairwise_comparisons),
            opt(r.sort_comparisons),
            opt(r.predicted_ops),
            opt(r.measured_ops),
            opt(r.laws_hold),
            opt(r.matches_optimized),
        ])?;
    }
    w.flush()?;
    Ok((json, csv_path))
}
