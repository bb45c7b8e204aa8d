#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use rdfizer::mapping::OperatorKind;
use rdfizer::testbed::{generate_dataset, generate_mappings, TestbedSpec};
use rdfizer::Mode;
use rdfizer_cli::bench::{run_benchmark, write_reports, BenchPlan};
use rdfizer_cli::config::parse_timeout;
use rdfizer_cli::{execute_run, summary, CliError, Config, ExitClass};

/// RML mapping engine with duplicate elimination and index joins.
///
/// Exit codes: 0 success, 1 internal error, 2 usage or configuration
/// error, 3 invalid mapping, 4 source failure (partial output),
/// 5 output write failure, 6 timeout, 7 naive materialization limit.
#[derive(Parser)]
#[command(name = "rdfizer", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a mapping and write N-Triples.
    Run(RunArgs),
    /// Generate a synthetic dataset (and optionally its mapping).
    GenData(GenDataArgs),
    /// Print or write a generated mapping document.
    GenMapping(GenMappingArgs),
    /// Run the benchmark grid and write JSON and CSV reports.
    Bench(BenchArgs),
}

#[derive(Args)]
struct RunArgs {
    /// key = value configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Output file (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// JSON run report path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Recorded in the report.
    #[arg(long)]
    seed: Option<u64>,
    /// Seconds before the run aborts.
    #[arg(long, value_parser = parse_timeout)]
    timeout: Option<Duration>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Build a separate join index for every referencing map.
    #[arg(long)]
    no_pjtt_reuse: bool,
    /// Naive mode: maximum triples and parent rows held in memory.
    #[arg(long)]
    max_materialized: Option<u64>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn parse_kind(s: &str) -> Result<OperatorKind, String> {
    s.parse()
}

#[derive(Args)]
struct SpecArgs {
    #[arg(long, default_value_t = 10_000)]
    rows: u64,
    #[arg(long, default_value_t = 0.25)]
    dup_rate: f64,
    #[arg(long, default_value_t = 20)]
    repeat: u64,
    #[arg(long, value_parser = parse_kind, default_value = "SOM")]
    kind: OperatorKind,
    #[arg(long, default_value_t = 1)]
    poms: u8,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// OJM: parent rows (defaults to --rows).
    #[arg(long)]
    parent_rows: Option<u64>,
    /// OJM: fraction of parent tuples whose key matches a child key.
    #[arg(long, default_value_t = 1.0)]
    match_rate: f64,
    /// OJM: child tuples sharing one join key.
    #[arg(long, default_value_t = 2)]
    fanout: u64,
}

impl SpecArgs {
    fn spec(&self) -> TestbedSpec {
        TestbedSpec {
            rows: self.rows,
            duplicate_rate: self.dup_rate,
            repeat_factor: self.repeat,
            pom_kind: self.kind,
            pom_count: self.poms,
            seed: self.seed,
            parent_rows: self.parent_rows,
            match_rate: self.match_rate,
            join_fanout: self.fanout,
        }
    }
}

#[derive(Args)]
struct GenDataArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    spec: SpecArgs,
    /// Also write mapping.ttl for the spec's kind and POM count.
    #[arg(long)]
    with_mapping: bool,
}

#[derive(Args)]
struct GenMappingArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: OperatorKind,
    #[arg(long, default_value_t = 1)]
    poms: u8,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Working and report directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [10_000u64])]
    rows: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.75])]
    dup_rates: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_kind, default_values = ["SOM", "ORM", "OJM"])]
    kinds: Vec<OperatorKind>,
    #[arg(long, value_delimiter = ',', default_values_t = [1u8, 2, 3, 4, 5])]
    poms: Vec<u8>,
    #[arg(long, value_delimiter = ',', value_parser = parse_mode, default_values = ["optimized", "naive"])]
    modes: Vec<Mode>,
    #[arg(long, default_value_t = 5)]
    reps: u32,
    /// Per-run timeout in seconds.
    #[arg(long, value_parser = parse_timeout)]
    timeout: Option<Duration>,
    #[arg(long)]
    seed: Option<u64>,
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::new(ExitClass::Usage, e.to_string())
}

fn load_config(path: &Option<PathBuf>) -> Result<Config, CliError> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            Config::parse(&text).map_err(|e| usage(format!("{}: {e}", p.display())))
        }
    }
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let flags = Config {
        mapping: args.mapping,
        output: args.output,
        mode: args.mode,
        report: args.report,
        seed: args.seed,
        timeout: args.timeout,
        batch_size: args.batch_size,
        reuse_pjtt: args.no_pjtt_reuse.then_some(false),
        max_materialized: args.max_materialized,
    };
    let cfg = load_config(&args.config)?.overridden_by(flags);
    let report = execute_run(&cfg)?;
    eprintln!("{}", summary(&report));
    if report.run.partial {
        for e in &report.run.errors {
            eprintln!("error: {e}");
        }
        return Err(CliError::new(ExitClass::Source, "output is partial"));
    }
    Ok(())
}

fn gen_data(args: GenDataArgs) -> Result<(), CliError> {
    let spec = args.spec.spec();
    spec.validate().map_err(usage)?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::new(ExitClass::Output, e.to_string()))?;
    let ds = generate_dataset(&spec, &args.out).map_err(|e| CliError::new(ExitClass::Output, e.to_string()))?;
    for w in &ds.warnings {
        eprintln!("warning: {w}");
    }
    if args.with_mapping {
        let doc = generate_mappings(spec.pom_kind, spec.pom_count).map_err(usage)?;
        std::fs::write(args.out.join("mapping.ttl"), doc).map_err(|e| CliError::new(ExitClass::Output, e.to_string()))?;
    }
    eprintln!("wrote {} ({} distinct tuples)", ds.child.display(), ds.child_distinct);
    Ok(())
}

fn gen_mapping(args: GenMappingArgs) -> Result<(), CliError> {
    let doc = generate_mappings(args.kind, args.poms).map_err(usage)?;
    match args.out {
        Some(p) => std::fs::write(p, doc).map_err(|e| CliError::new(ExitClass::Output, e.to_string())),
        None => {
            print!("{doc}");
            Ok(())
        }
    }
}

fn bench(args: BenchArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.config)?;
    let exe = std::env::current_exe().map_err(|e| CliError::new(ExitClass::Other, e.to_string()))?;
    let timeout = args.timeout.or(cfg.timeout).unwrap_or(Duration::from_secs(300));
    let seed = args.seed.or(cfg.seed).unwrap_or(1);
    let plan = BenchPlan::grid(
        &args.rows,
        &args.dup_rates,
        &args.kinds,
        &args.poms,
        seed,
        args.modes,
        args.reps,
        timeout,
        args.out.clone(),
        exe,
    );
    for spec in &plan.cells {
        spec.validate().map_err(usage)?;
    }
    let report = run_benchmark(&plan).map_err(|e| CliError::new(ExitClass::Output, e.to_string()))?;
    let (json, csv) = write_reports(&report, &args.out).map_err(|e| CliError::new(ExitClass::Output, e.to_string()))?;
    eprintln!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Run(a) => run(a),
        Cmd::GenData(a) => gen_data(a),
        Cmd::GenMapping(a) => gen_mapping(a),
        Cmd::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class.code() as u8)
        }
    }
}
