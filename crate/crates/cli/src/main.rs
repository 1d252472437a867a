//! Command-line driver: run experiments, sweep mechanism/seed grids, run
//! the oracle verification suites, and dump effective configs.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error,
//! 4 verification failure.

mod config;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{load_config, ConfigFile};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use wattmarket_core::clearing::Mechanism;
use wattmarket_core::engine::{run_experiment, ExperimentConfig, ExperimentSummary};
use wattmarket_core::metrics::{
    convergence_summary, emit_csv, empirical_regret, ConvergenceSummary, RoundMetrics,
};
use wattmarket_core::oracle::run_full_suite;

#[derive(Parser)]
#[command(
    name = "wattmarket",
    version,
    about = "Peer-to-peer energy double-auction simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment; write per-round metrics CSV and a summary JSON.
    Run(RunArgs),
    /// Run a mechanism x seed grid of experiments in parallel.
    Sweep(SweepArgs),
    /// Run the oracle verification suites and write a report JSON.
    Verify(VerifyArgs),
    /// Print the effective configuration (file + flag overrides) as TOML.
    ShowConfig(ConfigArgs),
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Configuration file (TOML, flat keys; missing keys take defaults).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Clearing mechanism: k-double, vickrey, mcafee, or mvm.
    #[arg(long)]
    mechanism: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Rounds per hour-auction.
    #[arg(long)]
    days: Option<u32>,
    /// Regret-diagnostic probes per agent class (0 disables).
    #[arg(long)]
    probes: Option<u32>,
    /// Demand/supply means CSV (defaults to the bundled table).
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated mechanisms, or "all".
    #[arg(long, default_value = "all")]
    mechanisms: String,
    /// Comma-separated seeds.
    #[arg(long, default_value = "1,2,3,4")]
    seeds: String,
    /// Parallel run bound (defaults to the number of cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Output directory for the report JSON.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Oracle sweep seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Random books per mechanism in the budget-balance audit.
    #[arg(long, default_value_t = 10_000)]
    books: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
        Command::ShowConfig(args) => cmd_show_config(args),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

/// Builds the effective configuration: file (when given), then flag
/// overrides on top.
fn effective_config(args: &ConfigArgs) -> Result<(ConfigFile, ExperimentConfig)> {
    let mut file = match &args.config {
        Some(path) => load_config(path)?,
        None => ConfigFile::default(),
    };
    if let Some(mechanism) = &args.mechanism {
        file.mechanism = mechanism.clone();
    }
    if let Some(seed) = args.seed {
        file.seed = seed;
    }
    if let Some(days) = args.days {
        file.days = days;
    }
    if let Some(probes) = args.probes {
        file.probes_per_class = probes;
    }
    if let Some(data) = &args.data {
        file.data = Some(data.clone());
    }
    let experiment = file.to_experiment()?;
    // Surface data-file problems (missing file, bad header, uncovered
    // hours) as configuration errors before any run starts.
    experiment
        .load_means()
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok((file, experiment))
}

#[derive(serde::Serialize)]
struct RunSummaryFile {
    experiment: ExperimentSummary,
    /// Per-hour convergence against the k-weighted reservation midpoint,
    /// band +/-1 cent, window = final 100 rounds (or fewer on short runs).
    convergence: Vec<HourConvergence>,
    /// Regret diagnostics; present only when probes are enabled.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    probe_regret: Vec<ProbeRegret>,
}

#[derive(serde::Serialize)]
struct HourConvergence {
    hour: u8,
    summary: ConvergenceSummary,
}

#[derive(serde::Serialize)]
struct ProbeRegret {
    agent: u32,
    hour: u8,
    rounds: usize,
    cumulative_regret: f64,
    average_regret: f64,
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, Failure> {
    let (_, config) = effective_config(&args.config).map_err(Failure::Config)?;
    let paths = run_one(&config, &args.out).map_err(Failure::Runtime)?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

/// Runs one experiment and writes `<mech>_seed<seed>.csv` plus
/// `<mech>_seed<seed>_summary.json` under `out`.
fn run_one(config: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let constants = config.constants.clone();
    let mut rows: Vec<RoundMetrics> = Vec::new();
    // (agent, hour) -> per-round (realized reward, counterfactuals).
    let mut probe_histories: BTreeMap<(u32, u8), Vec<(f64, Vec<f64>)>> = BTreeMap::new();
    let summary = run_experiment(config, |record| {
        for probe in &record.probes {
            probe_histories
                .entry((probe.agent.0, record.hour))
                .or_default()
                .push((probe.realized_reward, probe.counterfactual.clone()));
        }
        rows.push(RoundMetrics::from_record(record, &constants));
    })
    .map_err(|e| anyhow::anyhow!("{e}"))?;

    let stem = format!("{}_seed{}", config.mechanism, config.seed);
    let csv_path = out.join(format!("{stem}.csv"));
    let mut csv = std::io::BufWriter::new(
        std::fs::File::create(&csv_path)
            .with_context(|| format!("creating {}", csv_path.display()))?,
    );
    emit_csv(rows.iter(), config.mechanism, config.seed, &mut csv)
        .with_context(|| format!("writing {}", csv_path.display()))?;
    csv.flush().context("flushing metrics csv")?;

    let center = config.constants.k * config.constants.p_ur.as_cents()
        + (1.0 - config.constants.k) * config.constants.p_fit.as_cents();
    let mut convergence = Vec::new();
    for hour in &config.hours {
        let hour_rows: Vec<&RoundMetrics> = rows.iter().filter(|m| m.hour == *hour).collect();
        let prices: Vec<Option<f64>> = hour_rows.iter().map(|m| m.buyer_price).collect();
        let volumes: Vec<f64> = hour_rows
            .iter()
            .map(|m| m.cleared_volume.as_kwh())
            .collect();
        let window = prices.len().clamp(1, 100);
        convergence.push(HourConvergence {
            hour: *hour,
            summary: convergence_summary(&prices, &volumes, center, 1.0, window),
        });
    }
    let probe_regret = probe_histories
        .into_iter()
        .map(|((agent, hour), history)| {
            let curve = empirical_regret(&history);
            ProbeRegret {
                agent,
                hour,
                rounds: history.len(),
                cumulative_regret: curve.cumulative.last().copied().unwrap_or(0.0),
                average_regret: curve.average.last().copied().unwrap_or(0.0),
            }
        })
        .collect();
    let summary_path = out.join(format!("{stem}_summary.json"));
    let file = RunSummaryFile {
        experiment: summary,
        convergence,
        probe_regret,
    };
    std::fs::write(
        &summary_path,
        serde_json::to_string_pretty(&file).context("serializing summary")?,
    )
    .with_context(|| format!("writing {}", summary_path.display()))?;
    Ok(vec![csv_path, summary_path])
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, Failure> {
    let (file, base) = effective_config(&args.config).map_err(Failure::Config)?;
    let mechanisms: Vec<Mechanism> = if args.mechanisms == "all" {
        Mechanism::ALL.to_vec()
    } else {
        args.mechanisms
            .split(',')
            .map(|s| s.trim().parse().map_err(|e: String| anyhow::anyhow!(e)))
            .collect::<Result<_>>()
            .map_err(Failure::Config)?
    };
    let seeds: Vec<u64> = args
        .seeds
        .split(',')
        .map(|s| s.trim().parse().context("parsing --seeds"))
        .collect::<Result<_>>()
        .map_err(Failure::Config)?;
    let _ = file;

    let jobs: Vec<ExperimentConfig> = mechanisms
        .iter()
        .flat_map(|mechanism| {
            seeds.iter().map(|seed| ExperimentConfig {
                mechanism: *mechanism,
                seed: *seed,
                ..base.clone()
            })
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or_else(num_cpus))
        .build()
        .context("building thread pool")
        .map_err(Failure::Runtime)?;
    let out = args.out.clone();
    let results: Vec<Result<Vec<PathBuf>>> = pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|config| run_one(config, &out))
            .collect()
    });
    let mut failed = false;
    for (config, result) in jobs.iter().zip(results) {
        match result {
            Ok(paths) => {
                for p in paths {
                    println!("wrote {}", p.display());
                }
            }
            Err(e) => {
                eprintln!("{} seed {}: {e:#}", config.mechanism, config.seed);
                failed = true;
            }
        }
    }
    if failed {
        return Err(Failure::Runtime(anyhow::anyhow!("one or more runs failed")));
    }
    Ok(ExitCode::SUCCESS)
}

fn num_cpus() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Failure> {
    let constants = wattmarket_core::market::default_constants();
    let params = wattmarket_core::oracle::SuiteParams {
        audit_instances: args.books,
        seed: args.seed,
        ..Default::default()
    };
    let report = run_full_suite(&constants, &params);
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))
        .map_err(Failure::Runtime)?;
    let path = args.out.join("oracle_report.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&report)
            .context("serializing report")
            .map_err(Failure::Runtime)?,
    )
    .with_context(|| format!("writing {}", path.display()))
    .map_err(Failure::Runtime)?;

    let line = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
    };
    line(
        "mvm-volume-equivalence",
        report.mvm_equivalence.mismatches.is_empty(),
    );
    for audit in &report.budget_audits {
        line(
            &format!("budget-balance-{}", audit.mechanism),
            audit.passed(),
        );
    }
    line(
        "mcafee-strategy-proof",
        report.deviation_sweep.mcafee_violations.is_empty(),
    );
    line(
        "vickrey-strategy-proof",
        report.deviation_sweep.vickrey_violations.is_empty(),
    );
    line(
        "k-double-manipulable-witness",
        report.deviation_sweep.k_double_witness.is_some(),
    );
    line(
        "mvm-manipulable-witness",
        report.deviation_sweep.mvm_witness.is_some(),
    );
    for case in &report.nash_cases {
        line(
            &format!("ex-post-nash-{}", case.case),
            case.failures.is_empty(),
        );
    }
    println!("report: {}", path.display());
    Ok(verify_exit_code(report.passed))
}

/// A failed verification is its own exit class (4), distinct from config
/// (2) and runtime (3) errors.
fn verify_exit_code(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    }
}

fn cmd_show_config(args: ConfigArgs) -> Result<ExitCode, Failure> {
    let (file, _) = effective_config(&args).map_err(Failure::Config)?;
    print!("{}", file.to_toml());
    Ok(ExitCode::SUCCESS)
}
