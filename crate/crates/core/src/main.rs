use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use faultmg::harness::{
    hierarchy_info, run_bound, run_levelset, run_lyapunov_sweep, run_solve, ExperimentConfig,
};

/// Fault-prone multigrid laboratory: build Poisson hierarchies, run
/// fault-injected W/V-cycles, estimate asymptotic contraction rates and
/// their bounds, and emit CSV/JSON tables.
#[derive(Parser)]
#[command(name = "faultmg", version, about)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config's base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps (default: config value or all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump per-level sizes and operator statistics as JSON.
    Hierarchy,
    /// Run repeated cycles on a manufactured right-hand side and record
    /// the residual history as CSV.
    Solve,
    /// Sweep (level, eps, variant) points and tabulate Lyapunov
    /// spectral-radius estimates as CSV.
    Lyapunov,
    /// Bisect on eps for the configured contraction target per level and
    /// emit the level-set curve as CSV.
    Levelset,
    /// Replica-trick and recursion bounds for the configured (two-grid)
    /// instance as JSON.
    Bound,
}

fn load_config(cli: &Cli) -> faultmg::Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| faultmg::Error::Config("--config <path> is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = cli.workers {
        cfg.workers = Some(workers);
    }
    Ok(cfg)
}

fn emit(cli: &Cli, payload: &str) -> faultmg::Result<()> {
    match &cli.out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, payload)?;
        }
        None => print!("{payload}"),
    }
    Ok(())
}

fn error_kind(err: &faultmg::Error) -> &'static str {
    use faultmg::Error::*;
    match err {
        DimensionMismatch { .. } => "dimension_mismatch",
        NotSpd { .. } => "not_spd",
        NonConvergence { .. } => "non_convergence",
        SizeGuard { .. } => "size_guard",
        InvalidSpec(_) => "invalid_spec",
        HypothesisViolation(_) => "hypothesis_violation",
        UnsupportedModel { .. } => "unsupported_model",
        Config(_) => "config",
        Io(_) => "io",
    }
}

fn run(cli: &Cli) -> faultmg::Result<()> {
    let cfg = load_config(cli)?;
    if let Some(workers) = cfg.workers {
        // ignore the error if a pool already exists (repeat invocations)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
    match cli.command {
        Command::Hierarchy => {
            let info = hierarchy_info(&cfg)?;
            let json = serde_json::to_string_pretty(&info).expect("serializable");
            emit(cli, &format!("{json}\n"))
        }
        Command::Solve => {
            let result = run_solve(&cfg)?;
            emit(cli, &result.to_csv())
        }
        Command::Lyapunov => {
            let result = run_lyapunov_sweep(&cfg)?;
            emit(cli, &result.to_csv())
        }
        Command::Levelset => {
            let result = run_levelset(&cfg)?;
            emit(cli, &result.to_csv())
        }
        Command::Bound => {
            let report = run_bound(&cfg)?;
            let json = serde_json::to_string_pretty(&report).expect("serializable");
            emit(cli, &format!("{json}\n"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let payload = serde_json::json!({
                "error": err.to_string(),
                "kind": error_kind(&err),
            });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}
