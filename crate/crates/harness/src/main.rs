use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qchain_harness::{
    bounds, emit_outputs, emit_scan, run_scenario, steady_state_scan, write_error_manifest, HarnessError, ScanConfig,
    ScenarioConfig, SolverConfig,
};

#[derive(Parser)]
#[command(name = "qchain", version, about = "Entanglement dynamics of open qubit chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Exact,
    Mps,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario (optionally a disorder ensemble) and write its run directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides the solver kind; mps uses the config's settings or defaults.
        #[arg(long, value_enum)]
        solver: Option<Solver>,
    },
    /// Steady-state scan over a Γ × K/Δ grid.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Witness bounds for a CSV of measured correlations (columns i, j, a, b, value).
    Bounds {
        #[arg(long)]
        correlations: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, HarnessError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(HarnessError::Config("--threads must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| HarnessError::Config(e.to_string()))
}

fn run(config: &Path, out: &Path, seed: Option<u64>, threads: Option<usize>, solver: Option<Solver>) -> Result<(), HarnessError> {
    let mut cfg = ScenarioConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    match (solver, cfg.solver) {
        (Some(Solver::Exact), _) => cfg.solver = SolverConfig::Exact,
        (Some(Solver::Mps), SolverConfig::Exact) => cfg.solver = SolverConfig::default_mps(),
        _ => {}
    }
    cfg.validate()?;
    let result = pool(threads)?.install(|| run_scenario(&cfg))?;
    for f in &result.flags {
        log::warn!("{f}");
    }
    emit_outputs(out, &cfg, &result, threads)?;
    Ok(())
}

fn scan(config: &Path, out: &Path, threads: Option<usize>) -> Result<(), HarnessError> {
    let cfg = ScanConfig::load(config)?;
    let result = pool(threads)?.install(|| steady_state_scan(&cfg))?;
    emit_scan(out, &cfg, &result, threads)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (name, out, input, outcome) = match &cli.command {
        Command::Run { config, out, seed, threads, solver } => {
            ("run", out, Some(config), run(config, out, *seed, *threads, *solver))
        }
        Command::Scan { config, out, threads } => ("scan", out, Some(config), scan(config, out, *threads)),
        Command::Bounds { correlations, out } => {
            ("bounds", out, Some(correlations), bounds::run_bounds(correlations, out).map(|_| ()))
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("qchain {name}: {err}");
            let config = if name == "bounds" { None } else { input.map(|p| p.as_path()) };
            if let Err(e) = write_error_manifest(out, name, config, &err) {
                eprintln!("qchain {name}: could not write error manifest: {e}");
            }
            ExitCode::from(match err {
                HarnessError::Config(_) | HarnessError::InFile { .. } | HarnessError::Input(_) => 2,
                _ => 1,
            })
        }
    }
}
