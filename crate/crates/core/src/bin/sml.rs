use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sml_volterra::experiments::{run_to_dir, ExperimentKind, ScenarioConfig};

/// Rank-one Volterra adaptive filtering experiments.
#[derive(Parser)]
#[command(name = "sml", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learning curves for a filter roster on one plant.
    Identify(Common),
    /// Divergence counts over a grid of step-size multiples.
    Stability(Common),
    /// Exact steepest descent against the adaptive ensemble.
    Sdcompare(Common),
    /// Steady-state MSE over the Gaussian-rho plant family.
    Rhosweep(Common),
    /// Bifurcation sweep of the scalar second-order model.
    Chaos(Common),
}

#[derive(Args)]
struct Common {
    /// Key-value config file layered over the experiment defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: the config's `out`, else `out/<command>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, name, args) = match cli.command {
        Command::Identify(a) => (ExperimentKind::Identification, "identify", a),
        Command::Stability(a) => (ExperimentKind::StabilityTable, "stability", a),
        Command::Sdcompare(a) => (ExperimentKind::SdComparison, "sdcompare", a),
        Command::Rhosweep(a) => (ExperimentKind::RhoSweep, "rhosweep", a),
        Command::Chaos(a) => (ExperimentKind::ChaosSweep, "chaos", a),
    };
    match run(kind, name, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(kind: ExperimentKind, name: &str, args: Common) -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = match &args.config {
        Some(p) => ScenarioConfig::load_for(kind, p)?,
        None => ScenarioConfig::new(kind),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(name));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n);
    }
    let (files, warnings) = pool.build()?.install(|| run_to_dir(&cfg, &out))?;
    std::fs::write(out.join("config.txt"), cfg.to_config_string())?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}
