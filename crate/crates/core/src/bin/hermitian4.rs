use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use hermitian4::experiments::{self, ExperimentError, Scenario, ScenarioConfig};

#[derive(Parser)]
#[command(name = "hermitian4", version, about = "Scenario runner for hermitian triples on the 4-torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Class, harmonic norm and Hodge split of the configured ω.
    Tau(RunArgs),
    /// Harmonic norms for two volume-matched metrics with one J.
    NormInvariance(RunArgs),
    /// Positivity of ∫ e^f ω ∧ ω_H for conformal factors f.
    Conformal(RunArgs),
    /// Random structure pairs through the junction construction.
    Junction(RunArgs),
    /// ‖dω‖ and ‖d*ω‖ along a symplectic to non-closed family.
    Closedness(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML scenario config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the JSON, CSV and timing files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the grid size n.
    #[arg(long)]
    grid: Option<usize>,
}

fn config_for(scenario: Scenario, args: &RunArgs) -> Result<ScenarioConfig, ExperimentError> {
    let mut cfg = match &args.config {
        Some(path) => ScenarioConfig::from_path(path, Some(scenario))?,
        None => ScenarioConfig::new(scenario),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.grid {
        cfg.n = n;
    }
    cfg.resolved()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, args) = match &cli.command {
        Command::Tau(a) => (Scenario::Tau, a),
        Command::NormInvariance(a) => (Scenario::NormInvariance, a),
        Command::Conformal(a) => (Scenario::Conformal, a),
        Command::Junction(a) => (Scenario::Junction, a),
        Command::Closedness(a) => (Scenario::Closedness, a),
    };
    let cfg = match config_for(scenario, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let report = match experiments::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_config() { 2 } else { 1 });
        }
    };
    match report.write_to(&args.out, start.elapsed()) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    println!("{scenario}: {}", if report.pass { "pass" } else { "FAIL" });
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
