use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use erds::io::{load_config, run_experiment, write_outputs, Kind};

/// Structure-preserving simulator and verification harness for
/// energy-reaction-diffusion systems.
#[derive(Parser)]
#[command(name = "erds", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scheme and check conservation and dissipation.
    Simulate(Common),
    /// Weak-strong stability experiment.
    Stability(Common),
    /// Time-step refinement of identical-data runs.
    Uniqueness(Common),
    /// Relaxation to the constant steady state.
    Equilibrium(Common),
    /// Full property suite.
    Check(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (kind, args) = match cli.command {
        Command::Simulate(a) => (Kind::Simulate, a),
        Command::Stability(a) => (Kind::Stability, a),
        Command::Uniqueness(a) => (Kind::Uniqueness, a),
        Command::Equilibrium(a) => (Kind::Equilibrium, a),
        Command::Check(a) => (Kind::Check, a),
    };
    let mut cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.output.dir = Some(args.out.clone());
    let (report, traj) = match run_experiment(kind, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = write_outputs(traj.as_ref(), &report, &cfg.output, &args.out) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    for c in &report.checks {
        println!("{} {} = {:e}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
