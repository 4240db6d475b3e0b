use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pde_consensus::output::{bounds_text, write_run, write_sweep, Summary};
use pde_consensus::{
    bound_for, builtin, read_scenario, simulate, sweep, Overrides, Scenario, SweepAxis,
};

#[derive(Parser)]
#[command(
    name = "pde-consensus",
    version,
    about = "Consensus simulator for multi-agent parabolic PDE systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario file.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Simulate one of the built-in scenarios.
    Builtin {
        name: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run a parameter grid over a scenario file.
    Sweep {
        scenario: PathBuf,
        /// `key=v1,v2,...` with key in alpha, beta, dbar, dt, cells; repeatable.
        #[arg(long = "vary", required = true)]
        vary: Vec<String>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Print the settling-time bound without simulating.
    Bounds {
        scenario: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Args)]
struct RunOpts {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write full-field snapshots.
    #[arg(long)]
    snapshots: bool,
    /// Consensus threshold in the sup norm.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Number of grid cells.
    #[arg(long)]
    cells: Option<usize>,
    /// Recorded in provenance only.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunOpts {
    fn overrides(&self) -> Overrides {
        Overrides {
            dt: self.dt,
            cells: self.cells,
            threshold: self.threshold,
            snapshots: self.snapshots,
            seed: self.seed,
        }
    }
}

fn prepare(mut scenario: Scenario, opts: &RunOpts) -> Scenario {
    scenario.apply(&opts.overrides());
    scenario
}

fn run_scenario(scenario: Scenario, opts: &RunOpts) -> Result<(), String> {
    let exp = scenario.validate().map_err(|e| e.to_string())?;
    for w in &exp.warnings {
        eprintln!("warning: {w}");
    }
    match simulate(&exp) {
        Ok(result) => {
            write_run(&opts.out, &result).map_err(|e| e.to_string())?;
            print!("{}", Summary::of(&result).to_text());
            Ok(())
        }
        Err(failure) => {
            // Keep whatever was recorded before the failure.
            let _ = write_run(&opts.out, &failure.partial);
            Err(failure.to_string())
        }
    }
}

fn execute(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Run { scenario, opts } => {
            let s = read_scenario(&scenario).map_err(|e| e.to_string())?;
            run_scenario(prepare(s, &opts), &opts)
        }
        Command::Builtin { name, opts } => {
            let s = builtin(&name).map_err(|e| e.to_string())?;
            run_scenario(prepare(s, &opts), &opts)
        }
        Command::Sweep {
            scenario,
            vary,
            opts,
        } => {
            let s = read_scenario(&scenario).map_err(|e| e.to_string())?;
            let axes = vary
                .iter()
                .map(|v| SweepAxis::parse(v))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            let outcome = sweep(&prepare(s, &opts), &axes);
            let path = write_sweep(&opts.out, &outcome).map_err(|e| e.to_string())?;
            let failed = outcome.rows.iter().filter(|r| r.error.is_some()).count();
            println!("points = {}", outcome.rows.len());
            println!("failed = {failed}");
            println!("table = {}", path.display());
            Ok(())
        }
        Command::Bounds { scenario, opts } => {
            let s = read_scenario(&scenario).map_err(|e| e.to_string())?;
            let s = prepare(s, &opts);
            let exp = s.validate().map_err(|e| e.to_string())?;
            let bound = bound_for(&exp).map_err(|e| e.to_string())?;
            print!("{}", bounds_text(&s.name, bound.as_ref()));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
