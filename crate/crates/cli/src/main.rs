use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsdist_core::experiments::{
    parse_policies, parse_seeds, presets::PRESETS, run_and_write, Command, ExperimentSpec, InstanceSource, Overrides,
};
use qsdist_core::Error;

#[derive(Parser)]
#[command(name = "qsdist", version, about = "Entanglement distribution experiments for a quantum switch")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every policy on every seed and write per-user results
    Solve(Common),
    /// Monte Carlo check of the closed-form decoherence average
    ValidateTheorem1(Common),
    /// Compare averaged-noise distillation against per-sequence averaging
    ValidateApprox(Common),
    /// Sweep the emission angle for each hardware and protocol choice
    SweepTheta(Common),
    /// Aggregate policy benchmarks over seeds
    Bench(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML)
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario name
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    preset: Option<String>,
    /// Seed list such as `0..200` or `1,4,9`
    #[arg(long)]
    seeds: Option<String>,
    /// Monte Carlo samples per cell or point
    #[arg(long)]
    samples: Option<u64>,
    /// Comma-separated policies (PROPOSED, DA, PA, MD)
    #[arg(long)]
    policies: Option<String>,
    /// CSV destination; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Solve(c) => (Command::Solve, c),
        Cmd::ValidateTheorem1(c) => (Command::ValidateTheorem1, c),
        Cmd::ValidateApprox(c) => (Command::ValidateApprox, c),
        Cmd::SweepTheta(c) => (Command::SweepTheta, c),
        Cmd::Bench(c) => (Command::Bench, c),
    };
    match execute(command, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command, c: Common) -> Result<(), Error> {
    let source = match (c.config, c.preset) {
        (Some(path), _) => InstanceSource::Config(path),
        (None, Some(name)) => InstanceSource::Preset(name),
        (None, None) => unreachable!("clap requires one source"),
    };
    let overrides = Overrides {
        seeds: c.seeds.as_deref().map(parse_seeds).transpose()?,
        samples: c.samples,
        policies: c.policies.as_deref().map(parse_policies).transpose()?,
    };
    let to_file = c.out.is_some();
    let spec = ExperimentSpec::resolve(command, source, overrides, c.out)?;
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    let report = run_and_write(&spec, &mut lock)?;
    lock.flush().ok();
    // keep stdout pure CSV when it carries the data
    if to_file {
        println!("{}", report.summary());
    } else {
        eprintln!("{}", report.summary());
    }
    Ok(())
}
