//! Config-driven runs behind the command-line tool: policy campaigns, the
//! Monte Carlo check of the decoherence average, the averaging-approximation
//! study, angle sweeps and benchmark tables. Every run writes one CSV.

mod approx;
mod campaign;
mod output;
pub mod presets;
mod sweep;
mod theorem1;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

pub use approx::{cmd_validate_approx, ApproxReport, ApproxRow};
pub use campaign::{cmd_bench, cmd_solve, BenchReport, BenchRow, CampaignResult, CampaignRow, RunSummary};
pub use output::RunMeta;
pub use sweep::{cmd_sweep_theta, SweepResult, SweepRow};
pub use theorem1::{cmd_validate_theorem1, Theorem1Report, Theorem1Row};

use crate::config::Scenario;
use crate::distill::{parse_code_file, DistillationTable};
use crate::error::{Error, Result};
use crate::optimizer::Policy;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    ValidateTheorem1,
    ValidateApprox,
    SweepTheta,
    Bench,
}

impl Command {
    pub const ALL: [Command; 5] =
        [Command::Solve, Command::ValidateTheorem1, Command::ValidateApprox, Command::SweepTheta, Command::Bench];

    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::ValidateTheorem1 => "validate-theorem1",
            Command::ValidateApprox => "validate-approx",
            Command::SweepTheta => "sweep-theta",
            Command::Bench => "bench",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceSource {
    Preset(String),
    Config(PathBuf),
}

impl fmt::Display for InstanceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceSource::Preset(p) => write!(f, "preset {p}"),
            InstanceSource::Config(p) => write!(f, "config {}", p.display()),
        }
    }
}

/// A fully resolved run: command, scenario with overrides applied, output.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub command: Command,
    pub source: InstanceSource,
    pub scenario: Scenario,
    pub output: Option<PathBuf>,
}

/// Command-line overrides of the scenario's experiment settings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seeds: Option<Vec<u64>>,
    pub samples: Option<u64>,
    pub policies: Option<Vec<Policy>>,
}

impl ExperimentSpec {
    pub fn resolve(
        command: Command,
        source: InstanceSource,
        overrides: Overrides,
        output: Option<PathBuf>,
    ) -> Result<Self> {
        let mut scenario = match &source {
            InstanceSource::Preset(name) => presets::preset(name)?,
            InstanceSource::Config(path) => Scenario::load(path)?,
        };
        let exp = &mut scenario.experiment;
        if let Some(s) = overrides.seeds {
            exp.seeds = s;
        }
        if let Some(n) = overrides.samples {
            exp.samples = n;
        }
        if let Some(p) = overrides.policies {
            exp.policies = p;
        }
        let spec = ExperimentSpec { command, source, scenario, output };
        spec.check()?;
        Ok(spec)
    }

    pub fn from_scenario(command: Command, scenario: Scenario) -> Self {
        let source = InstanceSource::Preset(scenario.name.clone());
        ExperimentSpec { command, source, scenario, output: None }
    }

    pub fn check(&self) -> Result<()> {
        let exp = &self.scenario.experiment;
        let uses_seeds = matches!(self.command, Command::Solve | Command::Bench);
        if uses_seeds && exp.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if uses_seeds && exp.policies.is_empty() {
            return Err(Error::Config("at least one policy is required".into()));
        }
        let uses_samples = matches!(self.command, Command::ValidateTheorem1 | Command::ValidateApprox);
        if uses_samples && exp.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        self.scenario.check()
    }

    /// Distillation statistics, from the scenario's code file if it names one.
    pub fn table(&self) -> Result<DistillationTable> {
        match &self.scenario.code_file {
            None => Ok(DistillationTable::default_table().clone()),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.clone(), source })?;
                DistillationTable::from_codes(parse_code_file(&text)?)
            }
        }
    }

    pub fn meta(&self) -> RunMeta {
        RunMeta::new(self)
    }
}

/// Result of any command.
#[derive(Clone, Debug, PartialEq)]
pub enum Report {
    Campaign(CampaignResult),
    Theorem1(Theorem1Report),
    Approx(ApproxReport),
    Sweep(SweepResult),
    Bench(BenchReport),
}

impl Report {
    pub fn write_csv<W: Write>(&self, meta: &RunMeta, out: W) -> Result<()> {
        match self {
            Report::Campaign(r) => r.write_csv(meta, out),
            Report::Theorem1(r) => r.write_csv(meta, out),
            Report::Approx(r) => r.write_csv(meta, out),
            Report::Sweep(r) => r.write_csv(meta, out),
            Report::Bench(r) => r.write_csv(meta, out),
        }
    }

    /// Short human-readable summary for the terminal.
    pub fn summary(&self) -> String {
        match self {
            Report::Campaign(r) => r.summary_text(),
            Report::Theorem1(r) => r.summary_text(),
            Report::Approx(r) => r.summary_text(),
            Report::Sweep(r) => format!("{} sweep rows", r.rows.len()),
            Report::Bench(r) => r.summary_text(),
        }
    }
}

pub fn run(spec: &ExperimentSpec) -> Result<Report> {
    Ok(match spec.command {
        Command::Solve => Report::Campaign(cmd_solve(spec)?),
        Command::ValidateTheorem1 => Report::Theorem1(cmd_validate_theorem1(spec)?),
        Command::ValidateApprox => Report::Approx(cmd_validate_approx(spec)?),
        Command::SweepTheta => Report::Sweep(cmd_sweep_theta(spec)?),
        Command::Bench => Report::Bench(cmd_bench(spec)?),
    })
}

/// Runs the spec and writes the CSV to its output path (or `out` when none).
pub fn run_and_write<W: Write>(spec: &ExperimentSpec, fallback: W) -> Result<Report> {
    let report = run(spec)?;
    let meta = spec.meta();
    match &spec.output {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|source| Error::Io { path: path.clone(), source })?;
            report.write_csv(&meta, std::io::BufWriter::new(file))?;
        }
        None => report.write_csv(&meta, fallback)?,
    }
    Ok(report)
}

/// Parses `1,2,5`, `0..200` (half-open) or a mix such as `0..3,10`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("cannot parse seed list `{text}`"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            out.extend(a..b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

pub fn parse_policies(text: &str) -> Result<Vec<Policy>> {
    text.split(',').map(str::trim).filter(|p| !p.is_empty()).map(str::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1,2,5").unwrap(), vec![1, 2, 5]);
        assert_eq!(parse_seeds("0..3,10").unwrap(), vec![0, 1, 2, 10]);
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn policy_lists() {
        assert_eq!(parse_policies("proposed, DA").unwrap(), vec![Policy::Proposed, Policy::Da]);
        assert!(parse_policies("nope").is_err());
    }

    #[test]
    fn command_names() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
    }
}
