use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::anneal::anneal;
use super::init::{initial_state, random_assignment};
use super::{AnnealConfig, Mode, Problem, SearchSpace, Solution};
use crate::distill::DistillationTable;
use crate::error::{Error, Result};
use crate::model::{ProblemInstance, Region};

/// Allocation policies compared in the benchmark campaigns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Policy {
    /// Full search over angle, NV type, region and protocol.
    Proposed,
    /// Distillation-agnostic: every user gets raw pairs (z = 1).
    Da,
    /// Physics-agnostic: NV type and region drawn at random per run.
    Pa,
    /// Minimal distillation: every user runs the two-pair protocol.
    Md,
}

impl Policy {
    pub const ALL: [Policy; 4] = [Policy::Proposed, Policy::Da, Policy::Pa, Policy::Md];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Proposed => "PROPOSED",
            Policy::Da => "DA",
            Policy::Pa => "PA",
            Policy::Md => "MD",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown policy `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyOutcome {
    pub policy: Policy,
    pub solution: Solution,
    /// No allocation meeting every demand was found, so the search minimised
    /// the shortfall instead. `solution.per_user_flags` tells which demand fails.
    pub relaxed: bool,
}

pub fn benchmark_policy_with<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    table: &DistillationTable,
    policy: Policy,
    cfg: &AnnealConfig,
    rng: &mut R,
) -> Result<PolicyOutcome> {
    let space = match policy {
        Policy::Proposed => SearchSpace::full(),
        Policy::Da => SearchSpace { protocol: Some(1), hardware: None },
        Policy::Md => SearchSpace { protocol: Some(2), hardware: None },
        Policy::Pa => {
            let types = random_assignment(&instance.switch, instance.users.len(), rng);
            let hardware = types
                .into_iter()
                .map(|x| (x, if rng.random_bool(0.5) { Region::Region1 } else { Region::Region2 }))
                .collect();
            SearchSpace { protocol: None, hardware: Some(hardware) }
        }
    };
    let problem = Problem::with_table(instance, table)?.restricted(space)?;
    let (mode, start) = match initial_state(&problem, Mode::Strict, cfg, rng) {
        Ok(start) => (Mode::Strict, start),
        Err(Error::NotFound { .. }) => (Mode::Relaxed, initial_state(&problem, Mode::Relaxed, cfg, rng)?),
        Err(e) => return Err(e),
    };
    let best = anneal(&problem, cfg, mode, start, rng, None)?;
    Ok(PolicyOutcome { policy, solution: problem.solution(&best), relaxed: mode == Mode::Relaxed })
}

pub fn benchmark_policy<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    policy: Policy,
    cfg: &AnnealConfig,
    rng: &mut R,
) -> Result<PolicyOutcome> {
    benchmark_policy_with(instance, DistillationTable::default_table(), policy, cfg, rng)
}
