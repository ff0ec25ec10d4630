//! Min-max delay allocation: simulated annealing, the exhaustive grid oracle
//! and the benchmark policies.

mod anneal;
mod exhaustive;
mod init;
mod policy;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

pub use anneal::{anneal, neighbor, simulated_annealing, AnnealTrace};
pub use exhaustive::{exhaustive_search, exhaustive_search_in, theta_grid, MAX_EXHAUSTIVE_GRID, MAX_EXHAUSTIVE_USERS};
pub use init::{initial_feasible, initial_state, random_assignment};
pub use policy::{benchmark_policy, benchmark_policy_with, Policy, PolicyOutcome};

use crate::distill::DistillationTable;
use crate::error::{Error, Result};
use crate::metrics::{check_constraints, trace_link_with, ConstraintFlags};
use crate::model::{validate, Allocation, LinkMetrics, NvType, ProblemInstance, Region, UserAllocation};

/// Generation angles are kept this far from 0 and pi/2.
pub const THETA_EPS: f64 = 1e-4;

pub fn clamp_theta(theta: f64) -> f64 {
    theta.clamp(THETA_EPS, FRAC_PI_2 - THETA_EPS)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealConfig {
    /// Initial temperature in seconds; unset means ten times the initial objective.
    pub tau0: Option<f64>,
    /// Stopping temperature in seconds; unset means `tau0 * tau_min_ratio`.
    pub tau_min: Option<f64>,
    pub tau_min_ratio: f64,
    pub alpha_sol: f64,
    pub k_iters: usize,
    pub theta_step: f64,
    pub flip_prob: f64,
    pub z_step_prob: f64,
    /// Full restarts of the random initial draw.
    pub max_init_tries: usize,
    /// Draws per user within one initial attempt.
    pub init_draws_per_user: usize,
    /// Grid used when random initialisation gives up. 253 nests the 64-point grid.
    pub init_grid: usize,
    /// Accept uphill moves by the Metropolis test; off means greedy descent.
    pub metropolis: bool,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            tau0: None,
            tau_min: None,
            tau_min_ratio: 1e-6,
            alpha_sol: 0.95,
            k_iters: 50,
            theta_step: 0.05,
            flip_prob: 0.1,
            z_step_prob: 0.3,
            max_init_tries: 200,
            init_draws_per_user: 200,
            init_grid: 253,
            metropolis: true,
        }
    }
}

impl AnnealConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("anneal: {m}")));
        if !(self.alpha_sol > 0.0 && self.alpha_sol < 1.0) {
            return bad("alpha_sol must lie in (0, 1)");
        }
        if self.k_iters == 0 {
            return bad("k_iters must be at least 1");
        }
        if !(self.tau_min_ratio > 0.0) {
            return bad("tau_min_ratio must be positive");
        }
        for (name, p) in [("flip_prob", self.flip_prob), ("z_step_prob", self.z_step_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} must be a probability"));
            }
        }
        if !(self.theta_step >= 0.0) {
            return bad("theta_step must be non-negative");
        }
        if self.max_init_tries == 0 || self.init_draws_per_user == 0 || self.init_grid < 2 {
            return bad("initialisation budgets must be positive");
        }
        Ok(())
    }
}

/// Restriction of the decision space used by the benchmark policies.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SearchSpace {
    /// Every user runs this protocol.
    pub protocol: Option<u8>,
    /// Per-user NV type and region, fixed in advance.
    pub hardware: Option<Vec<(NvType, Region)>>,
}

impl SearchSpace {
    pub fn full() -> Self {
        Self::default()
    }

    pub fn protocols(&self) -> std::ops::RangeInclusive<u8> {
        match self.protocol {
            Some(z) => z..=z,
            None => 1..=7,
        }
    }

    pub fn nv_choices(&self, user: usize) -> Vec<NvType> {
        match &self.hardware {
            Some(h) => vec![h[user].0],
            None => NvType::ALL.to_vec(),
        }
    }

    pub fn region_choices(&self, user: usize) -> Vec<Region> {
        match &self.hardware {
            Some(h) => vec![h[user].1],
            None => Region::ALL.to_vec(),
        }
    }
}

/// How constraint violations are treated while searching.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Only states meeting every constraint are admitted.
    Strict,
    /// Capacity and domains are enforced; rate and fidelity shortfalls are
    /// penalised so the search returns the least-violating allocation.
    Relaxed,
}

/// Any penalised state costs more than this many seconds.
const PENALTY_BASE: f64 = 1e9;
/// A unit of relative rate shortfall outweighs a unit of fidelity shortfall.
const RATE_WEIGHT: f64 = 1e3;

/// One user's allocation with everything the search needs about it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scored {
    pub alloc: UserAllocation,
    pub metrics: LinkMetrics,
    pub flags: ConstraintFlags,
    pub cost: f64,
}

/// The instance, distillation statistics and search restriction in one place.
#[derive(Clone, Debug)]
pub struct Problem<'a> {
    pub instance: &'a ProblemInstance,
    pub table: &'a DistillationTable,
    pub space: SearchSpace,
}

impl<'a> Problem<'a> {
    pub fn new(instance: &'a ProblemInstance) -> Result<Self> {
        Self::with_table(instance, DistillationTable::default_table())
    }

    pub fn with_table(instance: &'a ProblemInstance, table: &'a DistillationTable) -> Result<Self> {
        let report = validate(instance);
        if !report.is_valid() {
            return Err(Error::Instance(report.to_string()));
        }
        Ok(Problem { instance, table, space: SearchSpace::full() })
    }

    pub fn restricted(mut self, space: SearchSpace) -> Result<Self> {
        if let Some(h) = &space.hardware {
            if h.len() != self.instance.users.len() {
                return Err(Error::Instance("fixed hardware must list every user".into()));
            }
            let alloc = Allocation {
                users: h
                    .iter()
                    .map(|&(nv_type, region)| UserAllocation { theta: 1.0, nv_type, region, protocol: 1 })
                    .collect(),
            };
            if !alloc.respects(&self.instance.switch) {
                return Err(Error::Instance("fixed hardware exceeds switch capacity".into()));
            }
        }
        if let Some(z) = space.protocol {
            if !(1..=7).contains(&z) {
                return Err(Error::Protocol(z as u32));
            }
        }
        self.space = space;
        Ok(self)
    }

    pub fn n_users(&self) -> usize {
        self.instance.users.len()
    }

    pub fn score(&self, user: usize, alloc: UserAllocation, mode: Mode) -> Result<Scored> {
        let u = &self.instance.users[user];
        let metrics = trace_link_with(&self.instance.params, self.table, u, &alloc)?.metrics;
        let flags = check_constraints(&metrics, u);
        let cost = match mode {
            Mode::Strict => metrics.t_e2e,
            Mode::Relaxed if flags.all_ok() => metrics.t_e2e,
            Mode::Relaxed => {
                let rate_short = (1.0 - metrics.r_e2e / u.r_min).max(0.0);
                let fid_short = (u.f_min - metrics.f_e2e).max(0.0);
                PENALTY_BASE * (1.0 + RATE_WEIGHT * rate_short + fid_short)
            }
        };
        Ok(Scored { alloc, metrics, flags, cost })
    }

    pub fn solution(&self, state: &[Scored]) -> Solution {
        let allocation = Allocation { users: state.iter().map(|s| s.alloc).collect() };
        let feasible = allocation.respects(&self.instance.switch) && state.iter().all(|s| s.flags.all_ok());
        Solution {
            per_user_metrics: state.iter().map(|s| s.metrics).collect(),
            per_user_flags: state.iter().map(|s| s.flags).collect(),
            objective: state.iter().map(|s| s.metrics.t_e2e).fold(f64::NEG_INFINITY, f64::max),
            feasible,
            allocation,
        }
    }
}

pub(crate) fn max_cost(state: &[Scored]) -> f64 {
    state.iter().map(|s| s.cost).fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub allocation: Allocation,
    pub per_user_metrics: Vec<LinkMetrics>,
    pub per_user_flags: Vec<ConstraintFlags>,
    /// Largest per-user delay, seconds.
    pub objective: f64,
    pub feasible: bool,
}
