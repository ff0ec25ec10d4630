use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::init::initial_state;
use super::{clamp_theta, max_cost, AnnealConfig, Mode, Problem, Scored, SearchSpace, Solution};
use crate::error::Result;
use crate::model::{Allocation, ProblemInstance, UserAllocation};

/// Perturbs one user's decision. Parts fixed by `space` are left alone.
pub fn neighbor<R: Rng + ?Sized>(
    alloc: &UserAllocation,
    cfg: &AnnealConfig,
    space: &SearchSpace,
    rng: &mut R,
) -> UserAllocation {
    let mut next = *alloc;
    if cfg.theta_step > 0.0 {
        let step = Normal::new(0.0, cfg.theta_step).expect("finite step");
        next.theta = clamp_theta(alloc.theta + step.sample(rng));
    }
    let hardware_free = space.hardware.is_none();
    if hardware_free && rng.random_bool(cfg.flip_prob) {
        next.nv_type = next.nv_type.toggled();
    }
    if hardware_free && rng.random_bool(cfg.flip_prob) {
        next.region = next.region.toggled();
    }
    if space.protocol.is_none() && rng.random_bool(cfg.z_step_prob) {
        next.protocol =
            if rng.random_bool(0.5) { next.protocol.saturating_add(1) } else { next.protocol.saturating_sub(1) };
        next.protocol = next.protocol.clamp(1, 7);
    }
    next
}

/// Objective of the current state after each temperature level.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnnealTrace {
    pub levels: Vec<f64>,
    /// Per-user costs after each level.
    pub per_user: Vec<Vec<f64>>,
}

fn gate(problem: &Problem, proposal: &[Scored], mode: Mode) -> bool {
    let alloc = Allocation { users: proposal.iter().map(|s| s.alloc).collect() };
    alloc.respects(&problem.instance.switch) && (mode == Mode::Relaxed || proposal.iter().all(|s| s.flags.all_ok()))
}

/// Annealing from a given start state.
///
/// Each iteration proposes a neighbour for every user. The joint proposal must
/// pass the feasibility gate as a whole; then each user keeps its own proposal
/// if its delay drops or the Metropolis test on its own delay change passes.
/// Accepted users that changed NV type are rolled back if the mix of old and
/// new choices overflows the capacity. The best state is refreshed once per
/// temperature level and only on a strict improvement of the max delay.
pub fn anneal<R: Rng + ?Sized>(
    problem: &Problem,
    cfg: &AnnealConfig,
    mode: Mode,
    start: Vec<Scored>,
    rng: &mut R,
    mut trace: Option<&mut AnnealTrace>,
) -> Result<Vec<Scored>> {
    cfg.check()?;
    let mut current = start;
    let mut best = current.clone();
    let mut best_cost = max_cost(&best);
    let mut tau = cfg.tau0.unwrap_or(10.0 * best_cost);
    let tau_min = cfg.tau_min.unwrap_or(tau * cfg.tau_min_ratio);
    let n = current.len();

    while tau > tau_min {
        for _ in 0..cfg.k_iters {
            let proposal = current
                .iter()
                .enumerate()
                .map(|(i, s)| problem.score(i, neighbor(&s.alloc, cfg, &problem.space, rng), mode))
                .collect::<Result<Vec<_>>>()?;
            if !gate(problem, &proposal, mode) {
                continue;
            }
            let mut accepted = vec![false; n];
            for i in 0..n {
                let delta = proposal[i].cost - current[i].cost;
                accepted[i] = delta < 0.0 || (cfg.metropolis && (-delta / tau).exp() > rng.random::<f64>());
            }
            let mut next = current.clone();
            for i in (0..n).filter(|&i| accepted[i]) {
                next[i] = proposal[i];
            }
            let alloc = Allocation { users: next.iter().map(|s| s.alloc).collect() };
            if !alloc.respects(&problem.instance.switch) {
                for i in 0..n {
                    if accepted[i] && proposal[i].alloc.nv_type != current[i].alloc.nv_type {
                        next[i] = current[i];
                    }
                }
            }
            current = next;
        }
        let cost = max_cost(&current);
        if cost < best_cost {
            best = current.clone();
            best_cost = cost;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.levels.push(cost);
            t.per_user.push(current.iter().map(|s| s.cost).collect());
        }
        tau *= cfg.alpha_sol;
    }
    Ok(best)
}

/// Full annealing run on the unrestricted problem, from a random feasible start.
pub fn simulated_annealing<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    cfg: &AnnealConfig,
    rng: &mut R,
) -> Result<Solution> {
    let problem = Problem::new(instance)?;
    let start = initial_state(&problem, Mode::Strict, cfg, rng)?;
    let best = anneal(&problem, cfg, Mode::Strict, start, rng, None)?;
    Ok(problem.solution(&best))
}
