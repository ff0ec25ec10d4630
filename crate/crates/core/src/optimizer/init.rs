use rand::seq::SliceRandom;
use rand::Rng;

use super::exhaustive::{candidates, valid_assignments};
use super::{clamp_theta, AnnealConfig, Mode, Problem, Scored, Solution, THETA_EPS};
use crate::error::{Error, Result};
use crate::model::{NvType, ProblemInstance, Region, SwitchConfig, UserAllocation};

/// Random NV types for `n` users drawn without replacement from the switch pool.
pub fn random_assignment<R: Rng + ?Sized>(switch: &SwitchConfig, n: usize, rng: &mut R) -> Vec<NvType> {
    let mut pool: Vec<NvType> = std::iter::repeat_n(NvType::Type1, switch.m1 as usize)
        .chain(std::iter::repeat_n(NvType::Type2, switch.m2 as usize))
        .collect();
    pool.shuffle(rng);
    pool.truncate(n);
    pool
}

fn random_user<R: Rng + ?Sized>(problem: &Problem, user: usize, nv: NvType, rng: &mut R) -> UserAllocation {
    let theta = clamp_theta(rng.random_range(THETA_EPS..std::f64::consts::FRAC_PI_2 - THETA_EPS));
    let region = match &problem.space.hardware {
        Some(h) => h[user].1,
        None => {
            if rng.random_bool(0.5) {
                Region::Region1
            } else {
                Region::Region2
            }
        }
    };
    let protocol = match problem.space.protocol {
        Some(z) => z,
        None => rng.random_range(1..=7),
    };
    UserAllocation { theta, nv_type: nv, region, protocol }
}

fn draw_types<R: Rng + ?Sized>(problem: &Problem, rng: &mut R) -> Vec<NvType> {
    match &problem.space.hardware {
        Some(h) => h.iter().map(|&(x, _)| x).collect(),
        None => random_assignment(&problem.instance.switch, problem.n_users(), rng),
    }
}

#[derive(Default)]
struct FailureStats {
    draws: usize,
    rate: usize,
    fidelity: usize,
}

impl FailureStats {
    fn describe(&self) -> String {
        let binding = if self.fidelity >= self.rate { "fidelity" } else { "rate" };
        format!(
            "binding constraint: {binding}; fidelity failed in {} and rate in {} of {} draws",
            self.fidelity, self.rate, self.draws
        )
    }
}

/// Starting state of a search. In strict mode every user meets its rate and
/// fidelity demands; in relaxed mode only capacity and domains hold.
pub fn initial_state<R: Rng + ?Sized>(
    problem: &Problem,
    mode: Mode,
    cfg: &AnnealConfig,
    rng: &mut R,
) -> Result<Vec<Scored>> {
    let n = problem.n_users();
    if mode == Mode::Relaxed {
        let types = draw_types(problem, rng);
        return (0..n).map(|i| problem.score(i, random_user(problem, i, types[i], rng), mode)).collect();
    }

    let mut stats = FailureStats::default();
    'attempt: for _ in 0..cfg.max_init_tries {
        let types = draw_types(problem, rng);
        let mut state = Vec::with_capacity(n);
        for (i, &nv) in types.iter().enumerate() {
            let mut found = None;
            for _ in 0..cfg.init_draws_per_user {
                let s = problem.score(i, random_user(problem, i, nv, rng), mode)?;
                stats.draws += 1;
                stats.rate += usize::from(!s.flags.rate_ok);
                stats.fidelity += usize::from(!s.flags.fidelity_ok);
                if s.flags.all_ok() {
                    found = Some(s);
                    break;
                }
            }
            match found {
                Some(s) => state.push(s),
                None => continue 'attempt,
            }
        }
        return Ok(state);
    }

    // Random draws can miss thin feasible sets; scan a grid before giving up.
    let table = candidates(problem, cfg.init_grid)?;
    let assignments = valid_assignments(problem, &table, f64::INFINITY);
    let Some(types) = assignments.get(rng.random_range(0..assignments.len().max(1))) else {
        return Err(Error::NotFound { tries: cfg.max_init_tries, stats: stats.describe() });
    };
    types
        .iter()
        .enumerate()
        .map(|(i, &nv)| {
            let options = &table[i][nv.index() as usize];
            let pick = options[rng.random_range(0..options.len())];
            problem.score(i, pick.alloc, mode)
        })
        .collect()
}

/// A random allocation meeting every constraint.
pub fn initial_feasible<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    rng: &mut R,
    max_tries: usize,
) -> Result<Solution> {
    let problem = Problem::new(instance)?;
    let cfg = AnnealConfig { max_init_tries: max_tries.max(1), ..AnnealConfig::default() };
    let state = initial_state(&problem, Mode::Strict, &cfg, rng)?;
    Ok(problem.solution(&state))
}
