//! Grid oracle for the min-max problem.
//!
//! The objective is a max over users and the only coupling between users is
//! the NV-type capacity, so the search decomposes: for every user and NV type
//! keep the feasible grid points, then choose the type assignment. This visits
//! exactly the same allocations as the joint enumeration.

use std::f64::consts::FRAC_PI_2;

use super::{Mode, Problem, Solution, THETA_EPS};
use crate::error::{Error, Result};
use crate::model::{NvType, ProblemInstance, UserAllocation};

pub const MAX_EXHAUSTIVE_USERS: usize = 10;
pub const MAX_EXHAUSTIVE_GRID: usize = 1024;

/// `size` evenly spaced angles on `[eps, pi/2 - eps]`.
pub fn theta_grid(size: usize) -> Vec<f64> {
    let span = FRAC_PI_2 - 2.0 * THETA_EPS;
    (0..size).map(|k| THETA_EPS + span * k as f64 / (size - 1) as f64).collect()
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Candidate {
    pub theta_idx: usize,
    pub alloc: UserAllocation,
    pub t: f64,
}

impl Candidate {
    fn key(&self) -> (usize, u8, u8, u8) {
        (self.theta_idx, self.alloc.nv_type.index(), self.alloc.region.index(), self.alloc.protocol)
    }
}

/// Feasible grid points per user, split by NV type, each list in
/// lexicographic (theta index, region, protocol) order.
pub(crate) fn candidates(problem: &Problem, grid: usize) -> Result<Vec<[Vec<Candidate>; 2]>> {
    let thetas = theta_grid(grid);
    let mut out = Vec::with_capacity(problem.n_users());
    for i in 0..problem.n_users() {
        let mut per_type: [Vec<Candidate>; 2] = [Vec::new(), Vec::new()];
        for nv_type in problem.space.nv_choices(i) {
            for (theta_idx, &theta) in thetas.iter().enumerate() {
                for region in problem.space.region_choices(i) {
                    for protocol in problem.space.protocols() {
                        let alloc = UserAllocation { theta, nv_type, region, protocol };
                        let s = problem.score(i, alloc, Mode::Strict)?;
                        if s.flags.all_ok() {
                            per_type[nv_type.index() as usize].push(Candidate { theta_idx, alloc, t: s.cost });
                        }
                    }
                }
            }
        }
        out.push(per_type);
    }
    Ok(out)
}

fn best_times(table: &[[Vec<Candidate>; 2]]) -> Vec<[f64; 2]> {
    table
        .iter()
        .map(|per_type| {
            let best = |v: &Vec<Candidate>| v.iter().map(|c| c.t).fold(f64::INFINITY, f64::min);
            [best(&per_type[0]), best(&per_type[1])]
        })
        .collect()
}

/// An empty candidate list has best time infinity, which no bound admits.
fn reachable(best: f64, bound: f64) -> bool {
    best.is_finite() && best <= bound
}

fn type_of(mask: u32, i: usize) -> NvType {
    if mask >> i & 1 == 1 {
        NvType::Type2
    } else {
        NvType::Type1
    }
}

/// Capacity-respecting type assignments under which every user has a
/// feasible point with delay at most `bound`.
pub(crate) fn valid_assignments(problem: &Problem, table: &[[Vec<Candidate>; 2]], bound: f64) -> Vec<Vec<NvType>> {
    let n = problem.n_users();
    let best = best_times(table);
    let switch = &problem.instance.switch;
    (0u32..1 << n)
        .filter(|mask| {
            let type2 = mask.count_ones() as usize;
            type2 <= switch.m2 as usize && n - type2 <= switch.m1 as usize
        })
        .map(|mask| (0..n).map(|i| type_of(mask, i)).collect::<Vec<_>>())
        .filter(|types| types.iter().enumerate().all(|(i, x)| reachable(best[i][x.index() as usize], bound)))
        .collect()
}

/// Whether users `from..` can be completed within `bound` given how many
/// slots of each type earlier users took.
fn completable(best: &[[f64; 2]], from: usize, used: [usize; 2], cap: [usize; 2], bound: f64) -> bool {
    if from == best.len() {
        return true;
    }
    (0..2).any(|x| {
        used[x] < cap[x] && reachable(best[from][x], bound) && {
            let mut next = used;
            next[x] += 1;
            completable(best, from + 1, next, cap, bound)
        }
    })
}

pub fn exhaustive_search_in(problem: &Problem, grid: usize) -> Result<Solution> {
    let n = problem.n_users();
    if n > MAX_EXHAUSTIVE_USERS {
        return Err(Error::CostGuard(format!("{n} users exceed {MAX_EXHAUSTIVE_USERS}")));
    }
    if !(2..=MAX_EXHAUSTIVE_GRID).contains(&grid) {
        return Err(Error::CostGuard(format!("grid size {grid} outside 2..={MAX_EXHAUSTIVE_GRID}")));
    }
    let table = candidates(problem, grid)?;
    let best = best_times(&table);
    let optimum = valid_assignments(problem, &table, f64::INFINITY)
        .iter()
        .map(|types| types.iter().enumerate().map(|(i, x)| best[i][x.index() as usize]).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    if !optimum.is_finite() {
        return Err(Error::Infeasible);
    }

    // Lexicographically smallest allocation attaining the optimum.
    let cap = [problem.instance.switch.m1 as usize, problem.instance.switch.m2 as usize];
    let mut used = [0usize; 2];
    let mut state = Vec::with_capacity(n);
    for (i, per_type) in table.iter().enumerate() {
        let mut options: Vec<&Candidate> = per_type.iter().flatten().filter(|c| c.t <= optimum).collect();
        options.sort_by_key(|c| c.key());
        let pick = options
            .into_iter()
            .find(|c| {
                let x = c.alloc.nv_type.index() as usize;
                used[x] < cap[x] && {
                    let mut next = used;
                    next[x] += 1;
                    completable(&best, i + 1, next, cap, optimum)
                }
            })
            .expect("an optimal completion exists");
        used[pick.alloc.nv_type.index() as usize] += 1;
        state.push(problem.score(i, pick.alloc, Mode::Strict)?);
    }
    Ok(problem.solution(&state))
}

pub fn exhaustive_search(instance: &ProblemInstance, theta_grid_size: usize) -> Result<Solution> {
    exhaustive_search_in(&Problem::new(instance)?, theta_grid_size)
}
