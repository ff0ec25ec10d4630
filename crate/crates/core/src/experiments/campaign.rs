use std::collections::BTreeMap;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::output::fmt_f64;
use super::{ExperimentSpec, RunMeta};
use crate::error::{Error, Result};
use crate::optimizer::{benchmark_policy_with, exhaustive_search_in, Policy, Problem};
use crate::stats::RunningStats;

/// One user's outcome under one policy for one seed.
#[derive(Clone, Debug, PartialEq)]
pub struct CampaignRow {
    pub seed: u64,
    pub policy: Policy,
    pub user: usize,
    pub distance_d: f64,
    pub r_min: f64,
    pub f_min: f64,
    pub theta: f64,
    pub nv_type: u8,
    pub region: u8,
    pub protocol: u8,
    pub f_e2e: f64,
    pub r_e2e: f64,
    pub t_e2e: f64,
    pub rate_ok: bool,
    pub fidelity_ok: bool,
    /// Max delay over the run's users.
    pub objective: f64,
    pub run_feasible: bool,
    pub relaxed: bool,
    /// Whether the grid oracle found any feasible allocation for this seed.
    pub grid_feasible: Option<bool>,
    pub grid_objective: Option<f64>,
}

impl CampaignRow {
    const COLUMNS: [&'static str; 20] = [
        "seed",
        "policy",
        "user",
        "distance_d",
        "r_min",
        "f_min",
        "theta",
        "nv_type",
        "region",
        "protocol",
        "f_e2e",
        "r_e2e",
        "t_e2e",
        "rate_ok",
        "fidelity_ok",
        "objective",
        "run_feasible",
        "relaxed",
        "grid_feasible",
        "grid_objective",
    ];

    fn record(&self) -> Vec<String> {
        let opt = |v: Option<String>| v.unwrap_or_default();
        vec![
            self.seed.to_string(),
            self.policy.to_string(),
            self.user.to_string(),
            fmt_f64(self.distance_d),
            fmt_f64(self.r_min),
            fmt_f64(self.f_min),
            fmt_f64(self.theta),
            self.nv_type.to_string(),
            self.region.to_string(),
            self.protocol.to_string(),
            fmt_f64(self.f_e2e),
            fmt_f64(self.r_e2e),
            fmt_f64(self.t_e2e),
            self.rate_ok.to_string(),
            self.fidelity_ok.to_string(),
            fmt_f64(self.objective),
            self.run_feasible.to_string(),
            self.relaxed.to_string(),
            opt(self.grid_feasible.map(|b| b.to_string())),
            opt(self.grid_objective.map(fmt_f64)),
        ]
    }
}

/// Per-policy aggregates over runs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub policy: Policy,
    pub runs: usize,
    pub feasible_runs: usize,
    pub mean_objective: f64,
    pub std_objective: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignResult {
    /// Sorted by (seed, policy, user).
    pub rows: Vec<CampaignRow>,
    pub summaries: Vec<RunSummary>,
}

impl CampaignResult {
    /// First row of every (seed, policy) run.
    pub fn runs(&self) -> impl Iterator<Item = &CampaignRow> {
        self.rows.iter().filter(|r| r.user == 0)
    }

    pub fn users_of(&self, seed: u64, policy: Policy) -> impl Iterator<Item = &CampaignRow> {
        self.rows.iter().filter(move |r| r.seed == seed && r.policy == policy)
    }

    pub fn write_csv<W: Write>(&self, meta: &RunMeta, out: W) -> Result<()> {
        let mut w = meta.csv_writer(out)?;
        w.write_record(CampaignRow::COLUMNS)?;
        for row in &self.rows {
            w.write_record(row.record())?;
        }
        w.flush().map_err(|source| Error::Io { path: "<output>".into(), source })?;
        Ok(())
    }

    pub fn summary_text(&self) -> String {
        self.summaries
            .iter()
            .map(|s| {
                format!(
                    "{:<9} runs {:>4}  feasible {:>4}  mean max delay {:.6e} s",
                    s.policy.name(),
                    s.runs,
                    s.feasible_runs,
                    s.mean_objective
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn summarize(rows: &[CampaignRow], policies: &[Policy]) -> Vec<RunSummary> {
    policies
        .iter()
        .map(|&policy| {
            let runs: Vec<&CampaignRow> = rows.iter().filter(|r| r.policy == policy && r.user == 0).collect();
            let stats: RunningStats = runs.iter().map(|r| r.objective).collect();
            RunSummary {
                policy,
                runs: runs.len(),
                feasible_runs: runs.iter().filter(|r| r.run_feasible).count(),
                mean_objective: stats.mean(),
                std_objective: stats.variance().unwrap_or(0.0).sqrt(),
            }
        })
        .collect()
}

/// Every policy on every seed. Each (seed, policy) pair anneals with its own
/// stream of the seed's generator, so results do not depend on scheduling.
pub fn cmd_solve(spec: &ExperimentSpec) -> Result<CampaignResult> {
    let table = spec.table()?;
    let scenario = &spec.scenario;
    let exp = &scenario.experiment;
    let mut policies = exp.policies.clone();
    policies.sort();
    policies.dedup();

    let per_seed: Vec<Result<Vec<CampaignRow>>> = exp
        .seeds
        .par_iter()
        .map(|&seed| {
            let instance = scenario.instance(seed);
            let (grid_feasible, grid_objective) = if exp.exhaustive_check {
                let problem = Problem::with_table(&instance, &table)?;
                match exhaustive_search_in(&problem, exp.theta_grid) {
                    Ok(sol) => (Some(true), Some(sol.objective)),
                    Err(Error::Infeasible) => (Some(false), None),
                    Err(e) => return Err(e),
                }
            } else {
                (None, None)
            };
            let mut rows = Vec::new();
            for &policy in &policies {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(1 + policy as u64);
                let out = benchmark_policy_with(&instance, &table, policy, &scenario.anneal, &mut rng)?;
                let sol = &out.solution;
                for (i, user) in instance.users.iter().enumerate() {
                    let a = sol.allocation.users[i];
                    let m = sol.per_user_metrics[i];
                    let f = sol.per_user_flags[i];
                    rows.push(CampaignRow {
                        seed,
                        policy,
                        user: i,
                        distance_d: user.distance_d,
                        r_min: user.r_min,
                        f_min: user.f_min,
                        theta: a.theta,
                        nv_type: a.nv_type.index(),
                        region: a.region.index(),
                        protocol: a.protocol,
                        f_e2e: m.f_e2e,
                        r_e2e: m.r_e2e,
                        t_e2e: m.t_e2e,
                        rate_ok: f.rate_ok,
                        fidelity_ok: f.fidelity_ok,
                        objective: sol.objective,
                        run_feasible: sol.feasible,
                        relaxed: out.relaxed,
                        grid_feasible,
                        grid_objective,
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_seed {
        rows.extend(r?);
    }
    rows.sort_by_key(|r| (r.seed, r.policy, r.user));
    let summaries = summarize(&rows, &policies);
    Ok(CampaignResult { rows, summaries })
}

/// Policy-level means per user index (users are ordered nearest first).
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub policy: Policy,
    /// `None` is the run-level line: max delay, min fidelity, and a
    /// violation if any user has one.
    pub user: Option<usize>,
    pub runs: usize,
    pub mean_t_e2e: f64,
    pub mean_f_e2e: f64,
    pub feasibility_rate: f64,
    pub rate_violation_rate: f64,
    pub fidelity_violation_rate: f64,
    /// Fraction of seeds where the grid oracle found a feasible allocation.
    pub grid_feasible_rate: f64,
    /// Feasibility rate restricted to those seeds.
    pub feasible_when_grid_feasible: f64,
    /// Mean delay over those seeds.
    pub mean_t_grid_feasible: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub campaign: CampaignResult,
}

impl BenchReport {
    const COLUMNS: [&'static str; 11] = [
        "policy",
        "user",
        "runs",
        "mean_t_e2e",
        "mean_f_e2e",
        "feasibility_rate",
        "rate_violation_rate",
        "fidelity_violation_rate",
        "grid_feasible_rate",
        "feasible_when_grid_feasible",
        "mean_t_grid_feasible",
    ];

    pub fn row(&self, policy: Policy, user: Option<usize>) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.policy == policy && r.user == user)
    }

    pub fn write_csv<W: Write>(&self, meta: &RunMeta, out: W) -> Result<()> {
        let mut w = meta.csv_writer(out)?;
        w.write_record(Self::COLUMNS)?;
        for r in &self.rows {
            w.write_record([
                r.policy.to_string(),
                user_label(r.user),
                r.runs.to_string(),
                fmt_f64(r.mean_t_e2e),
                fmt_f64(r.mean_f_e2e),
                fmt_f64(r.feasibility_rate),
                fmt_f64(r.rate_violation_rate),
                fmt_f64(r.fidelity_violation_rate),
                fmt_f64(r.grid_feasible_rate),
                fmt_f64(r.feasible_when_grid_feasible),
                fmt_f64(r.mean_t_grid_feasible),
            ])?;
        }
        w.flush().map_err(|source| Error::Io { path: "<output>".into(), source })?;
        Ok(())
    }

    pub fn summary_text(&self) -> String {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{:<9} user {:>3}  mean T {:.4e} s  mean F {:.4}  feasible {:.3} ({:.3} of grid-feasible)  F-violations {:.3}",
                    r.policy.name(),
                    user_label(r.user),
                    r.mean_t_e2e,
                    r.mean_f_e2e,
                    r.feasibility_rate,
                    r.feasible_when_grid_feasible,
                    r.fidelity_violation_rate
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn user_label(user: Option<usize>) -> String {
    user.map(|u| u.to_string()).unwrap_or_else(|| "all".into())
}

/// One (seed, policy) run or one user of it, reduced to what the table needs.
struct Outcome {
    t: f64,
    f: f64,
    ok: bool,
    rate_ok: bool,
    fidelity_ok: bool,
    grid_feasible: bool,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    values.collect::<RunningStats>().mean()
}

fn bench_row(policy: Policy, user: Option<usize>, xs: &[Outcome]) -> BenchRow {
    let frac = |pred: &dyn Fn(&Outcome) -> bool, pool: &[&Outcome]| {
        pool.iter().filter(|o| pred(o)).count() as f64 / pool.len() as f64
    };
    let all: Vec<&Outcome> = xs.iter().collect();
    let confirmed: Vec<&Outcome> = xs.iter().filter(|o| o.grid_feasible).collect();
    BenchRow {
        policy,
        user,
        runs: xs.len(),
        mean_t_e2e: mean(xs.iter().map(|o| o.t)),
        mean_f_e2e: mean(xs.iter().map(|o| o.f)),
        feasibility_rate: frac(&|o| o.ok, &all),
        rate_violation_rate: frac(&|o| !o.rate_ok, &all),
        fidelity_violation_rate: frac(&|o| !o.fidelity_ok, &all),
        grid_feasible_rate: frac(&|o| o.grid_feasible, &all),
        feasible_when_grid_feasible: frac(&|o| o.ok, &confirmed),
        mean_t_grid_feasible: mean(confirmed.iter().map(|o| o.t)),
    }
}

pub fn bench_from_campaign(campaign: CampaignResult) -> BenchReport {
    let mut runs: BTreeMap<(Policy, u64), Vec<&CampaignRow>> = BTreeMap::new();
    for r in &campaign.rows {
        runs.entry((r.policy, r.seed)).or_default().push(r);
    }
    let mut groups: BTreeMap<(Policy, Option<usize>), Vec<Outcome>> = BTreeMap::new();
    for ((policy, _), users) in &runs {
        let grid_feasible = users[0].grid_feasible == Some(true);
        for r in users {
            groups.entry((*policy, Some(r.user))).or_default().push(Outcome {
                t: r.t_e2e,
                f: r.f_e2e,
                ok: r.rate_ok && r.fidelity_ok,
                rate_ok: r.rate_ok,
                fidelity_ok: r.fidelity_ok,
                grid_feasible,
            });
        }
        groups.entry((*policy, None)).or_default().push(Outcome {
            t: users[0].objective,
            f: users.iter().map(|r| r.f_e2e).fold(f64::INFINITY, f64::min),
            ok: users[0].run_feasible,
            rate_ok: users.iter().all(|r| r.rate_ok),
            fidelity_ok: users.iter().all(|r| r.fidelity_ok),
            grid_feasible,
        });
    }
    let rows = groups.iter().map(|(&(policy, user), xs)| bench_row(policy, user, xs)).collect();
    BenchReport { rows, campaign }
}

pub fn cmd_bench(spec: &ExperimentSpec) -> Result<BenchReport> {
    Ok(bench_from_campaign(cmd_solve(spec)?))
}
