use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::output::fmt_f64;
use super::{ExperimentSpec, RunMeta};
use crate::decoherence::{avg_noise_closed_form, sample_sis_noise, DecoherenceInputs};
use crate::distill::DistillationTable;
use crate::error::{Error, Result};
use crate::metrics::{gate_degraded_fidelity, pre_distill_fidelity, trace_link_with};
use crate::model::{UserAllocation, UserRequest};
use crate::stats::RunningStats;

/// Exact (sequence-averaged) against approximate (average-then-distill)
/// statistics at one success probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproxRow {
    pub z: u8,
    pub p_in: f64,
    pub theta: f64,
    pub f_exact: f64,
    pub f_approx: f64,
    pub p_exact: f64,
    pub p_approx: f64,
}

impl ApproxRow {
    pub fn f_error_pct(&self) -> f64 {
        100.0 * (self.f_approx - self.f_exact).abs() / self.f_exact
    }

    pub fn p_error_pct(&self) -> f64 {
        100.0 * (self.p_approx - self.p_exact).abs() / self.p_exact
    }

    pub fn max_error_pct(&self) -> f64 {
        self.f_error_pct().max(self.p_error_pct())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxReport {
    pub eta: f64,
    pub t_c_rounds: f64,
    pub rows: Vec<ApproxRow>,
}

impl ApproxReport {
    const COLUMNS: [&'static str; 10] = [
        "z",
        "p_in",
        "theta",
        "f_exact",
        "f_approx",
        "f_error_pct",
        "p_exact",
        "p_approx",
        "p_error_pct",
        "t_c_rounds",
    ];

    /// Largest percentage error in either statistic over all rows.
    pub fn max_error_pct(&self) -> f64 {
        self.rows.iter().map(ApproxRow::max_error_pct).fold(0.0, f64::max)
    }

    /// Row with the largest error for one protocol.
    pub fn peak(&self, z: u8) -> Option<&ApproxRow> {
        self.rows.iter().filter(|r| r.z == z).max_by(|a, b| a.max_error_pct().total_cmp(&b.max_error_pct()))
    }

    pub fn write_csv<W: Write>(&self, meta: &RunMeta, out: W) -> Result<()> {
        let mut w = meta.csv_writer(out)?;
        w.write_record(Self::COLUMNS)?;
        for r in &self.rows {
            w.write_record([
                r.z.to_string(),
                fmt_f64(r.p_in),
                fmt_f64(r.theta),
                fmt_f64(r.f_exact),
                fmt_f64(r.f_approx),
                fmt_f64(r.f_error_pct()),
                fmt_f64(r.p_exact),
                fmt_f64(r.p_approx),
                fmt_f64(r.p_error_pct()),
                fmt_f64(self.t_c_rounds),
            ])?;
        }
        w.flush().map_err(|source| Error::Io { path: "<output>".into(), source })?;
        Ok(())
    }

    pub fn summary_text(&self) -> String {
        let mut zs: Vec<u8> = self.rows.iter().map(|r| r.z).collect();
        zs.dedup();
        let mut lines = vec![format!(
            "eta {:.4}, T_c {:.3} rounds, max error {:.3}%",
            self.eta,
            self.t_c_rounds,
            self.max_error_pct()
        )];
        for z in zs {
            if let Some(p) = self.peak(z) {
                lines.push(format!("z={z}: peak {:.3}% at P_in {:.4}", p.max_error_pct(), p.p_in));
            }
        }
        lines.join("\n")
    }
}

/// Angle giving success probability `p_in` at loss `eta`; the inverse of
/// `P_in = 2 eta c^2 (1 - eta c^2 / 2)` on its increasing branch.
pub fn theta_for_p_in(p_in: f64, eta: f64) -> Result<f64> {
    let c2 = (1.0 - (1.0 - p_in).sqrt()) / eta;
    if !(0.0..=1.0).contains(&c2) || !(0.0..1.0).contains(&p_in) {
        return Err(Error::domain("p_in", p_in));
    }
    Ok(c2.sqrt().acos())
}

struct Setting<'a> {
    table: &'a DistillationTable,
    eta: f64,
    a: f64,
    lambda_gate: f64,
    t_c_rounds: f64,
    z: u8,
}

impl Setting<'_> {
    fn stats_at(&self, theta: f64, lambda: f64) -> Result<(f64, f64)> {
        let f_w = gate_degraded_fidelity(pre_distill_fidelity(theta, self.eta, self.a, lambda), self.lambda_gate);
        let s = self.table.stats(f_w.clamp(0.0, 1.0), self.z)?;
        Ok((s.f_out, s.p_success))
    }

    /// Every point of one protocol draws the same uniforms, so the error
    /// curve is smooth in `p_in`.
    fn row(&self, p_in: f64, samples: u64, seed: u64) -> Result<ApproxRow> {
        let theta = theta_for_p_in(p_in, self.eta)?;
        let z = self.z as u32;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(z as u64);
        let (mut f, mut p) = (RunningStats::new(), RunningStats::new());
        for _ in 0..samples {
            let lambda = sample_sis_noise(p_in, z, self.t_c_rounds, &mut rng);
            let (fo, ps) = self.stats_at(theta, lambda)?;
            f.push(fo);
            p.push(ps);
        }
        let lambda_avg = avg_noise_closed_form(&DecoherenceInputs::new(p_in, self.t_c_rounds, z))?;
        let (f_approx, p_approx) = self.stats_at(theta, lambda_avg)?;
        Ok(ApproxRow { z: self.z, p_in, theta, f_exact: f.mean(), f_approx, p_exact: p.mean(), p_approx })
    }
}

pub fn cmd_validate_approx(spec: &ExperimentSpec) -> Result<ApproxReport> {
    let table = spec.table()?;
    let params = &spec.scenario.params;
    let exp = &spec.scenario.experiment;
    let st = &exp.approx;
    let seed = exp.seeds.first().copied().unwrap_or(0);
    let user = UserRequest { distance_d: st.distance_m, r_min: 0.0, f_min: 0.0 };

    let mut settings = Vec::new();
    let mut eta = 0.0;
    let mut t_c = 0.0;
    for &z in &st.z_values {
        let alloc = UserAllocation { theta: 0.5, nv_type: st.nv_type, region: st.region, protocol: z };
        let trace = trace_link_with(params, &table, &user, &alloc)?;
        eta = trace.metrics.eta;
        t_c = st.t_c_rounds.unwrap_or(trace.t_c_rounds);
        if !(t_c > 0.0) {
            return Err(Error::Config(format!("approx t_c_rounds must be positive, got {t_c}")));
        }
        settings.push(Setting { table: &table, eta, a: trace.a, lambda_gate: trace.lambda_gate, t_c_rounds: t_c, z });
    }

    let hi = 0.995 * (2.0 * eta - eta * eta);
    if st.p_in_points < 2 || !(st.p_in_min > 0.0 && st.p_in_min < hi) {
        return Err(Error::Config(format!(
            "approx sweep needs at least 2 points and 0 < p_in_min < {hi:.4}, got {} and {}",
            st.p_in_points, st.p_in_min
        )));
    }
    let n = st.p_in_points;
    let points: Vec<f64> = (0..n).map(|i| st.p_in_min + (hi - st.p_in_min) * i as f64 / (n - 1) as f64).collect();
    let jobs: Vec<(&Setting, f64)> = settings.iter().flat_map(|s| points.iter().map(move |&p| (s, p))).collect();
    let rows = jobs.par_iter().map(|&(s, p)| s.row(p, exp.samples, seed)).collect::<Result<Vec<_>>>()?;
    Ok(ApproxReport { eta, t_c_rounds: t_c, rows })
}
