use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use super::output::fmt_f64;
use super::{ExperimentSpec, RunMeta};
use crate::error::{Error, Result};
use crate::metrics::trace_link_with;
use crate::model::{NvType, Region, UserAllocation};
use crate::optimizer::THETA_EPS;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub nv_type: NvType,
    pub region: Region,
    pub protocol: u8,
    pub theta: f64,
    pub p_in: f64,
    pub lambda_avg: f64,
    pub f_e2e: f64,
    pub r_e2e: f64,
    pub t_e2e: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    /// Grouped by combination, theta ascending within each group.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    const COLUMNS: [&'static str; 9] =
        ["nv_type", "region", "protocol", "theta", "p_in", "lambda_avg", "f_e2e", "r_e2e", "t_e2e"];

    pub fn curve(&self, nv_type: NvType, region: Region, protocol: u8) -> Vec<SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.nv_type == nv_type && r.region == region && r.protocol == protocol)
            .copied()
            .collect()
    }

    pub fn write_csv<W: Write>(&self, meta: &RunMeta, out: W) -> Result<()> {
        let mut w = meta.csv_writer(out)?;
        w.write_record(Self::COLUMNS)?;
        for r in &self.rows {
            w.write_record([
                r.nv_type.index().to_string(),
                r.region.index().to_string(),
                r.protocol.to_string(),
                fmt_f64(r.theta),
                fmt_f64(r.p_in),
                fmt_f64(r.lambda_avg),
                fmt_f64(r.f_e2e),
                fmt_f64(r.r_e2e),
                fmt_f64(r.t_e2e),
            ])?;
        }
        w.flush().map_err(|source| Error::Io { path: "<output>".into(), source })?;
        Ok(())
    }
}

/// Evenly spaced angles over the full open domain, endpoints included.
pub fn theta_sweep(points: usize) -> Vec<f64> {
    let (lo, hi) = (THETA_EPS, FRAC_PI_2 - THETA_EPS);
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn cmd_sweep_theta(spec: &ExperimentSpec) -> Result<SweepResult> {
    let table = spec.table()?;
    let settings = &spec.scenario.experiment.sweep;
    let instance = spec.scenario.instance(spec.scenario.experiment.seeds.first().copied().unwrap_or(0));
    let user = instance.users.get(settings.user).ok_or_else(|| {
        Error::Config(format!("sweep user {} out of range ({} users)", settings.user, instance.users.len()))
    })?;
    let thetas = theta_sweep(settings.theta_points);
    let mut rows = Vec::new();
    for combo in settings.resolved_combos() {
        for &theta in &thetas {
            let alloc =
                UserAllocation { theta, nv_type: combo.nv_type, region: combo.region, protocol: combo.protocol };
            let m = trace_link_with(&instance.params, &table, user, &alloc)?.metrics;
            rows.push(SweepRow {
                nv_type: combo.nv_type,
                region: combo.region,
                protocol: combo.protocol,
                theta,
                p_in: m.p_in,
                lambda_avg: m.lambda_avg,
                f_e2e: m.f_e2e,
                r_e2e: m.r_e2e,
                t_e2e: m.t_e2e,
            });
        }
    }
    Ok(SweepResult { rows })
}
