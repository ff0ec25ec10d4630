use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::output::fmt_f64;
use super::{ExperimentSpec, RunMeta};
use crate::decoherence::{avg_noise_closed_form, mc_avg_noise_stats, DecoherenceInputs};
use crate::error::{Error, Result};

/// Closed form against the sample mean for one (p, T_c, z) cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem1Row {
    pub p: f64,
    pub t_c_rounds: f64,
    pub z: u32,
    pub closed_form: f64,
    pub estimate: f64,
    pub standard_error: f64,
    pub n_samples: u64,
}

impl Theorem1Row {
    /// Signed distance in standard errors; zero-variance cells (z = 1,
    /// p = 1) count as zero when the values agree to rounding.
    pub fn z_score(&self) -> f64 {
        let diff = self.estimate - self.closed_form;
        if self.standard_error > 0.0 {
            diff / self.standard_error
        } else if diff.abs() <= 1e-12 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }

    pub fn rel_error(&self) -> f64 {
        ((self.estimate - self.closed_form) / self.closed_form).abs()
    }

    pub fn within(&self, sigmas: f64) -> bool {
        self.z_score().abs() <= sigmas
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Theorem1Report {
    pub rows: Vec<Theorem1Row>,
}

impl Theorem1Report {
    const COLUMNS: [&'static str; 10] = [
        "p",
        "t_c_rounds",
        "z",
        "closed_form",
        "mc_mean",
        "mc_std_error",
        "n_samples",
        "z_score",
        "rel_error",
        "within_3se",
    ];

    pub fn fraction_within(&self, sigmas: f64) -> f64 {
        self.rows.iter().filter(|r| r.within(sigmas)).count() as f64 / self.rows.len() as f64
    }

    pub fn max_rel_error(&self, p_floor: f64) -> f64 {
        self.rows.iter().filter(|r| r.p >= p_floor).map(Theorem1Row::rel_error).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, meta: &RunMeta, out: W) -> Result<()> {
        let mut w = meta.csv_writer(out)?;
        w.write_record(Self::COLUMNS)?;
        for r in &self.rows {
            w.write_record([
                fmt_f64(r.p),
                fmt_f64(r.t_c_rounds),
                r.z.to_string(),
                fmt_f64(r.closed_form),
                fmt_f64(r.estimate),
                fmt_f64(r.standard_error),
                r.n_samples.to_string(),
                fmt_f64(r.z_score()),
                fmt_f64(r.rel_error()),
                r.within(3.0).to_string(),
            ])?;
        }
        w.flush().map_err(|source| Error::Io { path: "<output>".into(), source })?;
        Ok(())
    }

    pub fn summary_text(&self) -> String {
        format!(
            "{} cells, {:.1}% within 3 SE, max relative error {:.3e} (p >= 0.05)",
            self.rows.len(),
            100.0 * self.fraction_within(3.0),
            self.max_rel_error(0.05)
        )
    }
}

/// Cells are independent streams of one seed, so the report is the same
/// whatever the thread count.
pub fn cmd_validate_theorem1(spec: &ExperimentSpec) -> Result<Theorem1Report> {
    let exp = &spec.scenario.experiment;
    let settings = &exp.theorem1;
    let seed = exp.seeds.first().copied().unwrap_or(0);
    let mut cells = Vec::new();
    for &p in &settings.p_values {
        for &t in &settings.t_c_rounds {
            for &z in &settings.z_values {
                cells.push((p, t, z));
            }
        }
    }
    let rows = cells
        .par_iter()
        .enumerate()
        .map(|(i, &(p, t, z))| {
            let closed_form = avg_noise_closed_form(&DecoherenceInputs::new(p, t, z))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let stats = mc_avg_noise_stats(p, z, t, exp.samples, &mut rng);
            Ok(Theorem1Row {
                p,
                t_c_rounds: t,
                z,
                closed_form,
                estimate: stats.mean(),
                standard_error: stats.std_error().unwrap_or(0.0),
                n_samples: stats.count(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Theorem1Report { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Theorem1Settings;
    use crate::experiments::{presets, Command};

    #[test]
    fn small_grid_agrees() {
        let mut s = presets::preset("appB").unwrap();
        s.experiment.samples = 20_000;
        s.experiment.theorem1 =
            Theorem1Settings { p_values: vec![0.1, 0.5], t_c_rounds: vec![10.0, 1e3], z_values: vec![1, 3, 7] };
        let report = cmd_validate_theorem1(&ExperimentSpec::from_scenario(Command::ValidateTheorem1, s)).unwrap();
        assert_eq!(report.rows.len(), 12);
        assert!(report.fraction_within(4.0) == 1.0, "{:?}", report.rows);
        assert!(report.max_rel_error(0.05) < 0.01);
        let z1: Vec<_> = report.rows.iter().filter(|r| r.z == 1).collect();
        assert!(z1.iter().all(|r| r.estimate == 1.0 && r.z_score() == 0.0));
    }
}
