//! Built-in scenarios mirroring the evaluation setups.

use crate::config::{ApproxSettings, ExperimentSettings, Population, Scenario, SweepSettings, UserSource};
use crate::error::{Error, Result};
use crate::model::{default_params, NvType, Region, SwitchConfig, UserRequest};
use crate::optimizer::AnnealConfig;

pub const PRESETS: [&str; 5] = ["fig2", "fig3_a", "fig3_b", "fig4_fig5", "appB"];

fn base(name: &str, users: UserSource) -> Scenario {
    Scenario {
        name: name.into(),
        params: default_params(),
        switch: SwitchConfig { m1: 2, m2: 2 },
        users,
        anneal: AnnealConfig::default(),
        experiment: ExperimentSettings::default(),
        code_file: None,
    }
}

fn four_users(r_min: [f64; 2], f_min: [f64; 2]) -> UserSource {
    UserSource::Sampled(Population { n_users: 4, distance_m: [100.0, 1500.0], r_min_hz: r_min, f_min })
}

pub fn preset(name: &str) -> Result<Scenario> {
    let mut s = match name {
        "fig2" => base(name, four_users([1.0, 1000.0], [0.85, 0.99])),
        "fig3_a" => base(name, four_users([100.0, 100.0], [0.85, 0.85])),
        "fig3_b" => base(name, four_users([10.0, 10.0], [0.85, 0.85])),
        "fig4_fig5" => {
            let mut s =
                base(name, UserSource::Fixed(vec![UserRequest { distance_d: 1000.0, r_min: 10.0, f_min: 0.85 }]));
            s.experiment.sweep = SweepSettings { theta_points: 200, user: 0, combos: Vec::new() };
            s
        }
        "appB" => {
            let mut s = base(name, UserSource::Fixed(vec![UserRequest { distance_d: 100.0, r_min: 1.0, f_min: 0.5 }]));
            // Short memory on a lossy short link: the regime where averaging
            // the noise before distillation is least accurate.
            s.experiment.approx = ApproxSettings {
                distance_m: 100.0,
                nv_type: NvType::Type1,
                region: Region::Region1,
                t_c_rounds: Some(5.0),
                p_in_points: 86,
                p_in_min: 0.01,
                z_values: (1..=7).collect(),
            };
            s
        }
        _ => return Err(Error::UnknownPreset(name.into())),
    };
    if matches!(name, "fig2" | "fig3_a" | "fig3_b") {
        s.experiment.seeds = (0..200).collect();
    }
    Ok(s)
}
