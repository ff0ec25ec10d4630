//! TOML configuration: physical overrides, switch, users (fixed or sampled per
//! seed), annealing hyperparameters and experiment settings.
//!
//! ```toml
//! schema_version = 1
//!
//! [params]            # any PhysicalParams field; omitted ones keep defaults
//! delta_phi = 0.2
//!
//! [switch]
//! m1 = 2
//! m2 = 2
//!
//! [[users]]           # exactly one of distance_m / distance_km
//! distance_km = 1.0
//! r_min_hz = 10.0
//! f_min = 0.85
//! ```

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate, NvType, PhysicalParams, ProblemInstance, Region, SwitchConfig, UserRequest};
use crate::optimizer::{AnnealConfig, Policy};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UserEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distance_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distance_km: Option<f64>,
    r_min_hz: f64,
    f_min: f64,
}

impl UserEntry {
    fn to_request(&self, index: usize) -> Result<UserRequest> {
        let distance_d = match (self.distance_m, self.distance_km) {
            (Some(m), None) => m,
            (None, Some(km)) => km * 1e3,
            _ => return Err(Error::Config(format!("users[{index}]: give exactly one of distance_m or distance_km"))),
        };
        Ok(UserRequest { distance_d, r_min: self.r_min_hz, f_min: self.f_min })
    }

    fn from_request(u: &UserRequest) -> Self {
        UserEntry { distance_m: Some(u.distance_d), distance_km: None, r_min_hz: u.r_min, f_min: u.f_min }
    }
}

/// Users drawn independently for every seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Population {
    pub n_users: usize,
    /// Uniform range of distances, meters.
    pub distance_m: [f64; 2],
    pub r_min_hz: [f64; 2],
    pub f_min: [f64; 2],
}

impl Population {
    /// Users for one seed, ordered nearest first.
    pub fn sample(&self, seed: u64) -> Vec<UserRequest> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |r: [f64; 2]| if r[0] == r[1] { r[0] } else { rng.random_range(r[0]..r[1]) };
        let mut users: Vec<UserRequest> = (0..self.n_users)
            .map(|_| UserRequest {
                distance_d: draw(self.distance_m),
                r_min: draw(self.r_min_hz),
                f_min: draw(self.f_min),
            })
            .collect();
        users.sort_by(|a, b| a.distance_d.total_cmp(&b.distance_d));
        users
    }

    fn check(&self) -> Result<()> {
        for (name, r) in [("distance_m", self.distance_m), ("r_min_hz", self.r_min_hz), ("f_min", self.f_min)] {
            if !(r[0] <= r[1]) {
                return Err(Error::Config(format!("population.{name}: range [{}, {}] is empty", r[0], r[1])));
            }
        }
        if self.n_users == 0 {
            return Err(Error::Config("population.n_users must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum UserSource {
    Fixed(Vec<UserRequest>),
    Sampled(Population),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Theorem1Settings {
    pub p_values: Vec<f64>,
    pub t_c_rounds: Vec<f64>,
    pub z_values: Vec<u32>,
}

impl Default for Theorem1Settings {
    fn default() -> Self {
        Theorem1Settings {
            p_values: vec![0.01, 0.05, 0.1, 0.3, 0.5, 0.9],
            t_c_rounds: vec![10.0, 1e2, 1e3, 1e5],
            z_values: (1..=7).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproxSettings {
    /// User distance fixing the loss parameter of the study, meters.
    pub distance_m: f64,
    pub nv_type: NvType,
    pub region: Region,
    /// Coherence time in rounds; unset derives it from the parameter tables
    /// and the round clock.
    pub t_c_rounds: Option<f64>,
    /// Number of success probabilities swept, evenly spaced up to just below
    /// the largest value the loss parameter allows.
    pub p_in_points: usize,
    pub p_in_min: f64,
    pub z_values: Vec<u8>,
}

impl Default for ApproxSettings {
    fn default() -> Self {
        ApproxSettings {
            distance_m: 1000.0,
            nv_type: NvType::Type1,
            region: Region::Region1,
            t_c_rounds: None,
            p_in_points: 80,
            p_in_min: 0.01,
            z_values: (1..=7).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Combo {
    pub nv_type: NvType,
    pub region: Region,
    pub protocol: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub theta_points: usize,
    /// Index of the swept user within the scenario.
    pub user: usize,
    /// Empty means every (NV type, region, protocol) combination.
    pub combos: Vec<Combo>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings { theta_points: 200, user: 0, combos: Vec::new() }
    }
}

impl SweepSettings {
    pub fn resolved_combos(&self) -> Vec<Combo> {
        if !self.combos.is_empty() {
            return self.combos.clone();
        }
        let mut out = Vec::new();
        for nv_type in NvType::ALL {
            for region in Region::ALL {
                for protocol in 1..=7 {
                    out.push(Combo { nv_type, region, protocol });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSettings {
    pub seeds: Vec<u64>,
    /// Monte Carlo samples per cell or sweep point.
    pub samples: u64,
    pub policies: Vec<Policy>,
    /// Also run the grid oracle on every seed to confirm feasibility.
    pub exhaustive_check: bool,
    pub theta_grid: usize,
    pub theorem1: Theorem1Settings,
    pub approx: ApproxSettings,
    pub sweep: SweepSettings,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            seeds: (0..10).collect(),
            samples: 100_000,
            policies: Policy::ALL.to_vec(),
            exhaustive_check: true,
            theta_grid: 64,
            theorem1: Theorem1Settings::default(),
            approx: ApproxSettings::default(),
            sweep: SweepSettings::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default)]
    params: PhysicalParams,
    #[serde(default)]
    switch: SwitchConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    users: Vec<UserEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    population: Option<Population>,
    #[serde(default)]
    anneal: AnnealConfig,
    #[serde(default)]
    experiment: ExperimentSettings,
    /// Replacement distillation codes, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    code_file: Option<PathBuf>,
}

/// Everything one command needs: the problem family plus run settings.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub params: PhysicalParams,
    pub switch: SwitchConfig,
    pub users: UserSource,
    pub anneal: AnnealConfig,
    pub experiment: ExperimentSettings,
    pub code_file: Option<PathBuf>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        let users = match (file.users.is_empty(), file.population) {
            (false, None) => {
                UserSource::Fixed(file.users.iter().enumerate().map(|(i, u)| u.to_request(i)).collect::<Result<_>>()?)
            }
            (true, Some(p)) => {
                p.check()?;
                UserSource::Sampled(p)
            }
            _ => return Err(Error::Config("give either [[users]] or [population], not both or neither".into())),
        };
        file.anneal.check()?;
        let scenario = Scenario {
            name: file.name.unwrap_or_else(|| "custom".into()),
            params: file.params,
            switch: file.switch,
            users,
            anneal: file.anneal,
            experiment: file.experiment,
            code_file: file.code_file,
        };
        scenario.check()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        let mut s = Self::from_toml(&text)?;
        if let (Some(code), Some(dir)) = (&s.code_file, path.parent()) {
            s.code_file = Some(dir.join(code));
        }
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        let (users, population) = match &self.users {
            UserSource::Fixed(u) => (u.iter().map(UserEntry::from_request).collect(), None),
            UserSource::Sampled(p) => (Vec::new(), Some(p.clone())),
        };
        let file = ConfigFile {
            schema_version: SCHEMA_VERSION,
            name: Some(self.name.clone()),
            params: self.params.clone(),
            switch: self.switch,
            users,
            population,
            anneal: self.anneal.clone(),
            experiment: self.experiment.clone(),
            code_file: self.code_file.clone(),
        };
        toml::to_string(&file).expect("config types serialize")
    }

    /// Parameter and capacity checks that do not depend on the seed.
    pub fn check(&self) -> Result<()> {
        let probe = self.instance(self.experiment.seeds.first().copied().unwrap_or(0));
        let report = validate(&probe);
        if !report.is_valid() {
            return Err(Error::Config(report.to_string()));
        }
        Ok(())
    }

    /// The problem instance for one seed. Fixed users ignore the seed.
    pub fn instance(&self, seed: u64) -> ProblemInstance {
        let users = match &self.users {
            UserSource::Fixed(u) => u.clone(),
            UserSource::Sampled(p) => p.sample(seed),
        };
        ProblemInstance::new(self.params.clone(), self.switch, users)
    }
}

/// Serializes a single instance in the config format.
pub fn instance_to_toml(instance: &ProblemInstance) -> String {
    Scenario {
        name: "instance".into(),
        params: instance.params.clone(),
        switch: instance.switch,
        users: UserSource::Fixed(instance.users.clone()),
        anneal: AnnealConfig::default(),
        experiment: ExperimentSettings::default(),
        code_file: None,
    }
    .to_toml()
}

pub fn instance_from_toml(text: &str) -> Result<ProblemInstance> {
    let s = Scenario::from_toml(text)?;
    match s.users {
        UserSource::Fixed(_) => Ok(s.instance(0)),
        UserSource::Sampled(_) => Err(Error::Config("expected explicit [[users]]".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::default_params;
    use proptest::prelude::*;

    #[test]
    fn minimal_file_uses_defaults() {
        let s = Scenario::from_toml("schema_version = 1\n[[users]]\ndistance_km = 1.5\nr_min_hz = 10\nf_min = 0.85\n")
            .unwrap();
        assert_eq!(s.params, default_params());
        assert_eq!(s.switch, SwitchConfig { m1: 2, m2: 2 });
        assert_eq!(s.instance(7).users[0].distance_d, 1500.0);
    }

    #[test]
    fn partial_overrides() {
        let text = "schema_version = 1\n[params]\ndelta_phi = 0.3\n[params.t_coherence]\ntype1_region2 = 90.0\n\
                    [[users]]\ndistance_m = 200\nr_min_hz = 1\nf_min = 0.5\n";
        let s = Scenario::from_toml(text).unwrap();
        assert_eq!(s.params.delta_phi, 0.3);
        assert_eq!(s.params.t_coherence.type1_region2, 90.0);
        assert_eq!(s.params.t_coherence.type2_region1, 5.0);
        assert_eq!(s.params.p_det, 0.85);
    }

    #[test]
    fn rejects_bad_files() {
        let cases = [
            "schema_version = 2\n[[users]]\ndistance_m = 1\nr_min_hz = 1\nf_min = 0.5\n",
            "schema_version = 1\n[[users]]\ndistance_m = 1\ndistance_km = 1\nr_min_hz = 1\nf_min = 0.5\n",
            "schema_version = 1\n[[users]]\nr_min_hz = 1\nf_min = 0.5\n",
            "schema_version = 1\n",
            "schema_version = 1\n[params]\nbogus = 1\n[[users]]\ndistance_m = 1\nr_min_hz = 1\nf_min = 0.5\n",
            "schema_version = 1\n[[users]]\ndistance_m = 1\nr_min_hz = 1\nf_min = 1.5\n",
            "schema_version = 1\n[population]\nn_users = 2\ndistance_m = [5, 1]\nr_min_hz = [1, 1]\nf_min = [0.5, 0.6]\n",
        ];
        for c in cases {
            assert!(Scenario::from_toml(c).is_err(), "{c}");
        }
    }

    #[test]
    fn population_sampling_is_seeded_and_sorted() {
        let p = Population { n_users: 4, distance_m: [100.0, 1500.0], r_min_hz: [1.0, 1000.0], f_min: [0.85, 0.99] };
        let a = p.sample(3);
        assert_eq!(a, p.sample(3));
        assert_ne!(a, p.sample(4));
        assert!(a.windows(2).all(|w| w[0].distance_d <= w[1].distance_d));
        assert!(a.iter().all(|u| (100.0..1500.0).contains(&u.distance_d) && (0.85..0.99).contains(&u.f_min)));
    }

    #[test]
    fn scenario_round_trip() {
        let mut s = Scenario::from_toml(
            "schema_version = 1\n[population]\nn_users = 3\ndistance_m = [100, 1500]\nr_min_hz = [1, 1000]\nf_min = [0.85, 0.99]\n",
        )
        .unwrap();
        s.experiment.sweep.combos.push(Combo { nv_type: NvType::Type2, region: Region::Region1, protocol: 5 });
        s.anneal.tau0 = Some(3.5);
        assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s);
    }

    fn arb_user() -> impl Strategy<Value = UserRequest> {
        (1e-3..1e6f64, 1e-6..1e6f64, 1e-6..0.999_999f64).prop_map(|(distance_d, r_min, f_min)| UserRequest {
            distance_d,
            r_min,
            f_min,
        })
    }

    proptest! {
        #[test]
        fn instance_round_trip(
            users in prop::collection::vec(arb_user(), 1..=4),
            delta_phi in 1e-3..3.0f64,
            p_ce in 0.0..=1.0f64,
            t_att in 1e-9..1e-3f64,
        ) {
            let mut params = default_params();
            params.delta_phi = delta_phi;
            params.p_ce = p_ce;
            params.t_att = t_att;
            let inst = ProblemInstance::new(params, SwitchConfig::default(), users);
            prop_assume!(validate(&inst).is_valid());
            let back = instance_from_toml(&instance_to_toml(&inst)).unwrap();
            prop_assert_eq!(back, inst);
        }
    }
}
