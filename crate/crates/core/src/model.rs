//! Domain records shared by every module: device constants, user demands,
//! decision vectors and the per-user metric bundle.

use std::fmt;

use serde::{Deserialize, Serialize};

/// NV-center type. Type 1 has the better ZPL emission probability and the
/// longer coherence times.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NvType {
    Type1,
    Type2,
}

/// Nuclear-spin memory region. Region 1 sits close to the electron spin: fast,
/// high-fidelity gates but shorter coherence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Region1,
    Region2,
}

impl NvType {
    pub const ALL: [NvType; 2] = [NvType::Type1, NvType::Type2];

    pub fn index(self) -> u8 {
        match self {
            NvType::Type1 => 0,
            NvType::Type2 => 1,
        }
    }

    pub fn toggled(self) -> Self {
        match self {
            NvType::Type1 => NvType::Type2,
            NvType::Type2 => NvType::Type1,
        }
    }
}

impl Region {
    pub const ALL: [Region; 2] = [Region::Region1, Region::Region2];

    pub fn index(self) -> u8 {
        match self {
            Region::Region1 => 0,
            Region::Region2 => 1,
        }
    }

    pub fn toggled(self) -> Self {
        match self {
            Region::Region1 => Region::Region2,
            Region::Region2 => Region::Region1,
        }
    }
}

/// Coherence time in seconds for every (NV type, region) pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherenceTable {
    pub type1_region1: f64,
    pub type1_region2: f64,
    pub type2_region1: f64,
    pub type2_region2: f64,
}

impl Default for CoherenceTable {
    fn default() -> Self {
        CoherenceTable { type1_region1: 10.0, type1_region2: 60.0, type2_region1: 5.0, type2_region2: 30.0 }
    }
}

impl CoherenceTable {
    pub fn get(&self, nv: NvType, region: Region) -> f64 {
        match (nv, region) {
            (NvType::Type1, Region::Region1) => self.type1_region1,
            (NvType::Type1, Region::Region2) => self.type1_region2,
            (NvType::Type2, Region::Region1) => self.type2_region1,
            (NvType::Type2, Region::Region2) => self.type2_region2,
        }
    }
}

/// A per-region scalar (gate time or gate fidelity).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionTable {
    pub region1: f64,
    pub region2: f64,
}

impl RegionTable {
    pub fn get(&self, region: Region) -> f64 {
        match region {
            Region::Region1 => self.region1,
            Region::Region2 => self.region2,
        }
    }
}

/// Which interval one decoherence round represents.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundClock {
    /// One round lasts `t_att + t_transfer`, the same interval the delay model charges.
    #[default]
    TransferAndAttempt,
    /// One round lasts `t_att` only.
    AttemptOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    pub p_e_qs_type1: f64,
    pub p_e_qs_type2: f64,
    pub p_e_user: f64,
    pub p_ce: f64,
    pub p_det: f64,
    pub lambda_prep: f64,
    /// Phase uncertainty of transmitted photons, radians.
    pub delta_phi: f64,
    /// Fiber attenuation length, kilometers.
    pub attenuation_length_l0: f64,
    /// Duration of one generation attempt, seconds.
    pub t_att: f64,
    /// Signal speed in fiber, meters per second.
    pub light_speed_fiber: f64,
    pub t_coherence: CoherenceTable,
    pub t_gate: RegionTable,
    pub alpha_gate: RegionTable,
    pub round_clock: RoundClock,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            p_e_qs_type1: 0.6,
            p_e_qs_type2: 0.46,
            p_e_user: 0.46,
            p_ce: 0.49,
            p_det: 0.85,
            lambda_prep: 0.99,
            delta_phi: 0.2,
            attenuation_length_l0: 0.542,
            t_att: 5.5e-6,
            light_speed_fiber: 2.0e8,
            t_coherence: CoherenceTable::default(),
            t_gate: RegionTable { region1: 68e-6, region2: 400e-6 },
            alpha_gate: RegionTable { region1: 0.999, region2: 0.97 },
            round_clock: RoundClock::TransferAndAttempt,
        }
    }
}

pub fn default_params() -> PhysicalParams {
    PhysicalParams::default()
}

impl PhysicalParams {
    pub fn p_e_qs(&self, nv: NvType) -> f64 {
        match nv {
            NvType::Type1 => self.p_e_qs_type1,
            NvType::Type2 => self.p_e_qs_type2,
        }
    }

    pub fn attenuation_length_m(&self) -> f64 {
        self.attenuation_length_l0 * 1e3
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let probs = [
            ("p_e_qs_type1", self.p_e_qs_type1),
            ("p_e_qs_type2", self.p_e_qs_type2),
            ("p_e_user", self.p_e_user),
            ("p_ce", self.p_ce),
            ("p_det", self.p_det),
            ("lambda_prep", self.lambda_prep),
            ("alpha_gate.region1", self.alpha_gate.region1),
            ("alpha_gate.region2", self.alpha_gate.region2),
        ];
        for (field, v) in probs {
            if !(0.0..=1.0).contains(&v) {
                out.push(Violation::new(field, format!("{v} is not a probability")));
            }
        }
        let positive = [
            ("delta_phi", self.delta_phi),
            ("attenuation_length_l0", self.attenuation_length_l0),
            ("t_att", self.t_att),
            ("light_speed_fiber", self.light_speed_fiber),
            ("t_coherence.type1_region1", self.t_coherence.type1_region1),
            ("t_coherence.type1_region2", self.t_coherence.type1_region2),
            ("t_coherence.type2_region1", self.t_coherence.type2_region1),
            ("t_coherence.type2_region2", self.t_coherence.type2_region2),
            ("t_gate.region1", self.t_gate.region1),
            ("t_gate.region2", self.t_gate.region2),
        ];
        for (field, v) in positive {
            if !(v > 0.0) {
                out.push(Violation::new(field, format!("{v} must be strictly positive")));
            }
        }
        let tc = &self.t_coherence;
        if !(tc.type1_region2 >= tc.type2_region2
            && tc.type2_region2 >= tc.type1_region1
            && tc.type1_region1 >= tc.type2_region1)
        {
            out.push(Violation::new(
                "t_coherence",
                "ordering type1/region2 >= type2/region2 >= type1/region1 >= type2/region1 violated",
            ));
        }
        if self.t_gate.region1 > self.t_gate.region2 {
            out.push(Violation::new("t_gate", "region1 gates must not be slower than region2"));
        }
        if self.alpha_gate.region1 < self.alpha_gate.region2 {
            out.push(Violation::new("alpha_gate", "region1 gate fidelity must not be below region2"));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserRequest {
    /// Switch-to-user fiber length, meters.
    pub distance_d: f64,
    /// Minimum average rate, hertz.
    pub r_min: f64,
    pub f_min: f64,
}

/// Decision variables for one user.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserAllocation {
    /// Generation angle, radians in (0, pi/2).
    pub theta: f64,
    pub nv_type: NvType,
    pub region: Region,
    /// Number of raw pairs consumed per delivered pair (1 = no distillation).
    pub protocol: u8,
}

impl UserAllocation {
    pub fn violations(&self, user: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.theta > 0.0 && self.theta < std::f64::consts::FRAC_PI_2) {
            out.push(Violation::new(format!("users[{user}].theta"), format!("{} outside (0, pi/2)", self.theta)));
        }
        if !(1..=7).contains(&self.protocol) {
            out.push(Violation::new(format!("users[{user}].protocol"), format!("{} outside 1..=7", self.protocol)));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub users: Vec<UserAllocation>,
}

impl Allocation {
    pub fn count(&self, nv: NvType) -> usize {
        self.users.iter().filter(|u| u.nv_type == nv).count()
    }

    pub fn respects(&self, switch: &SwitchConfig) -> bool {
        self.count(NvType::Type1) <= switch.m1 as usize && self.count(NvType::Type2) <= switch.m2 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchConfig {
    pub m1: u32,
    pub m2: u32,
}

impl Default for SwitchConfig {
    fn default() -> Self {
        SwitchConfig { m1: 2, m2: 2 }
    }
}

impl SwitchConfig {
    pub fn capacity(&self, nv: NvType) -> usize {
        match nv {
            NvType::Type1 => self.m1 as usize,
            NvType::Type2 => self.m2 as usize,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub params: PhysicalParams,
    pub switch: SwitchConfig,
    pub users: Vec<UserRequest>,
}

impl ProblemInstance {
    pub fn new(params: PhysicalParams, switch: SwitchConfig, users: Vec<UserRequest>) -> Self {
        ProblemInstance { params, switch, users }
    }
}

/// Derived per-user quantities for one allocation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinkMetrics {
    pub d_prime: f64,
    pub eta: f64,
    pub p_in: f64,
    pub lambda_avg: f64,
    pub f_pre_distill: f64,
    pub f_gate_degraded: f64,
    pub p_dis: f64,
    pub f_e2e: f64,
    pub t_in: f64,
    pub t_dis: f64,
    pub t_e2e: f64,
    pub r_e2e: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub reason: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Violation { field: field.into(), reason: reason.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.violations.iter().any(|v| v.field.contains(field))
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate(instance: &ProblemInstance) -> ValidityReport {
    let mut violations = instance.params.violations();
    if instance.users.is_empty() {
        violations.push(Violation::new("users", "at least one user is required"));
    }
    let capacity = instance.switch.m1 as usize + instance.switch.m2 as usize;
    if instance.users.len() > capacity {
        violations.push(Violation::new(
            "switch.capacity",
            format!("{} users exceed m1 + m2 = {capacity}", instance.users.len()),
        ));
    }
    for (i, u) in instance.users.iter().enumerate() {
        if !(u.distance_d > 0.0 && u.distance_d.is_finite()) {
            violations
                .push(Violation::new(format!("users[{i}].distance_d"), format!("{} must be positive", u.distance_d)));
        }
        if !(u.r_min > 0.0 && u.r_min.is_finite()) {
            violations.push(Violation::new(format!("users[{i}].r_min"), format!("{} must be positive", u.r_min)));
        }
        if !(u.f_min > 0.0 && u.f_min < 1.0) {
            violations.push(Violation::new(format!("users[{i}].f_min"), format!("{} outside (0, 1)", u.f_min)));
        }
    }
    ValidityReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance() -> ProblemInstance {
        ProblemInstance::new(
            default_params(),
            SwitchConfig::default(),
            vec![UserRequest { distance_d: 800.0, r_min: 10.0, f_min: 0.85 }],
        )
    }

    #[test]
    fn defaults_match_table() {
        let p = default_params();
        assert_eq!(p.p_det, 0.85);
        assert_eq!(p.t_att, 5.5e-6);
        assert_eq!(p.attenuation_length_l0, 0.542);
        assert!(p.violations().is_empty());
    }

    #[test]
    fn default_coherence_ordering() {
        let tc = default_params().t_coherence;
        assert!(tc.get(NvType::Type1, Region::Region2) >= tc.get(NvType::Type2, Region::Region2));
        assert!(tc.get(NvType::Type2, Region::Region2) >= tc.get(NvType::Type1, Region::Region1));
        assert!(tc.get(NvType::Type1, Region::Region1) >= tc.get(NvType::Type2, Region::Region1));
    }

    #[test]
    fn valid_instance_has_empty_report() {
        assert!(validate(&instance()).is_valid());
    }

    #[test]
    fn fidelity_bound_reported() {
        let mut inst = instance();
        inst.users[0].f_min = 1.2;
        let report = validate(&inst);
        assert!(report.mentions("f_min"), "{report}");
        assert_eq!(report.violations.len(), 1);
    }

    #[test]
    fn capacity_violation_reported() {
        let mut inst = instance();
        inst.users = vec![inst.users[0]; 5];
        assert!(validate(&inst).mentions("capacity"));
    }

    #[test]
    fn ordering_violation_reported() {
        let mut inst = instance();
        inst.params.t_coherence.type2_region1 = 100.0;
        assert!(validate(&inst).mentions("t_coherence"));
        inst.params = default_params();
        inst.params.alpha_gate.region1 = 0.5;
        assert!(validate(&inst).mentions("alpha_gate"));
    }

    #[test]
    fn capacity_count() {
        let a = UserAllocation { theta: 0.5, nv_type: NvType::Type1, region: Region::Region1, protocol: 1 };
        let alloc = Allocation { users: vec![a; 3] };
        assert!(!alloc.respects(&SwitchConfig { m1: 2, m2: 2 }));
        assert!(alloc.respects(&SwitchConfig { m1: 3, m2: 0 }));
    }
}
