//! Fixtures shared by the benchmarks.

use qsdist_core::experiments::presets::preset;
use qsdist_core::{NvType, ProblemInstance, Region, UserAllocation, UserRequest};

/// The four-user campaign instance for one seed.
pub fn campaign_instance(seed: u64) -> ProblemInstance {
    preset("fig2").expect("built-in preset").instance(seed)
}

pub fn sample_link() -> (UserRequest, UserAllocation) {
    (
        UserRequest { distance_d: 1000.0, r_min: 10.0, f_min: 0.85 },
        UserAllocation { theta: 0.6, nv_type: NvType::Type2, region: Region::Region2, protocol: 4 },
    )
}
