//! Entanglement distribution from a quantum switch to heterogeneous users.
//!
//! The crate evaluates end-to-end fidelity, delay and rate of the closed-form
//! link pipeline and allocates switch resources (generation angle, NV type,
//! memory region, distillation protocol) with min-max simulated annealing.
//! Monte Carlo and enumeration oracles for the closed forms live alongside.

// `!(x > 0.0)` is the house idiom for rejecting NaN along with bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod config;
pub mod decoherence;
pub mod distill;
pub mod error;
pub mod experiments;
pub mod link;
pub mod metrics;
pub mod model;
pub mod optimizer;
pub mod stats;

pub use config::Scenario;
pub use distill::{DistillStats, DistillationProtocol, StabilizerCode};
pub use error::{Error, Result};
pub use metrics::{check_constraints, evaluate_link, ConstraintFlags, EvaluationTrace};
pub use model::{
    default_params, validate, Allocation, LinkMetrics, NvType, PhysicalParams, ProblemInstance, Region, SwitchConfig,
    UserAllocation, UserRequest, ValidityReport, Violation,
};
pub use optimizer::{AnnealConfig, Policy, Solution};

/// Version string written into every output file.
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
