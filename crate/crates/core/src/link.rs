//! Channel loss, dephasing and single-attempt success probability for one
//! switch-to-user link.

use crate::bessel;
use crate::error::{Error, Result};
use crate::model::{NvType, PhysicalParams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkGeometry {
    /// Distance from the switch to the heralding station, meters.
    pub d_prime: f64,
    pub d_total: f64,
    /// Set when the loss-balancing position fell outside `[0, d_total]`.
    pub clamped: bool,
}

/// Weights of the two Bell states in the initial spin-spin link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellCoefficients {
    /// Weight of the target state |Psi+>.
    pub a: f64,
    pub b: f64,
}

/// Places the heralding station so that both arms see the same total loss.
pub fn heralding_distance(params: &PhysicalParams, d_total: f64, x: NvType) -> Result<LinkGeometry> {
    if !(d_total > 0.0) {
        return Err(Error::domain("d_total", d_total));
    }
    let p_qs = params.p_e_qs(x);
    let p_user = params.p_e_user;
    if !(p_qs > 0.0) {
        return Err(Error::domain("p_e_qs", p_qs));
    }
    if !(p_user > 0.0) {
        return Err(Error::domain("p_e_user", p_user));
    }
    let raw = if p_qs == p_user {
        0.5 * d_total
    } else {
        0.5 * (d_total - params.attenuation_length_m() * (p_qs / p_user).ln())
    };
    let d_prime = raw.clamp(0.0, d_total);
    Ok(LinkGeometry { d_prime, d_total, clamped: d_prime != raw })
}

/// Overall loss parameter between the switch and the heralding station.
pub fn link_loss_eta(params: &PhysicalParams, geometry: &LinkGeometry, x: NvType) -> f64 {
    params.p_e_qs(x) * params.p_ce * (-geometry.d_prime / params.attenuation_length_m()).exp() * params.p_det
}

pub fn phase_dephasing_param(delta_phi: f64) -> Result<f64> {
    if !(delta_phi > 0.0) {
        return Err(Error::domain("delta_phi", delta_phi));
    }
    let arg = 1.0 / (delta_phi * delta_phi);
    Ok(0.5 * bessel::i1_over_i0(arg) + 0.5)
}

pub fn initial_state_coeffs(lambda_prep: f64, lambda_ph: f64) -> BellCoefficients {
    let lp = lambda_prep;
    let same = lp * lp + (1.0 - lp) * (1.0 - lp);
    let cross = 2.0 * lp * (1.0 - lp);
    let a = lambda_ph * same + cross * (1.0 - lambda_ph);
    let b = (1.0 - lambda_ph) * same + cross * lambda_ph;
    debug_assert!((a + b - 1.0).abs() < 1e-12);
    BellCoefficients { a, b }
}

pub fn success_prob_single(theta: f64, eta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::domain("theta", theta));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::domain("eta", eta));
    }
    let c2 = theta.cos().powi(2);
    Ok(2.0 * eta * c2 * (1.0 - 0.5 * eta * c2))
}
