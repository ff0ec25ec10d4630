//! Modified Bessel functions of the first kind, orders 0 and 1.
//!
//! Only exponentially scaled values are exposed, `e^{-x} I_n(x)`, so that the
//! ratio used by the phase-dephasing parameter never overflows.

const SERIES_LIMIT: f64 = 20.0;

fn series_scaled(nu: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = if nu == 0 { 1.0 } else { half };
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu as f64));
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum * (-x).exp()
}

fn asymptotic_scaled(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut term = 1.0;
    let mut sum = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (8.0 * k as f64 * x);
        // the series is asymptotic: stop once terms start growing
        if term.abs() >= prev || term.abs() < 1e-17 * sum.abs() {
            if term.abs() < prev {
                sum += term;
            }
            break;
        }
        prev = term.abs();
        sum += term;
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// `e^{-|x|} I_0(x)`.
pub fn i0_scaled(x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        series_scaled(0, x)
    } else {
        asymptotic_scaled(0, x)
    }
}

/// `e^{-|x|} I_1(x)`.
pub fn i1_scaled(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < SERIES_LIMIT { series_scaled(1, ax) } else { asymptotic_scaled(1, ax) };
    v.copysign(x)
}

pub fn i0(x: f64) -> f64 {
    i0_scaled(x) * x.abs().exp()
}

pub fn i1(x: f64) -> f64 {
    i1_scaled(x) * x.abs().exp()
}

/// `I_1(x) / I_0(x)`, finite for every finite `x`.
pub fn i1_over_i0(x: f64) -> f64 {
    i1_scaled(x) / i0_scaled(x)
}
