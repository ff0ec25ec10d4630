//! Distillation protocols: gate/depth tables, gate-noise folding and the
//! success/fidelity statistics of each stabilizer-code scheme.
//!
//! Statistics follow from a Pauli-channel model. Each of the n input pairs
//! suffers I with probability F and X, Y, Z with (1 - F)/3 each. A pattern is
//! kept when its syndrome is trivial and it is a good outcome when it lies in
//! the stabilizer group (acts trivially on the logical pair).

pub mod code;
pub mod pauli;
pub mod poly;

use std::sync::OnceLock;

pub use code::{default_code, parse_code_file, StabilizerCode};
pub use pauli::PauliString;
use poly::{horner, RationalPoly};

use crate::error::{Error, Result};

pub const N_GATE: [u32; 7] = [0, 1, 2, 4, 7, 8, 11];
pub const N_DEPTH: [u32; 7] = [0, 1, 2, 3, 5, 6, 6];

#[derive(Clone, Debug, PartialEq)]
pub struct DistillationProtocol {
    pub z: u8,
    pub n_gate: u32,
    pub n_depth: u32,
    pub code: Option<StabilizerCode>,
}

fn check_z(z: u8) -> Result<usize> {
    if (1..=7).contains(&z) {
        Ok(z as usize - 1)
    } else {
        Err(Error::Protocol(z as u32))
    }
}

pub fn protocol_table(z: u8) -> Result<DistillationProtocol> {
    let i = check_z(z)?;
    Ok(DistillationProtocol {
        z,
        n_gate: N_GATE[i],
        n_depth: N_DEPTH[i],
        code: if z == 1 { None } else { default_code(z as usize) },
    })
}

/// Depolarizing parameter accumulated over the protocol's two-qubit gates.
pub fn gate_noise(alpha_gate: f64, z: u8) -> Result<f64> {
    if !(alpha_gate > 0.0 && alpha_gate <= 1.0) {
        return Err(Error::domain("alpha_gate", alpha_gate));
    }
    Ok(alpha_gate.powi(N_GATE[check_z(z)?] as i32))
}

pub fn distillation_time(z: u8, t_gate: f64) -> Result<f64> {
    if !(t_gate > 0.0) {
        return Err(Error::domain("t_gate", t_gate));
    }
    Ok(N_DEPTH[check_z(z)?] as f64 * t_gate)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistillStats {
    pub p_success: f64,
    pub f_out: f64,
}

// Inputs below 1/4 still describe a valid Pauli-diagonal state, and the
// pre-distillation fidelity reaches them at small generation angles, so the
// whole unit interval is accepted.
fn check_fidelity(f: f64) -> Result<()> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::domain("input fidelity", f))
    }
}

/// Closed-form statistics of the z = 4 scheme.
pub fn distill_stats_closed_z4(f: f64) -> Result<DistillStats> {
    check_fidelity(f)?;
    let f2 = f * f;
    let f3 = f2 * f;
    let f4 = f2 * f2;
    let p = 32.0 / 27.0 * f4 - 4.0 / 9.0 * f2 + 4.0 / 27.0 * f + 1.0 / 9.0;
    let num = 8.0 / 9.0 * f4 + 8.0 / 27.0 * f3 - 2.0 / 9.0 * f2 + 1.0 / 27.0;
    Ok(DistillStats { p_success: p, f_out: num / p })
}

/// Direct sum over all 4^n error patterns.
pub fn distill_stats_enumerate(code: &StabilizerCode, f: f64) -> Result<DistillStats> {
    check_fidelity(f)?;
    let group = code.group();
    let e = (1.0 - f) / 3.0;
    let (mut accepted, mut good) = (0.0, 0.0);
    for pattern in PauliString::all(code.n()) {
        if !code.accepts(&pattern) {
            continue;
        }
        let w = pattern.weight() as i32;
        let prob = f.powi(code.n() as i32 - w) * e.powi(w);
        accepted += prob;
        if group.contains(&pattern.symplectic()) {
            good += prob;
        }
    }
    Ok(DistillStats { p_success: accepted, f_out: good / accepted })
}

/// Exact success and good-outcome polynomials of one code.
#[derive(Clone, Debug, PartialEq)]
pub struct CodePolynomials {
    pub n: usize,
    pub p_success: RationalPoly,
    pub p_good: RationalPoly,
    pub p_rejected: RationalPoly,
    success_f64: Vec<f64>,
    good_f64: Vec<f64>,
}

impl CodePolynomials {
    pub fn from_code(code: &StabilizerCode) -> Self {
        let n = code.n();
        let group = code.group();
        let mut accepted = vec![0u64; n + 1];
        let mut good = vec![0u64; n + 1];
        let mut rejected = vec![0u64; n + 1];
        for pattern in PauliString::all(n) {
            let w = pattern.weight() as usize;
            if code.accepts(&pattern) {
                accepted[w] += 1;
                if group.contains(&pattern.symplectic()) {
                    good[w] += 1;
                }
            } else {
                rejected[w] += 1;
            }
        }
        let p_success = RationalPoly::from_weight_counts(n as u32, &accepted);
        let p_good = RationalPoly::from_weight_counts(n as u32, &good);
        let p_rejected = RationalPoly::from_weight_counts(n as u32, &rejected);
        CodePolynomials { n, success_f64: p_success.to_f64(), good_f64: p_good.to_f64(), p_success, p_good, p_rejected }
    }

    pub fn eval(&self, f: f64) -> DistillStats {
        let p = horner(&self.success_f64, f);
        DistillStats { p_success: p, f_out: horner(&self.good_f64, f) / p }
    }
}

/// Memoized statistics for z = 2..=7.
#[derive(Clone, Debug)]
pub struct DistillationTable {
    codes: Vec<StabilizerCode>,
    polys: Vec<CodePolynomials>,
    closed_z4: bool,
}

impl DistillationTable {
    pub fn default_table() -> &'static DistillationTable {
        static TABLE: OnceLock<DistillationTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            let codes = (2..=7).map(|n| default_code(n).expect("built-in")).collect();
            let mut t = DistillationTable::from_codes(codes).expect("built-in codes cover 2..=7");
            t.closed_z4 = true;
            t
        })
    }

    /// Table from user-supplied codes; the block lengths must be exactly 2..=7.
    pub fn from_codes(mut codes: Vec<StabilizerCode>) -> Result<Self> {
        codes.sort_by_key(|c| c.n());
        let lengths: Vec<usize> = codes.iter().map(|c| c.n()).collect();
        if lengths != [2, 3, 4, 5, 6, 7] {
            return Err(Error::Code(format!("need one code per block length 2..=7, got {lengths:?}")));
        }
        let polys = codes.iter().map(CodePolynomials::from_code).collect();
        Ok(DistillationTable { codes, polys, closed_z4: false })
    }

    pub fn code(&self, z: u8) -> Option<&StabilizerCode> {
        (z >= 2).then(|| self.codes.get(z as usize - 2)).flatten()
    }

    pub fn polynomials(&self, z: u8) -> Option<&CodePolynomials> {
        (z >= 2).then(|| self.polys.get(z as usize - 2)).flatten()
    }

    pub fn stats(&self, f: f64, z: u8) -> Result<DistillStats> {
        check_z(z)?;
        check_fidelity(f)?;
        match z {
            1 => Ok(DistillStats { p_success: 1.0, f_out: f }),
            4 if self.closed_z4 => distill_stats_closed_z4(f),
            _ => Ok(self.polys[z as usize - 2].eval(f)),
        }
    }
}

pub fn distill_stats(f: f64, z: u8) -> Result<DistillStats> {
    DistillationTable::default_table().stats(f, z)
}

/// Largest F-interval ending at 1 on which distillation does not lower the
/// fidelity, found on a uniform grid. Returns its lower end.
pub fn gain_threshold(table: &DistillationTable, z: u8, grid: usize) -> Result<f64> {
    let mut lower = 1.0;
    for i in (0..grid).rev() {
        let f = 0.25 + 0.75 * i as f64 / (grid - 1) as f64;
        if table.stats(f, z)?.f_out + 1e-15 < f {
            break;
        }
        lower = f;
    }
    Ok(lower)
}
