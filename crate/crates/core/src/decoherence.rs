//! Memory decoherence while a protocol waits for its `z` raw pairs.
//!
//! Pairs arrive at the rounds of a strictly increasing sequence (SIS). Pair k
//! decays by `exp(-(t_z - t_k)/T_c)` before the last pair lands; the noise
//! parameter of a sequence is the mean of those factors.

use rand::Rng;

use crate::error::{Error, Result};
use crate::stats::RunningStats;

/// Round indices at which the `z` pairs were created.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sis {
    arrival_rounds: Vec<u64>,
}

impl Sis {
    pub fn new(arrival_rounds: Vec<u64>) -> Result<Self> {
        if arrival_rounds.is_empty() {
            return Err(Error::Instance("empty arrival sequence".into()));
        }
        if arrival_rounds[0] == 0 || arrival_rounds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Instance(format!(
                "arrival rounds must be positive and strictly increasing: {arrival_rounds:?}"
            )));
        }
        Ok(Sis { arrival_rounds })
    }

    pub fn arrival_rounds(&self) -> &[u64] {
        &self.arrival_rounds
    }

    pub fn len(&self) -> usize {
        self.arrival_rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Inputs of the sequence-averaged noise: success probability per round,
/// coherence time in rounds, and the number of pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoherenceInputs {
    pub p: f64,
    pub t_c_rounds: f64,
    pub z: u32,
}

impl DecoherenceInputs {
    pub fn new(p: f64, t_c_rounds: f64, z: u32) -> Self {
        DecoherenceInputs { p, t_c_rounds, z }
    }

    /// Per-round retention factor.
    pub fn r(&self) -> f64 {
        (-1.0 / self.t_c_rounds).exp()
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }
}

pub fn sis_noise(s: &Sis, t_c_rounds: f64) -> f64 {
    let rounds = s.arrival_rounds();
    let last = *rounds.last().expect("non-empty by construction");
    let total: f64 = rounds.iter().map(|&t| (-((last - t) as f64) / t_c_rounds).exp()).sum();
    total / rounds.len() as f64
}

/// Closed-form average of [`sis_noise`] over all sequences with geometric
/// inter-arrival gaps.
///
/// With `eps = 1 - R` the expression is `(p + eps q)/(eps z) * (1 - B^z)` where
/// `ln B = -1/T_c - ln(1 + eps q / p)`. Both `eps` and `1 - B^z` go through
/// `expm1` so nothing cancels as `R -> 1`.
pub fn avg_noise_closed_form(inputs: &DecoherenceInputs) -> Result<f64> {
    let DecoherenceInputs { p, t_c_rounds, z } = *inputs;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain("p", p));
    }
    if !(t_c_rounds > 0.0) {
        return Err(Error::domain("t_c_rounds", t_c_rounds));
    }
    if z == 0 {
        return Err(Error::Protocol(0));
    }
    if z == 1 {
        return Ok(1.0);
    }
    let eps = -(-1.0 / t_c_rounds).exp_m1();
    let zf = z as f64;
    let q = 1.0 - p;
    let drift = eps * zf / p;
    if eps < 1e-9 && drift < 1e-7 {
        // first order in eps; second-order terms are below 1e-13
        return Ok(1.0 - eps * (zf - 1.0) / (2.0 * p));
    }
    let ln_b = -1.0 / t_c_rounds - (eps * q / p).ln_1p();
    let one_minus_pow = -(zf * ln_b).exp_m1();
    Ok(((p + eps * q) / (eps * zf) * one_minus_pow).min(1.0))
}

/// Number of rounds until the next success, at least 1, by inversion of `u`
/// in `(0, 1]`. Inversion keeps the draw a monotone function of `u`, which the
/// approximation study relies on for common random numbers.
pub fn geometric_gap(p: f64, u: f64) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    let k = (u.ln() / (-p).ln_1p()).floor();
    if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        1 + k as u64
    }
}

fn unit_open_closed<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

pub fn sample_sis<R: Rng + ?Sized>(p: f64, z: u32, rng: &mut R) -> Result<Sis> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain("p", p));
    }
    if z == 0 {
        return Err(Error::Protocol(0));
    }
    let mut t = 0u64;
    let rounds = (0..z)
        .map(|_| {
            t += geometric_gap(p, unit_open_closed(rng));
            t
        })
        .collect();
    Sis::new(rounds)
}

/// Noise parameter of one freshly sampled sequence, without allocating it.
/// Only the `z - 1` gaps after the first arrival matter.
pub fn sample_sis_noise<R: Rng + ?Sized>(p: f64, z: u32, t_c_rounds: f64, rng: &mut R) -> f64 {
    let mut wait = 0u64;
    let mut acc = 1.0;
    for _ in 1..z {
        wait += geometric_gap(p, unit_open_closed(rng));
        acc += (-(wait as f64) / t_c_rounds).exp();
    }
    acc / z as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    /// `None` for a single sample.
    pub standard_error: Option<f64>,
    pub n_samples: u64,
}

impl From<RunningStats> for McEstimate {
    fn from(s: RunningStats) -> Self {
        McEstimate { estimate: s.mean(), standard_error: s.std_error(), n_samples: s.count() }
    }
}

pub fn mc_avg_noise_stats<R: Rng + ?Sized>(
    p: f64,
    z: u32,
    t_c_rounds: f64,
    n_samples: u64,
    rng: &mut R,
) -> RunningStats {
    let mut s = RunningStats::new();
    for _ in 0..n_samples {
        s.push(sample_sis_noise(p, z, t_c_rounds, rng));
    }
    s
}

pub fn mc_avg_noise<R: Rng + ?Sized>(
    p: f64,
    z: u32,
    t_c_rounds: f64,
    n_samples: u64,
    rng: &mut R,
) -> Result<McEstimate> {
    if n_samples == 0 {
        return Err(Error::Instance("n_samples must be at least 1".into()));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain("p", p));
    }
    Ok(mc_avg_noise_stats(p, z, t_c_rounds, n_samples, rng).into())
}

pub fn fidelity_from_noise(lambda: f64) -> f64 {
    (3.0 * lambda + 1.0) / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn closed(p: f64, t: f64, z: u32) -> f64 {
        avg_noise_closed_form(&DecoherenceInputs::new(p, t, z)).unwrap()
    }

    #[test]
    fn sis_validation() {
        assert!(Sis::new(vec![]).is_err());
        assert!(Sis::new(vec![0, 1]).is_err());
        assert!(Sis::new(vec![3, 3]).is_err());
        assert!(Sis::new(vec![1, 4, 9]).is_ok());
    }

    #[test]
    fn sis_noise_examples() {
        assert_eq!(sis_noise(&Sis::new(vec![5]).unwrap(), 0.3), 1.0);
        let two = sis_noise(&Sis::new(vec![1, 2]).unwrap(), 1.0);
        assert!((two - ((-1.0f64).exp() + 1.0) / 2.0).abs() < 1e-15);
        assert!((two - 0.68394).abs() < 1e-5);
        let s = Sis::new(vec![1, 50, 900]).unwrap();
        assert!((sis_noise(&s, 1e15) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn z_one_is_exactly_one() {
        for &(p, t) in &[(0.01, 10.0), (0.5, 1e5), (1.0, 1.0)] {
            assert_eq!(closed(p, t, 1), 1.0);
        }
    }

    #[test]
    fn deterministic_arrivals_limit() {
        for z in 1..=7u32 {
            for &t in &[0.5, 3.0, 10.0, 1e3] {
                let r = (-1.0f64 / t).exp();
                let geometric = (1.0 - r.powi(z as i32)) / ((1.0 - r) * z as f64);
                assert!((closed(1.0, t, z) - geometric).abs() < 1e-12);
                let seq = Sis::new((1..=z as u64).collect()).unwrap();
                assert!((sis_noise(&seq, t) - geometric).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn long_coherence_branch() {
        for z in 1..=7 {
            for &p in &[1e-3, 0.3, 1.0] {
                let v = closed(p, 1e15, z);
                assert!((v - 1.0).abs() <= 1e-9, "z={z} p={p} v={v}");
            }
        }
        assert_eq!(closed(0.4, f64::INFINITY, 3), 1.0);
    }

    #[test]
    fn series_branch_agrees_with_log_form() {
        // just above and below the switch point
        let p = 0.25;
        let z = 6;
        for &t in &[9e8, 1.1e9, 1e10] {
            let eps = -(-1.0f64 / t).exp_m1();
            let ln_b = -1.0 / t - (eps * (1.0 - p) / p).ln_1p();
            let log_form = (p + eps * (1.0 - p)) / (eps * z as f64) * -(z as f64 * ln_b).exp_m1();
            assert!((closed(p, t, z) - log_form).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_zero_probability() {
        assert!(avg_noise_closed_form(&DecoherenceInputs::new(0.0, 10.0, 3)).is_err());
    }

    #[test]
    fn sampler_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(sample_sis(1.0, 3, &mut rng).unwrap().arrival_rounds(), &[1, 2, 3]);
        }
        // mean total rounds of one success at p = 0.5 is 2
        let n = 100_000;
        let s: RunningStats =
            (0..n).map(|_| sample_sis(0.5, 1, &mut rng).unwrap().arrival_rounds()[0] as f64).collect();
        assert!((s.mean() - 2.0).abs() <= 3.0 * s.std_error().unwrap());
    }

    #[test]
    fn negative_binomial_moments() {
        // failures before the z-th success: mean z q / p, variance z q / p^2
        let (p, z) = (0.3f64, 4u32);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 200_000;
        let s: RunningStats = (0..n)
            .map(|_| (*sample_sis(p, z, &mut rng).unwrap().arrival_rounds().last().unwrap() - z as u64) as f64)
            .collect();
        let mean = z as f64 * (1.0 - p) / p;
        let var = z as f64 * (1.0 - p) / (p * p);
        assert!((s.mean() - mean).abs() <= 3.0 * (var / n as f64).sqrt());
        assert!((s.variance().unwrap() / var - 1.0).abs() < 0.02);
    }

    #[test]
    fn mc_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = mc_avg_noise(1.0, 4, 10.0, 1000, &mut rng).unwrap();
        assert!((e.estimate - closed(1.0, 10.0, 4)).abs() < 1e-12);
        assert!(e.standard_error.unwrap() < 1e-12);

        let e = mc_avg_noise(0.3, 5, 100.0, 1_000_000, &mut rng).unwrap();
        let c = closed(0.3, 100.0, 5);
        assert!((e.estimate - c).abs() <= 3.0 * e.standard_error.unwrap());

        let e = mc_avg_noise(0.3, 5, 100.0, 1, &mut rng).unwrap();
        assert_eq!(e.standard_error, None);
        assert!(mc_avg_noise(0.3, 5, 100.0, 0, &mut rng).is_err());
    }

    #[test]
    fn fidelity_examples() {
        assert_eq!(fidelity_from_noise(1.0), 1.0);
        assert_eq!(fidelity_from_noise(0.0), 0.25);
        assert!((fidelity_from_noise(0.8) - 0.85).abs() < 1e-15);
    }

    #[test]
    fn gap_inversion_edges() {
        assert_eq!(geometric_gap(1.0, 0.3), 1);
        assert_eq!(geometric_gap(0.5, 1.0), 1);
        assert_eq!(geometric_gap(0.5, 0.5), 2);
        assert!(geometric_gap(1e-300, 1e-300) > 1);
    }

    proptest! {
        #[test]
        fn sampled_sequences_increase(p in 0.001..=1.0f64, z in 1u32..=7, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = sample_sis(p, z, &mut rng).unwrap();
            prop_assert_eq!(s.len(), z as usize);
            prop_assert!(s.arrival_rounds().windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn nonincreasing_in_z(p in 0.01..=1.0f64, t in 0.5..1e6f64, z in 1u32..7) {
            prop_assert!(closed(p, t, z + 1) <= closed(p, t, z) + 1e-12);
        }

        #[test]
        fn increasing_in_retention(p in 0.01..=1.0f64, t in 0.5..1e5f64, f in 1.01..3.0f64, z in 2u32..=7) {
            prop_assert!(closed(p, t * f, z) >= closed(p, t, z) - 1e-12);
        }

        #[test]
        fn decreasing_in_failure(p in 0.01..0.99f64, dp in 1e-3..0.5f64, t in 0.5..1e5f64, z in 2u32..=7) {
            let p2 = (p + dp).min(1.0);
            // larger p means smaller q
            prop_assert!(closed(p2, t, z) >= closed(p, t, z) - 1e-12);
        }

        #[test]
        fn in_unit_interval(p in 1e-6..=1.0f64, t in 1e-3..1e12f64, z in 1u32..=7) {
            let v = closed(p, t, z);
            prop_assert!(v > 0.0 && v <= 1.0);
        }
    }
}
