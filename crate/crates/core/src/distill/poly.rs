use std::fmt;

use num_rational::Ratio;

pub type Q = Ratio<i64>;

/// Polynomial in F with exact rational coefficients, ascending powers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPoly {
    coeffs: Vec<Q>,
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&Q::from_integer(0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Q::from_integer(0));
        }
        RationalPoly { coeffs }
    }

    pub fn constant(c: Q) -> Self {
        Self::new(vec![c])
    }

    /// `sum_w counts[w] * F^(n-w) * ((1-F)/3)^w`: the probability mass of a set
    /// of n-qubit Pauli patterns with `counts[w]` members of weight w.
    pub fn from_weight_counts(n: u32, counts: &[u64]) -> Self {
        let mut coeffs = vec![Q::from_integer(0); n as usize + 1];
        for (w, &count) in counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let w = w as u32;
            let scale = Q::new(count as i64, 3i64.pow(w));
            // (1 - F)^w = sum_j C(w, j) (-F)^j
            for j in 0..=w {
                let sign = if j % 2 == 0 { 1 } else { -1 };
                coeffs[(n - w + j) as usize] += scale * sign * binomial(w, j);
            }
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval_exact(&self, f: Q) -> Q {
        self.coeffs.iter().rev().fold(Q::from_integer(0), |acc, &c| acc * f + c)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| *c.numer() as f64 / *c.denom() as f64).collect()
    }

    pub fn add(&self, other: &RationalPoly) -> RationalPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = Q::from_integer(0);
        let coeffs =
            (0..len).map(|i| *self.coeffs.get(i).unwrap_or(&zero) + *other.coeffs.get(i).unwrap_or(&zero)).collect();
        Self::new(coeffs)
    }
}

pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c.numer() == 0 && self.coeffs.len() > 1 {
                continue;
            }
            if !first {
                f.write_str(if *c.numer() < 0 { " - " } else { " + " })?;
            } else if *c.numer() < 0 {
                f.write_str("-")?;
            }
            first = false;
            let a = if *c.numer() < 0 { -*c } else { *c };
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a} F")?,
                _ => write!(f, "{a} F^{k}")?,
            }
        }
        Ok(())
    }
}
