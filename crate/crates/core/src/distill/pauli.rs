use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Largest block length supported (one bit per qubit in a `u8`).
pub const MAX_QUBITS: usize = 8;

/// An n-qubit Pauli operator up to phase, in symplectic (x | z) form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: u8,
    x: u8,
    z: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS);
        PauliString { n: n as u8, x: 0, z: 0 }
    }

    pub fn from_bits(n: usize, x: u8, z: u8) -> Self {
        assert!(n <= MAX_QUBITS);
        let mask = if n == 8 { u8::MAX } else { (1u8 << n) - 1 };
        PauliString { n: n as u8, x: x & mask, z: z & mask }
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn x_bits(&self) -> u8 {
        self.x
    }

    pub fn z_bits(&self) -> u8 {
        self.z
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) & 1 == 0
    }

    /// Product up to phase.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        debug_assert_eq!(self.n, other.n);
        PauliString { n: self.n, x: self.x ^ other.x, z: self.z ^ other.z }
    }

    /// Packs (x, z) into one word for linear algebra over GF(2).
    pub fn symplectic(&self) -> u16 {
        (self.x as u16) << 8 | self.z as u16
    }

    /// Iterates over all 4^n operators on `n` qubits.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        let size = 1u32 << n;
        (0..size).flat_map(move |x| (0..size).map(move |z| PauliString::from_bits(n, x as u8, z as u8)))
    }

    /// Letter on qubit `i` (qubit 0 is the leftmost character).
    pub fn letter(&self, i: usize) -> char {
        let bit = 1u8 << i;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        }
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s.len() > MAX_QUBITS {
            return Err(Error::Code(format!("Pauli string `{s}` must have 1..={MAX_QUBITS} letters")));
        }
        let (mut x, mut z) = (0u8, 0u8);
        for (i, c) in s.chars().enumerate() {
            let bit = 1u8 << i;
            match c.to_ascii_uppercase() {
                'I' => {}
                'X' => x |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit
                }
                'Z' => z |= bit,
                _ => return Err(Error::Code(format!("bad Pauli letter `{c}` in `{s}`"))),
            }
        }
        Ok(PauliString { n: s.len() as u8, x, z })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            write!(f, "{}", self.letter(i))?;
        }
        Ok(())
    }
}
