//! Phase tracked Pauli words.
//!
//! A word on n qubits is stored as a phase exponent together with two bit
//! vectors and denotes
//!
//! ```text
//!     i^phase * (X^x1 Z^z1) tensor ... tensor (X^xn Z^zn)
//! ```
//!
//! so multiplication only has to count the Z-past-X swaps. The textual form
//! folds each XZ factor into the letter Y, e.g. `-i*XZ` or `-YY`, with an
//! optional `.` every four letters purely for readability.

use crate::linalg::{cre, czero, kron, CMatrix, C64};
use num::Complex;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const MAX_QUBITS: usize = 64;

/// Largest qubit count accepted by [`PauliWord::to_dense`].
pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("size mismatch: {0} vs {1} qubits")]
    SizeMismatch(usize, usize),
    #[error("too many qubits: {0} (limit {1})")]
    TooManyQubits(usize, usize),
    #[error("dense form limited to {MAX_DENSE_QUBITS} qubits, got {0}")]
    DenseGuard(usize),
    #[error("cannot parse pauli word {0:?}: {1}")]
    Parse(String, String),
}

/// An element of the n-qubit Pauli group.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliWord {
    n: usize,
    phase: u8, // exponent of i, mod 4
    x: u64,
    z: u64,
}

impl PauliWord {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS);
        PauliWord { n, phase: 0, x: 0, z: 0 }
    }

    /// Single-qubit letter at position `k` of an otherwise identity word.
    pub fn single(n: usize, k: usize, letter: char) -> Self {
        assert!(k < n && n <= MAX_QUBITS);
        let (phase, xb, zb) = match letter {
            'I' => (0, 0u64, 0u64),
            'X' => (0, 1, 0),
            'Z' => (0, 0, 1),
            // Y = i XZ
            'Y' => (1, 1, 1),
            _ => panic!("unknown pauli letter {letter:?}"),
        };
        PauliWord { n, phase, x: xb << k, z: zb << k }
    }

    pub fn x_op(n: usize, k: usize) -> Self {
        Self::single(n, k, 'X')
    }

    pub fn y_op(n: usize, k: usize) -> Self {
        Self::single(n, k, 'Y')
    }

    pub fn z_op(n: usize, k: usize) -> Self {
        Self::single(n, k, 'Z')
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    /// Exponent of i in the internal XZ-ordered form.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn x_bit(&self, k: usize) -> bool {
        (self.x >> k) & 1 == 1
    }

    pub fn z_bit(&self, k: usize) -> bool {
        (self.z >> k) & 1 == 1
    }

    /// Multiply by i^k.
    pub fn scale_phase(&self, k: u8) -> Self {
        PauliWord { phase: (self.phase + k) & 3, ..*self }
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Exponent of i once every XZ pair is rewritten as a Y letter; this is
    /// the phase shown by the textual form.
    pub fn display_phase(&self) -> u8 {
        (self.phase as u32 + 4 * MAX_QUBITS as u32 - self.y_count()) as u8 & 3
    }

    pub fn mul(&self, rhs: &PauliWord) -> Result<PauliWord, PauliError> {
        if self.n != rhs.n {
            return Err(PauliError::SizeMismatch(self.n, rhs.n));
        }
        let swaps = (self.z & rhs.x).count_ones() as u8;
        Ok(PauliWord {
            n: self.n,
            phase: (self.phase + rhs.phase + 2 * (swaps & 1)) & 3,
            x: self.x ^ rhs.x,
            z: self.z ^ rhs.z,
        })
    }

    pub fn adjoint(&self) -> PauliWord {
        let flips = (self.x & self.z).count_ones() as u8;
        PauliWord {
            phase: (4 - self.phase + 2 * (flips & 1)) & 3,
            ..*self
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.adjoint() == *self
    }

    /// +1 when the words commute, -1 when they anticommute.
    pub fn commutation_sign(&self, rhs: &PauliWord) -> Result<i8, PauliError> {
        if self.n != rhs.n {
            return Err(PauliError::SizeMismatch(self.n, rhs.n));
        }
        let s = (self.x & rhs.z).count_ones() + (rhs.x & self.z).count_ones();
        Ok(if s % 2 == 0 { 1 } else { -1 })
    }

    /// Tensor product; `self` occupies the leading qubits, `rhs` is embedded
    /// starting at offset `self.qubits()`.
    pub fn tensor(&self, rhs: &PauliWord) -> Result<PauliWord, PauliError> {
        let n = self.n + rhs.n;
        if n > MAX_QUBITS {
            return Err(PauliError::TooManyQubits(n, MAX_QUBITS));
        }
        Ok(PauliWord {
            n,
            phase: (self.phase + rhs.phase) & 3,
            x: self.x | (rhs.x << self.n),
            z: self.z | (rhs.z << self.n),
        })
    }

    /// True when the word is i^{2k} times the identity; returns the sign.
    pub fn identity_sign(&self) -> Option<i8> {
        if self.x != 0 || self.z != 0 {
            return None;
        }
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    /// Operator norm of `self - c*I`, computed from the eigenvalues: a word
    /// with nontrivial letter part has spectrum {lambda, -lambda}.
    pub fn distance_to_scalar(&self, c: C64) -> f64 {
        let eig = self.eigenvalues();
        eig.iter().map(|l| (l - c).norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of the word as a matrix (a set of at most two scalars).
    /// The letter part squares to +I or -I depending on the number of XZ
    /// pairs, so its spectrum is {1,-1} or {i,-i}, scaled by the phase.
    pub fn eigenvalues(&self) -> Vec<C64> {
        let ph = [cre(1.0), Complex::new(0.0, 1.0), cre(-1.0), Complex::new(0.0, -1.0)]
            [self.phase as usize];
        if self.x == 0 && self.z == 0 {
            return vec![ph];
        }
        let lam = if self.y_count() % 2 == 1 { ph * Complex::new(0.0, 1.0) } else { ph };
        vec![lam, -lam]
    }

    pub fn to_dense(&self) -> Result<CMatrix, PauliError> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(PauliError::DenseGuard(self.n));
        }
        let i = CMatrix::from_row_slice(2, 2, &[cre(1.0), czero(), czero(), cre(1.0)]);
        let x = CMatrix::from_row_slice(2, 2, &[czero(), cre(1.0), cre(1.0), czero()]);
        let z = CMatrix::from_row_slice(2, 2, &[cre(1.0), czero(), czero(), cre(-1.0)]);
        let xz = CMatrix::from_row_slice(2, 2, &[czero(), cre(-1.0), cre(1.0), czero()]);
        let ph = [cre(1.0), Complex::new(0.0, 1.0), cre(-1.0), Complex::new(0.0, -1.0)]
            [self.phase as usize];
        let mut m = CMatrix::from_row_slice(1, 1, &[ph]);
        for k in 0..self.n {
            let f = match (self.x_bit(k), self.z_bit(k)) {
                (false, false) => &i,
                (true, false) => &x,
                (false, true) => &z,
                (true, true) => &xz,
            };
            m = kron(&m, f);
        }
        Ok(m)
    }
}

impl fmt::Debug for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliWord({self})")
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i*", "-", "-i*"][self.display_phase() as usize];
        if self.n == 0 {
            let scalar = ["1", "i", "-1", "-i"][self.display_phase() as usize];
            return write!(f, "{scalar}");
        }
        write!(f, "{prefix}")?;
        for k in 0..self.n {
            if k > 0 && k % 4 == 0 {
                write!(f, ".")?;
            }
            let letter = match (self.x_bit(k), self.z_bit(k)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            write!(f, "{letter}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliWord {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace() && *c != '.').collect();
        let err = |m: &str| PauliError::Parse(s.to_string(), m.to_string());
        let mut rest = compact.as_str();
        let mut display = 0u8;
        if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        } else if let Some(r) = rest.strip_prefix('-') {
            display = 2;
            rest = r;
        }
        if let Some(r) = rest.strip_prefix('i') {
            display = (display + 1) & 3;
            rest = r;
            rest = rest.strip_prefix('*').unwrap_or(rest);
        }
        if rest == "1" {
            rest = "";
        }
        let mut x = 0u64;
        let mut z = 0u64;
        let mut n = 0usize;
        let mut ys = 0u32;
        for c in rest.chars() {
            if n >= MAX_QUBITS {
                return Err(PauliError::TooManyQubits(n + 1, MAX_QUBITS));
            }
            let (xb, zb) = match c {
                'I' => (0u64, 0u64),
                'X' => (1, 0),
                'Z' => (0, 1),
                'Y' => (1, 1),
                _ => return Err(err(&format!("unexpected character {c:?}"))),
            };
            if xb & zb == 1 {
                ys += 1;
            }
            x |= xb << n;
            z |= zb << n;
            n += 1;
        }
        Ok(PauliWord {
            n,
            phase: ((display as u32 + ys) & 3) as u8,
            x,
            z,
        })
    }
}
