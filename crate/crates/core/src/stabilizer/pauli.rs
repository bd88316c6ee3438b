//! Phased *n*-qubit Pauli operators in the symplectic bit representation.
//!
//! A `PauliString` is `i^k · P_0 ⊗ P_1 ⊗ … ⊗ P_{n-1}` where each letter is
//! encoded by one X bit and one Z bit: `(0,0) = I`, `(1,0) = X`, `(1,1) = Y`,
//! `(0,1) = Z`. Note that the letter `Y` is stored directly (not as `XZ`), so
//! a string is Hermitian exactly when `k` is even.
//!
//! Bits are packed 64 to a word; all products and commutation checks work on
//! whole words.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::StabilizerError;

/// A single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Global phase of a Pauli string, a power of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_exponent(k: u8) -> Self {
        match k & 3 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn exponent(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        i_pow(self.exponent())
    }
}

pub(crate) fn i_pow(k: u8) -> Complex64 {
    match k & 3 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    // exponent of i, always reduced mod 4
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    /// `letter` on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, letter: Pauli) -> Self {
        let mut p = Self::identity(n);
        p.set(q, letter);
        p
    }

    /// Builds a Hermitian string from `(qubit, letter)` pairs.
    pub fn from_letters(n: usize, letters: &[(usize, Pauli)]) -> Self {
        let mut p = Self::identity(n);
        for &(q, l) in letters {
            p.set(q, l);
        }
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> Phase {
        Phase::from_exponent(self.phase)
    }

    pub(crate) fn phase_exponent(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase.exponent();
        self
    }

    pub(crate) fn add_phase(&mut self, k: u8) {
        self.phase = (self.phase + k) & 3;
    }

    pub fn negated(&self) -> Self {
        let mut p = self.clone();
        p.add_phase(2);
        p
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase & 1 == 0
    }

    /// `+1` or `-1` for Hermitian strings.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn letter(&self, q: usize) -> Pauli {
        let (w, b) = (q / 64, q % 64);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, q: usize, letter: Pauli) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (w, b) = (q / 64, q % 64);
        let (xb, zb) = letter.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
    }

    pub(crate) fn x_bit(&self, q: usize) -> bool {
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    pub(crate) fn z_bit(&self, q: usize) -> bool {
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    pub(crate) fn flip_x(&mut self, q: usize) {
        self.x[q / 64] ^= 1 << (q % 64);
    }

    pub(crate) fn flip_z(&mut self, q: usize) {
        self.z[q / 64] ^= 1 << (q % 64);
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.letter(q) != Pauli::I).collect()
    }

    /// True when the string acts as identity outside `mask` (one flag per qubit).
    pub(crate) fn supported_within(&self, mask: &[u64]) -> bool {
        self.x
            .iter()
            .zip(&self.z)
            .zip(mask)
            .all(|((x, z), m)| (x | z) & !m == 0)
    }

    /// Parity of the symplectic inner product.
    pub fn commutes_with(&self, other: &Self) -> bool {
        debug_assert_eq!(self.n, other.n);
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones() & 1;
        }
        parity == 0
    }

    /// In-place right multiplication: `self ← self · rhs`.
    pub fn mul_assign_right(&mut self, rhs: &Self) {
        debug_assert_eq!(self.n, rhs.n);
        let mut plus = 0u32;
        let mut minus = 0u32;
        for i in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], rhs.x[i], rhs.z[i]);
            let (px1, py1, pz1) = (x1 & !z1, x1 & z1, !x1 & z1);
            let (px2, py2, pz2) = (x2 & !z2, x2 & z2, !x2 & z2);
            // XY = iZ, YZ = iX, ZX = iY and the reverse orders give -i
            plus += ((px1 & py2) | (py1 & pz2) | (pz1 & px2)).count_ones();
            minus += ((py1 & px2) | (pz1 & py2) | (px1 & pz2)).count_ones();
            self.x[i] = x1 ^ x2;
            self.z[i] = z1 ^ z2;
        }
        let k = (self.phase as u32 + rhs.phase as u32 + plus + 3 * minus) & 3;
        self.phase = k as u8;
    }

    /// Places this string on `targets` of a larger register of `n` qubits:
    /// qubit `i` of `self` lands on `targets[i]`.
    pub fn embed(&self, n: usize, targets: &[usize]) -> Result<Self, StabilizerError> {
        if targets.len() != self.n {
            return Err(StabilizerError::DimensionMismatch {
                expected: self.n,
                found: targets.len(),
            });
        }
        let mut out = Self::identity(n);
        for (i, &t) in targets.iter().enumerate() {
            if t >= n {
                return Err(StabilizerError::QubitOutOfRange { qubit: t, n });
            }
            out.set(t, self.letter(i));
        }
        out.phase = self.phase;
        Ok(out)
    }

    /// Restricts to `qubits`, dropping letters elsewhere; the phase is kept.
    pub fn project(&self, qubits: &[usize]) -> Self {
        let mut out = Self::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            out.set(i, self.letter(q));
        }
        out.phase = self.phase;
        out
    }

    /// Appends `extra` identity qubits.
    pub fn extended(&self, extra: usize) -> Self {
        let mut out = Self::identity(self.n + extra);
        for q in 0..self.n {
            out.set(q, self.letter(q));
        }
        out.phase = self.phase;
        out
    }

    /// Action on a computational basis index over `qubits` (big-endian: the
    /// first listed qubit is the most significant bit). Returns the image
    /// index and its amplitude factor.
    pub(crate) fn act_on_basis(&self, qubits: &[usize], b: usize) -> (usize, Complex64) {
        let k = qubits.len();
        let mut out = b;
        let mut exp = self.phase as u32;
        for (i, &q) in qubits.iter().enumerate() {
            let bit = (b >> (k - 1 - i)) & 1;
            let (xb, zb) = (self.x_bit(q), self.z_bit(q));
            if xb && zb {
                exp += 1;
            }
            if zb && bit == 1 {
                exp += 2;
            }
            if xb {
                out ^= 1 << (k - 1 - i);
            }
        }
        (out, i_pow((exp & 3) as u8))
    }
}

impl Mul for &PauliString {
    type Output = PauliString;

    fn mul(self, rhs: &PauliString) -> PauliString {
        let mut out = self.clone();
        out.mul_assign_right(rhs);
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = StabilizerError;

    /// Parses strings such as `"XZ"`, `"-XIY"`, `"+iZZ"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else {
            (0, s)
        };
        let mut p = Self::identity(body.chars().count());
        for (q, c) in body.chars().enumerate() {
            let letter = match c {
                'I' | '_' | '.' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(StabilizerError::Parse(format!("unexpected letter {other:?}"))),
            };
            p.set(q, letter);
        }
        p.phase = phase;
        Ok(p)
    }
}
