//! Exact pure-state stabilizer simulation.
//!
//! Every pure state appearing in the protocols (Bell pairs, products of Bell
//! pairs, and everything reachable from them by Clifford gates and Pauli
//! measurements) is a stabilizer state, so the simulation is exact: branch
//! probabilities are dyadic and post-measurement states are tableaux.

mod pauli;
mod state;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use pauli::{Pauli, PauliString, Phase};
pub use state::{BellBranch, Gate, PauliBranch, StabilizerState};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StabilizerError {
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("gate or measurement targets qubit {0} twice")]
    DuplicateTargets(usize),
    #[error("expected {expected} qubits, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator {0} is not Hermitian")]
    NonHermitian(String),
    #[error("generators {0} and {1} anticommute")]
    Anticommuting(String, String),
    #[error("generators are not independent")]
    Dependent,
    #[error("{qubits} qubits exceeds the dense cap of {cap}")]
    TooLarge { qubits: usize, cap: usize },
    #[error("qubits {0:?} are entangled with the rest of the register")]
    Entangled(Vec<usize>),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Outcome of a two-valued Pauli measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// The four Bell states, ordered `Ψ⁺, Ψ⁻, Φ⁺, Φ⁻`.
///
/// Each is fixed by the signs of its `XX` and `ZZ` stabilizers:
/// `Φ⁺ ↔ (+,+)`, `Ψ⁺ ↔ (+,−)`, `Φ⁻ ↔ (−,+)`, `Ψ⁻ ↔ (−,−)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellIndex {
    #[serde(rename = "Psi+")]
    PsiPlus,
    #[serde(rename = "Psi-")]
    PsiMinus,
    #[serde(rename = "Phi+")]
    PhiPlus,
    #[serde(rename = "Phi-")]
    PhiMinus,
}

impl BellIndex {
    pub const ALL: [BellIndex; 4] = [
        BellIndex::PsiPlus,
        BellIndex::PsiMinus,
        BellIndex::PhiPlus,
        BellIndex::PhiMinus,
    ];

    /// `(s_XX, s_ZZ)`.
    pub fn signs(self) -> (Sign, Sign) {
        match self {
            BellIndex::PhiPlus => (Sign::Plus, Sign::Plus),
            BellIndex::PsiPlus => (Sign::Plus, Sign::Minus),
            BellIndex::PhiMinus => (Sign::Minus, Sign::Plus),
            BellIndex::PsiMinus => (Sign::Minus, Sign::Minus),
        }
    }

    pub fn from_signs(xx: Sign, zz: Sign) -> Self {
        match (xx, zz) {
            (Sign::Plus, Sign::Plus) => BellIndex::PhiPlus,
            (Sign::Plus, Sign::Minus) => BellIndex::PsiPlus,
            (Sign::Minus, Sign::Plus) => BellIndex::PhiMinus,
            (Sign::Minus, Sign::Minus) => BellIndex::PsiMinus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BellIndex::PsiPlus => "Psi+",
            BellIndex::PsiMinus => "Psi-",
            BellIndex::PhiPlus => "Phi+",
            BellIndex::PhiMinus => "Phi-",
        }
    }

    /// Local circuit taking `|00⟩` on `(a, b)` to this Bell state.
    pub fn preparation(self, a: usize, b: usize) -> Vec<Gate> {
        let mut gates = vec![Gate::H(a), Gate::Cnot(a, b)];
        let (sx, sz) = self.signs();
        // Z on a flips the XX sign, X on b flips the ZZ sign
        if sx == Sign::Minus {
            gates.push(Gate::Z(a));
        }
        if sz == Sign::Minus {
            gates.push(Gate::X(b));
        }
        gates
    }
}

impl fmt::Display for BellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Two-qubit Bell state with stabilizers `s_XX·XX`, `s_ZZ·ZZ`.
pub fn prepare_bell(index: BellIndex) -> StabilizerState {
    let (sx, sz) = index.signs();
    let mut xx: PauliString = "XX".parse().expect("literal");
    let mut zz: PauliString = "ZZ".parse().expect("literal");
    if sx == Sign::Minus {
        xx = xx.negated();
    }
    if sz == Sign::Minus {
        zz = zz.negated();
    }
    StabilizerState::from_generators(2, vec![xx, zz]).expect("Bell stabilizers are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_stabilizers() {
        assert_eq!(prepare_bell(BellIndex::PhiPlus), StabilizerState::from_strs(&["+XX", "+ZZ"]).unwrap());
        assert_eq!(prepare_bell(BellIndex::PsiMinus), StabilizerState::from_strs(&["-XX", "-ZZ"]).unwrap());
        assert_eq!(prepare_bell(BellIndex::PsiPlus), StabilizerState::from_strs(&["+XX", "-ZZ"]).unwrap());
        assert_eq!(prepare_bell(BellIndex::PhiMinus), StabilizerState::from_strs(&["-XX", "+ZZ"]).unwrap());
    }

    #[test]
    fn sign_bijection() {
        for i in BellIndex::ALL {
            let (x, z) = i.signs();
            assert_eq!(BellIndex::from_signs(x, z), i);
        }
    }

    #[test]
    fn preparation_circuits_match_definitions() {
        for i in BellIndex::ALL {
            let s = StabilizerState::zero(2).apply_circuit(&i.preparation(0, 1)).unwrap();
            assert_eq!(s, prepare_bell(i), "{i}");
        }
    }

    #[test]
    fn bell_measurement_identifies_each_bell_state() {
        for i in BellIndex::ALL {
            let branches = prepare_bell(i).bell_measure(0, 1).unwrap();
            assert_eq!(branches.len(), 1);
            assert_eq!(branches[0].outcome, i);
            assert_eq!(branches[0].probability, crate::dyadic::Dyadic::ONE);
        }
    }

    #[test]
    fn index_ordering() {
        let mut sorted = BellIndex::ALL;
        sorted.sort();
        assert_eq!(sorted, [BellIndex::PsiPlus, BellIndex::PsiMinus, BellIndex::PhiPlus, BellIndex::PhiMinus]);
    }
}
