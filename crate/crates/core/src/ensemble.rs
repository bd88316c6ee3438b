//! Exact-weight classical mixtures of stabilizer states, bound to a registry
//! recording which party owns each qubit.
//!
//! Member identity is hidden: without the `introspection` feature there is
//! no way to read which member is which, so protocol code can only react to
//! measurement outcomes.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::density::{DensityError, DensityMatrix, DENSE_QUBIT_CAP};
use crate::dyadic::Dyadic;
use crate::stabilizer::{BellIndex, Gate, PauliString, Sign, StabilizerError, StabilizerState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("mixture weights sum to {0}, not 1")]
    WeightSum(Dyadic),
    #[error("mixture weights must be positive")]
    ZeroWeight,
    #[error("empty mixture")]
    Empty,
    #[error("mixture components have different registries or sizes")]
    RegistryMismatch,
    #[error("unknown party {0}")]
    UnknownParty(String),
    #[error("party {0} listed twice")]
    DuplicateParty(String),
    #[error("party {0} cannot be brought together with itself")]
    SameParty(String),
    #[error("{actor} cannot act on qubit {qubit}, held by {owner} at another site")]
    NonLocal { actor: String, qubit: usize, owner: String },
    #[error("qubit {0} has already been consumed")]
    Consumed(usize),
    #[error("conditional weights are not dyadic")]
    NonDyadic,
    #[error("qubits {0:?} are entangled with the rest in some member")]
    NotDecoupled(Vec<usize>),
}

/// Who holds which qubit, which parties share a site, which qubits have been
/// measured out, and which qubit pairs are still unused singlet channels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PartyRegistry {
    parties: Vec<String>,
    site: Vec<usize>,
    owner: Vec<usize>,
    consumed: Vec<bool>,
    singlets: Vec<(usize, usize)>,
}

impl PartyRegistry {
    /// Parties with no qubits yet, each at its own site.
    pub fn new<S: AsRef<str>>(labels: &[S]) -> Result<Self, EnsembleError> {
        let mut parties: Vec<String> = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            if parties.iter().any(|p| p == l) {
                return Err(EnsembleError::DuplicateParty(l.to_string()));
            }
            parties.push(l.to_string());
        }
        Ok(Self {
            site: (0..parties.len()).collect(),
            parties,
            owner: Vec::new(),
            consumed: Vec::new(),
            singlets: Vec::new(),
        })
    }

    pub fn parties(&self) -> &[String] {
        &self.parties
    }

    pub fn num_qubits(&self) -> usize {
        self.owner.len()
    }

    pub fn party_index(&self, label: &str) -> Result<usize, EnsembleError> {
        self.parties
            .iter()
            .position(|p| p == label)
            .ok_or_else(|| EnsembleError::UnknownParty(label.to_string()))
    }

    pub fn owner(&self, qubit: usize) -> &str {
        &self.parties[self.owner[qubit]]
    }

    pub fn is_consumed(&self, qubit: usize) -> bool {
        self.consumed[qubit]
    }

    /// Unconsumed qubits of `party`, ascending.
    pub fn live_qubits(&self, party: &str) -> Result<Vec<usize>, EnsembleError> {
        let p = self.party_index(party)?;
        Ok((0..self.owner.len())
            .filter(|&q| self.owner[q] == p && !self.consumed[q])
            .collect())
    }

    pub fn co_located(&self, a: &str, b: &str) -> Result<bool, EnsembleError> {
        Ok(self.site[self.party_index(a)?] == self.site[self.party_index(b)?])
    }

    /// Partner of `qubit` if it is one end of a registered, unused singlet.
    pub fn singlet_partner(&self, qubit: usize) -> Option<usize> {
        self.singlets.iter().find_map(|&(a, b)| {
            if a == qubit {
                Some(b)
            } else if b == qubit {
                Some(a)
            } else {
                None
            }
        })
    }

    pub fn unused_singlets(&self) -> &[(usize, usize)] {
        &self.singlets
    }

    /// Gives `party` `count` new qubits, returning their indices.
    pub fn add_qubits(&mut self, party: &str, count: usize) -> Result<Vec<usize>, EnsembleError> {
        let p = self.party_index(party)?;
        let start = self.owner.len();
        self.owner.extend(std::iter::repeat_n(p, count));
        self.consumed.extend(std::iter::repeat_n(false, count));
        Ok((start..start + count).collect())
    }

    fn check_local(&self, actor: &str, qubits: &[usize]) -> Result<(), EnsembleError> {
        let a = self.party_index(actor)?;
        for &q in qubits {
            if q >= self.owner.len() {
                return Err(StabilizerError::QubitOutOfRange {
                    qubit: q,
                    n: self.owner.len(),
                }
                .into());
            }
            if self.consumed[q] {
                return Err(EnsembleError::Consumed(q));
            }
            if self.site[self.owner[q]] != self.site[a] {
                return Err(EnsembleError::NonLocal {
                    actor: actor.to_string(),
                    qubit: q,
                    owner: self.owner(q).to_string(),
                });
            }
        }
        Ok(())
    }

    /// Records `(a, b)` as a pre-shared singlet channel for resource accounting.
    pub fn register_singlet(&mut self, a: usize, b: usize) {
        self.singlets.push((a.min(b), a.max(b)));
        self.singlets.sort_unstable();
    }

    /// Marks the singlet containing `qubit` as used; returns whether there was one.
    pub(crate) fn consume_singlet(&mut self, qubit: usize) -> bool {
        let before = self.singlets.len();
        self.singlets.retain(|&(a, b)| a != qubit && b != qubit);
        self.singlets.len() != before
    }
}

/// A measurement an ensemble can branch on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Measurement {
    Pauli(PauliString),
    Bell(usize, usize),
}

impl Measurement {
    fn qubits(&self) -> Vec<usize> {
        match self {
            Measurement::Pauli(p) => p.support(),
            Measurement::Bell(a, b) => vec![*a, *b],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Outcome {
    Pauli(Sign),
    Bell(BellIndex),
}

#[derive(Clone, Debug)]
pub struct MeasurementBranch {
    pub outcome: Outcome,
    pub probability: Dyadic,
    pub ensemble: Ensemble,
}

/// A classical mixture `Σ w_i |ψ_i⟩⟨ψ_i|` with exact dyadic weights.
#[derive(Clone, Debug)]
pub struct Ensemble {
    members: Vec<(Dyadic, StabilizerState)>,
    registry: PartyRegistry,
}

impl PartialEq for Ensemble {
    fn eq(&self, other: &Self) -> bool {
        self.registry == other.registry && self.fingerprint() == other.fingerprint()
    }
}

impl Ensemble {
    pub fn pure(state: StabilizerState, registry: PartyRegistry) -> Result<Self, EnsembleError> {
        if state.num_qubits() != registry.num_qubits() {
            return Err(EnsembleError::RegistryMismatch);
        }
        Ok(Self {
            members: vec![(Dyadic::ONE, state)],
            registry,
        })
    }

    /// Flattened weighted union. Weights must be positive and sum to exactly 1.
    pub fn mix(items: Vec<(Dyadic, Ensemble)>) -> Result<Self, EnsembleError> {
        let Some(registry) = items.first().map(|(_, e)| e.registry.clone()) else {
            return Err(EnsembleError::Empty);
        };
        let total: Dyadic = items.iter().map(|(w, _)| *w).sum();
        if total != Dyadic::ONE {
            return Err(EnsembleError::WeightSum(total));
        }
        let mut members = Vec::new();
        for (w, e) in items {
            if w.is_zero() {
                return Err(EnsembleError::ZeroWeight);
            }
            if e.registry != registry {
                return Err(EnsembleError::RegistryMismatch);
            }
            members.extend(e.members.into_iter().map(|(v, s)| (w * v, s)));
        }
        Ok(Self { members, registry })
    }

    pub fn registry(&self) -> &PartyRegistry {
        &self.registry
    }

    pub(crate) fn registry_mut(&mut self) -> &mut PartyRegistry {
        &mut self.registry
    }

    pub fn num_qubits(&self) -> usize {
        self.registry.num_qubits()
    }

    pub fn num_members(&self) -> usize {
        self.members.len()
    }

    pub fn live_qubits(&self, party: &str) -> Result<Vec<usize>, EnsembleError> {
        self.registry.live_qubits(party)
    }

    /// Live qubits of the listed parties, concatenated in that order.
    pub fn live_qubits_of<S: AsRef<str>>(&self, parties: &[S]) -> Result<Vec<usize>, EnsembleError> {
        let mut out = Vec::new();
        for p in parties {
            out.extend(self.registry.live_qubits(p.as_ref())?);
        }
        Ok(out)
    }

    fn try_map(
        &self,
        f: impl Fn(&StabilizerState) -> Result<StabilizerState, StabilizerError>,
    ) -> Result<Self, EnsembleError> {
        let members = self
            .members
            .iter()
            .map(|(w, s)| Ok((*w, f(s)?)))
            .collect::<Result<_, StabilizerError>>()?;
        Ok(Self {
            members,
            registry: self.registry.clone(),
        })
    }

    /// Applies a Clifford circuit to every member. No locality check.
    pub fn map_members(&self, circuit: &[Gate]) -> Result<Self, EnsembleError> {
        self.try_map(|s| s.apply_circuit(circuit))
    }

    /// Applies a circuit on behalf of `actor`, who must hold every target
    /// (or be co-located with its holder).
    pub fn apply_local(&self, actor: &str, circuit: &[Gate]) -> Result<Self, EnsembleError> {
        let qubits: Vec<usize> = circuit.iter().flat_map(|g| g.qubits()).collect();
        self.registry.check_local(actor, &qubits)?;
        self.map_members(circuit)
    }

    /// Conjugates by a Pauli string supported on `actor`'s qubits.
    pub fn apply_pauli_local(&self, actor: &str, p: &PauliString) -> Result<Self, EnsembleError> {
        self.registry.check_local(actor, &p.support())?;
        self.try_map(|s| s.apply_pauli(p))
    }

    /// Expands every member over the measurement's outcomes. Conditional
    /// ensembles carry renormalized exact weights; outcomes are sorted.
    pub fn branch_measure(&self, m: &Measurement) -> Result<Vec<MeasurementBranch>, EnsembleError> {
        let mut by_outcome: BTreeMap<Outcome, Vec<(Dyadic, StabilizerState)>> = BTreeMap::new();
        for (w, s) in &self.members {
            match m {
                Measurement::Pauli(p) => {
                    for b in s.measure_pauli(p)? {
                        by_outcome
                            .entry(Outcome::Pauli(b.outcome))
                            .or_default()
                            .push((*w * b.probability, b.state));
                    }
                }
                Measurement::Bell(qa, qb) => {
                    for b in s.bell_measure(*qa, *qb)? {
                        by_outcome
                            .entry(Outcome::Bell(b.outcome))
                            .or_default()
                            .push((*w * b.probability, b.state));
                    }
                }
            }
        }
        by_outcome
            .into_iter()
            .map(|(outcome, joint)| {
                let probability: Dyadic = joint.iter().map(|(w, _)| *w).sum();
                let members = joint
                    .into_iter()
                    .map(|(w, s)| Ok((w.checked_div(probability).ok_or(EnsembleError::NonDyadic)?, s)))
                    .collect::<Result<_, EnsembleError>>()?;
                Ok(MeasurementBranch {
                    outcome,
                    probability,
                    ensemble: Self {
                        members,
                        registry: self.registry.clone(),
                    },
                })
            })
            .collect()
    }

    /// [`Ensemble::branch_measure`] on behalf of `actor`.
    pub fn measure_local(&self, actor: &str, m: &Measurement) -> Result<Vec<MeasurementBranch>, EnsembleError> {
        self.registry.check_local(actor, &m.qubits())?;
        self.branch_measure(m)
    }

    /// `Σ w_i Tr_rest |ψ_i⟩⟨ψ_i|` on `qubits`, in the listed order.
    pub fn densify(&self, qubits: &[usize]) -> Result<DensityMatrix, EnsembleError> {
        if qubits.len() > DENSE_QUBIT_CAP {
            return Err(DensityError::TooLarge(qubits.len()).into());
        }
        let dim = 1usize << qubits.len();
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for (w, s) in &self.members {
            m += s.reduced_density(qubits)?.matrix() * num_complex::Complex64::new(w.to_f64(), 0.0);
        }
        Ok(DensityMatrix::from_matrix_unchecked(qubits.len(), m))
    }

    /// Merges members with equal canonical tableaux; members come out sorted
    /// by canonical form, so the result is independent of input order.
    pub fn canonical_merge(&self) -> Self {
        let mut merged: BTreeMap<Vec<PauliString>, (Dyadic, StabilizerState)> = BTreeMap::new();
        for (w, s) in &self.members {
            let canon = s.canonical();
            let key = canon.generators().to_vec();
            merged
                .entry(key)
                .and_modify(|(acc, _)| *acc = *acc + *w)
                .or_insert((*w, canon));
        }
        Self {
            members: merged.into_values().collect(),
            registry: self.registry.clone(),
        }
    }

    /// Order-independent identity of the mixture, suitable as a map key.
    pub(crate) fn fingerprint(&self) -> Vec<(Vec<PauliString>, Dyadic)> {
        self.canonical_merge()
            .members
            .into_iter()
            .map(|(w, s)| (s.generators().to_vec(), w))
            .collect()
    }

    /// Appends `count` qubits in `|0⟩` owned by `party`.
    pub fn add_qubits(&self, party: &str, count: usize) -> Result<(Self, Vec<usize>), EnsembleError> {
        let mut registry = self.registry.clone();
        let added = registry.add_qubits(party, count)?;
        let members = self.members.iter().map(|(w, s)| (*w, s.extended(count))).collect();
        Ok((Self { members, registry }, added))
    }

    /// Shared-randomness preparation: with probability `w_k` every listed
    /// party runs its own local circuit from choice `k`. Which `k` occurred
    /// is known only to those parties and is not recorded anywhere.
    pub fn correlated_preparation(
        &self,
        choices: &[(Dyadic, Vec<(&str, Vec<Gate>)>)],
    ) -> Result<Self, EnsembleError> {
        let items = choices
            .iter()
            .map(|(w, locals)| {
                let mut e = self.clone();
                for (actor, circuit) in locals {
                    e = e.apply_local(actor, circuit)?;
                }
                Ok((*w, e))
            })
            .collect::<Result<Vec<_>, EnsembleError>>()?;
        Self::mix(items)
    }

    /// Resets measured-out qubits to `|0⟩` and flags them consumed. They must
    /// be decoupled from the rest in every member.
    pub fn discard(&self, actor: &str, qubits: &[usize]) -> Result<Self, EnsembleError> {
        self.registry.check_local(actor, qubits)?;
        let mut out = self
            .try_map(|s| s.reset_decoupled(qubits))
            .map_err(|e| match e {
                EnsembleError::Stabilizer(StabilizerError::Entangled(q)) => EnsembleError::NotDecoupled(q),
                other => other,
            })?;
        for &q in qubits {
            out.registry.consumed[q] = true;
        }
        Ok(out)
    }

    /// Moves every party at `y`'s site to `x`'s site. No quantum operation.
    pub fn bring_together(&self, x: &str, y: &str) -> Result<Self, EnsembleError> {
        let (xi, yi) = (self.registry.party_index(x)?, self.registry.party_index(y)?);
        if xi == yi {
            return Err(EnsembleError::SameParty(x.to_string()));
        }
        let mut out = self.clone();
        let (to, from) = (out.registry.site[xi], out.registry.site[yi]);
        for s in &mut out.registry.site {
            if *s == from {
                *s = to;
            }
        }
        Ok(out)
    }

    /// Product of two ensembles. Parties with the same label are the same
    /// party; `other`'s qubits are appended after `self`'s.
    pub fn tensor(&self, other: &Ensemble) -> Result<Self, EnsembleError> {
        let mut registry = self.registry.clone();
        let offset = registry.num_qubits();
        let mut remap = Vec::with_capacity(other.registry.parties.len());
        for label in &other.registry.parties {
            let idx = match registry.party_index(label) {
                Ok(i) => i,
                Err(_) => {
                    registry.parties.push(label.clone());
                    let fresh = registry.site.iter().max().map_or(0, |m| m + 1);
                    registry.site.push(fresh);
                    registry.parties.len() - 1
                }
            };
            remap.push(idx);
        }
        registry.owner.extend(other.registry.owner.iter().map(|&p| remap[p]));
        registry.consumed.extend_from_slice(&other.registry.consumed);
        for &(a, b) in &other.registry.singlets {
            registry.register_singlet(a + offset, b + offset);
        }
        let mut members = Vec::with_capacity(self.members.len() * other.members.len());
        for (wa, a) in &self.members {
            for (wb, b) in &other.members {
                members.push((*wa * *wb, a.tensor(b)));
            }
        }
        Ok(Self { members, registry })
    }

    /// The mixture on `qubits` (in the listed order), provided every member
    /// factorizes across that subset, e.g. because the rest is consumed.
    pub fn select(&self, qubits: &[usize]) -> Result<Self, EnsembleError> {
        let mut members = Vec::with_capacity(self.members.len());
        for (w, s) in &self.members {
            let r = s
                .restrict(qubits)?
                .ok_or_else(|| EnsembleError::NotDecoupled(qubits.to_vec()))?;
            members.push((*w, r));
        }
        let old = &self.registry;
        let mut registry = PartyRegistry {
            parties: old.parties.clone(),
            site: old.site.clone(),
            owner: qubits.iter().map(|&q| old.owner[q]).collect(),
            consumed: qubits.iter().map(|&q| old.consumed[q]).collect(),
            singlets: Vec::new(),
        };
        let pos = |q: usize| qubits.iter().position(|&x| x == q);
        for &(a, b) in &old.singlets {
            if let (Some(i), Some(j)) = (pos(a), pos(b)) {
                registry.register_singlet(i, j);
            }
        }
        Ok(Self { members, registry })
    }

    /// The weighted member list. Only available for testing: protocol code
    /// must never depend on which member it is acting on.
    #[cfg(any(test, feature = "introspection"))]
    pub fn hidden_members(&self) -> &[(Dyadic, StabilizerState)] {
        &self.members
    }
}
