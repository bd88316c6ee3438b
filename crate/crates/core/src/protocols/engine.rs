use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::correction::{Announcement, CorrectionTable};
use super::transcript::{Event, Transcript};
use super::ProtocolError;
use crate::density::DensityMatrix;
use crate::dyadic::Dyadic;
use crate::ensemble::{Ensemble, Measurement, Outcome, PartyRegistry};
use crate::stabilizer::{BellIndex, Gate, Pauli, PauliString, Phase};

/// Where the correction for a Bell step goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrectionMode {
    /// The receiver applies it as soon as the outcome is announced.
    Immediate,
    /// It is folded into the Pauli frame and applied by [`Protocol::apply_frames`].
    Deferred,
}

/// A class of outcome histories that leave the same state and the same
/// pending frame.
#[derive(Clone, Debug)]
pub struct Branch {
    probability: Dyadic,
    histories: u64,
    frame: PauliString,
    state: Ensemble,
}

impl Branch {
    pub fn probability(&self) -> Dyadic {
        self.probability
    }

    /// Number of distinct announced-outcome sequences merged into this branch.
    pub fn histories(&self) -> u64 {
        self.histories
    }

    pub fn frame(&self) -> &PauliString {
        &self.frame
    }

    pub fn state(&self) -> &Ensemble {
        &self.state
    }
}

/// An LOCC run tracked exhaustively over announced outcomes (or along one
/// seeded random path in sampled mode).
#[derive(Clone, Debug)]
pub struct Protocol {
    branches: Vec<Branch>,
    transcript: Transcript,
    sampler: Option<ChaCha8Rng>,
    table: CorrectionTable,
}

impl Protocol {
    pub fn new(state: Ensemble) -> Self {
        let n = state.num_qubits();
        Self {
            branches: vec![Branch {
                probability: Dyadic::ONE,
                histories: 1,
                frame: PauliString::identity(n),
                state: state.canonical_merge(),
            }],
            transcript: Transcript::default(),
            sampler: None,
            table: CorrectionTable::singlet().clone(),
        }
    }

    /// Uses `table` instead of the singlet table for every correction.
    pub fn with_table(mut self, table: CorrectionTable) -> Self {
        self.table = table;
        self
    }

    /// Follows a single randomly drawn outcome at every measurement.
    pub fn sampled(state: Ensemble, seed: u64) -> Self {
        let mut p = Self::new(state);
        p.reseed(seed);
        p
    }

    /// Switches to sampled mode from here on.
    pub fn reseed(&mut self, seed: u64) {
        self.sampler = Some(ChaCha8Rng::seed_from_u64(seed));
    }

    pub fn is_sampled(&self) -> bool {
        self.sampler.is_some()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn transcript_mut(&mut self) -> &mut Transcript {
        &mut self.transcript
    }

    pub fn registry(&self) -> &PartyRegistry {
        self.branches[0].state.registry()
    }

    pub fn num_qubits(&self) -> usize {
        self.registry().num_qubits()
    }

    fn map_states(&mut self, f: impl Fn(&Ensemble) -> Result<Ensemble, ProtocolError>) -> Result<(), ProtocolError> {
        for b in &mut self.branches {
            b.state = f(&b.state)?;
        }
        Ok(())
    }

    pub fn add_qubits(&mut self, party: &str, count: usize) -> Result<Vec<usize>, ProtocolError> {
        let mut added = Vec::new();
        for b in &mut self.branches {
            let (e, q) = b.state.add_qubits(party, count)?;
            b.state = e;
            b.frame = b.frame.extended(count);
            added = q;
        }
        Ok(added)
    }

    pub fn local(&mut self, actor: &str, circuit: &[Gate]) -> Result<(), ProtocolError> {
        self.map_states(|e| Ok(e.apply_local(actor, circuit)?))
    }

    /// Shared-randomness preparation; see [`Ensemble::correlated_preparation`].
    pub fn correlated_preparation(
        &mut self,
        choices: &[(Dyadic, Vec<(&str, Vec<Gate>)>)],
        detail: &str,
    ) -> Result<(), ProtocolError> {
        self.map_states(|e| Ok(e.correlated_preparation(choices)?.canonical_merge()))?;
        let mut actors: Vec<String> = Vec::new();
        let mut qubits: Vec<usize> = Vec::new();
        if let Some((_, locals)) = choices.first() {
            for (a, c) in locals {
                if !actors.iter().any(|x| x == a) {
                    actors.push(a.to_string());
                }
                qubits.extend(c.iter().flat_map(|g| g.qubits()));
            }
        }
        qubits.sort_unstable();
        qubits.dedup();
        self.transcript.push(Event::Prepare {
            actors,
            qubits,
            detail: detail.to_string(),
        });
        Ok(())
    }

    pub fn bring_together(&mut self, x: &str, y: &str) -> Result<(), ProtocolError> {
        self.map_states(|e| Ok(e.bring_together(x, y)?))?;
        self.transcript.push(Event::BringTogether {
            parties: [x.to_string(), y.to_string()],
        });
        Ok(())
    }

    /// `actor` Bell-measures `pair`, discards it and announces the outcome to
    /// the holder of `correct_at`, who corrects by the table (now or
    /// via the frame). If `pair.1` is one end of an unused singlet, that
    /// singlet counts as consumed.
    pub fn bell_step(
        &mut self,
        actor: &str,
        pair: (usize, usize),
        correct_at: usize,
        mode: CorrectionMode,
    ) -> Result<(), ProtocolError> {
        let table = &self.table;
        let registry = self.registry();
        let receiver = registry.owner(correct_at).to_string();
        let uses_singlet = registry.singlet_partner(pair.1).is_some();
        let id = self.transcript.next_announcement();
        let n = self.num_qubits();

        let mut next = Vec::new();
        let mut seen: Vec<BellIndex> = Vec::new();
        let mut applied: Vec<(BellIndex, Pauli)> = Vec::new();
        for branch in &self.branches {
            let measured = branch.state.measure_local(actor, &Measurement::Bell(pair.0, pair.1))?;
            let measured = match &mut self.sampler {
                Some(rng) => vec![draw(rng, measured)],
                None => measured,
            };
            for mb in measured {
                let Outcome::Bell(outcome) = mb.outcome else {
                    unreachable!("Bell measurement yields Bell outcomes")
                };
                let announcement = Announcement::new(id, outcome);
                let sigma = table.correction(&announcement);
                if !seen.contains(&outcome) {
                    seen.push(outcome);
                    applied.push((outcome, sigma));
                }
                let mut state = mb.ensemble.discard(actor, &[pair.0, pair.1])?;
                let mut frame = branch.frame.clone();
                let fix = PauliString::single(n, correct_at, sigma);
                match mode {
                    CorrectionMode::Immediate => state = state.apply_pauli_local(&receiver, &fix)?,
                    CorrectionMode::Deferred => frame = (&frame * &fix).with_phase(Phase::PlusOne),
                }
                if uses_singlet {
                    state.registry_mut().consume_singlet(pair.1);
                }
                next.push(Branch {
                    probability: branch.probability * mb.probability,
                    histories: branch.histories,
                    frame,
                    state,
                });
            }
        }
        if uses_singlet {
            self.transcript.consume_singlet();
        }
        seen.sort();
        applied.sort();
        self.transcript.push(Event::BellMeasure {
            actor: actor.to_string(),
            qubits: [pair.0, pair.1],
            outcomes: seen,
        });
        self.transcript.push(Event::Announce {
            id,
            from: actor.to_string(),
            to: receiver.clone(),
        });
        self.transcript.push(Event::Correct {
            actor: receiver,
            qubit: correct_at,
            announcement: id,
            deferred: mode == CorrectionMode::Deferred,
            applied,
        });
        self.branches = next;
        self.regroup();
        Ok(())
    }

    /// Standard teleportation of `source` over `channel = (sender half,
    /// receiver half)` with an immediate correction.
    pub fn teleport(&mut self, actor: &str, source: usize, channel: (usize, usize)) -> Result<(), ProtocolError> {
        self.bell_step(actor, (source, channel.0), channel.1, CorrectionMode::Immediate)
    }

    /// Every holder applies its share of the pending frame.
    pub fn apply_frames(&mut self) -> Result<(), ProtocolError> {
        let mut touched: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for b in &mut self.branches {
            let mut by_owner: BTreeMap<String, Vec<usize>> = BTreeMap::new();
            for q in b.frame.support() {
                by_owner.entry(b.state.registry().owner(q).to_string()).or_default().push(q);
            }
            for (owner, qubits) in by_owner {
                let part = b.frame.project(&qubits).embed(b.frame.num_qubits(), &qubits)?;
                b.state = b.state.apply_pauli_local(&owner, &part)?;
                touched.entry(owner).or_default().extend(qubits);
            }
            b.frame = PauliString::identity(b.frame.num_qubits());
        }
        for (actor, mut qubits) in touched {
            qubits.sort_unstable();
            qubits.dedup();
            self.transcript.push(Event::ApplyFrame { actor, qubits });
        }
        self.regroup();
        Ok(())
    }

    fn regroup(&mut self) {
        let mut groups: BTreeMap<(Vec<(Vec<PauliString>, Dyadic)>, PauliString), Branch> = BTreeMap::new();
        for b in self.branches.drain(..) {
            let state = b.state.canonical_merge();
            let key = (state.fingerprint(), b.frame.clone());
            groups
                .entry(key)
                .and_modify(|g| {
                    g.probability = g.probability + b.probability;
                    g.histories += b.histories;
                })
                .or_insert(Branch { state, ..b });
        }
        self.branches = groups.into_values().collect();
    }

    pub fn has_pending_frame(&self) -> bool {
        self.branches.iter().any(|b| !b.frame.is_identity())
    }

    /// The single live qubit of `party`.
    pub fn sole_qubit(&self, party: &str) -> Result<usize, ProtocolError> {
        let live = self.registry().live_qubits(party)?;
        match live.as_slice() {
            [q] => Ok(*q),
            _ => Err(ProtocolError::LiveQubits {
                party: party.to_string(),
                count: live.len(),
            }),
        }
    }

    /// Per-branch density matrix of the given qubits (after all corrections).
    pub fn branch_states(&self, qubits: &[usize]) -> Result<Vec<(Dyadic, DensityMatrix)>, ProtocolError> {
        if self.has_pending_frame() {
            return Err(ProtocolError::PendingFrame);
        }
        self.branches
            .iter()
            .map(|b| Ok((b.probability, b.state.densify(qubits)?)))
            .collect()
    }

    /// Per-branch state of the pair `(a, b)`, each holding one live qubit.
    pub fn pair_states(&self, a: &str, b: &str) -> Result<Vec<(Dyadic, DensityMatrix)>, ProtocolError> {
        let qubits = [self.sole_qubit(a)?, self.sole_qubit(b)?];
        self.branch_states(&qubits)
    }

    /// Outcome-averaged state of `qubits`.
    pub fn average_state(&self, qubits: &[usize]) -> Result<DensityMatrix, ProtocolError> {
        let states = self.branch_states(qubits)?;
        let items: Vec<(f64, &DensityMatrix)> = states.iter().map(|(p, r)| (p.to_f64(), r)).collect();
        Ok(DensityMatrix::mixture(&items)?)
    }

    /// Forgets the outcomes: the mixture of all branches.
    pub fn into_ensemble(self) -> Result<(Ensemble, Transcript), ProtocolError> {
        if self.has_pending_frame() {
            return Err(ProtocolError::PendingFrame);
        }
        let items = self.branches.into_iter().map(|b| (b.probability, b.state)).collect();
        Ok((Ensemble::mix(items)?.canonical_merge(), self.transcript))
    }
}

fn draw(rng: &mut ChaCha8Rng, branches: Vec<crate::ensemble::MeasurementBranch>) -> crate::ensemble::MeasurementBranch {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    let last = branches.len() - 1;
    for (i, b) in branches.into_iter().enumerate() {
        acc += b.probability.to_f64();
        if r < acc || i == last {
            return crate::ensemble::MeasurementBranch {
                probability: Dyadic::ONE,
                ..b
            };
        }
    }
    unreachable!("at least one branch")
}
