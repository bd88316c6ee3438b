use std::sync::OnceLock;

use serde::Serialize;

use super::ProtocolError;
use crate::stabilizer::{prepare_bell, BellIndex, Gate, Pauli, PauliString, StabilizerState};

/// A Bell-measurement result that has been broadcast. Only the protocol
/// engine can create one, and corrections can only be looked up from one,
/// so no correction can depend on anything but announced outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Announcement {
    id: usize,
    outcome: BellIndex,
}

impl Announcement {
    pub(super) fn new(id: usize, outcome: BellIndex) -> Self {
        Self { id, outcome }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn outcome(&self) -> BellIndex {
        self.outcome
    }
}

/// Outcome → single-qubit Pauli correction for teleportation over a fixed
/// Bell channel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorrectionTable {
    channel: BellIndex,
    entries: [(BellIndex, Pauli); 4],
}

/// `|0⟩, |+⟩, |+i⟩, |1⟩` as circuits from `|0⟩`.
fn test_states() -> [Vec<Gate>; 4] {
    [vec![], vec![Gate::H(0)], vec![Gate::H(0), Gate::S(0)], vec![Gate::X(0)]]
}

impl CorrectionTable {
    /// Finds, for each Bell outcome on (input, sender half), the Pauli on the
    /// receiver half that reproduces every test input exactly.
    pub fn calibrate(channel: BellIndex) -> Result<Self, ProtocolError> {
        let inputs: Vec<StabilizerState> = test_states()
            .iter()
            .map(|c| StabilizerState::zero(1).apply_circuit(c))
            .collect::<Result<_, _>>()?;
        let mut entries = Vec::with_capacity(4);
        for outcome in BellIndex::ALL {
            let mut fits = Pauli::ALL.to_vec();
            for input in &inputs {
                let joint = input.tensor(&prepare_bell(channel));
                let branch = joint
                    .bell_measure(0, 1)?
                    .into_iter()
                    .find(|b| b.outcome == outcome)
                    .ok_or_else(|| ProtocolError::Calibration(format!("outcome {outcome} never occurs")))?;
                fits.retain(|&sigma| {
                    let fixed = branch
                        .state
                        .apply_pauli(&PauliString::single(3, 2, sigma))
                        .and_then(|s| s.restrict(&[2]));
                    matches!(fixed, Ok(Some(ref out)) if out == input)
                });
            }
            match fits.as_slice() {
                [sigma] => entries.push((outcome, *sigma)),
                _ => {
                    return Err(ProtocolError::Calibration(format!(
                        "outcome {outcome}: {} candidate corrections",
                        fits.len()
                    )))
                }
            }
        }
        Ok(Self {
            channel,
            entries: entries.try_into().expect("four outcomes"),
        })
    }

    /// The table for singlet channels, calibrated once and then frozen.
    pub fn singlet() -> &'static CorrectionTable {
        static TABLE: OnceLock<CorrectionTable> = OnceLock::new();
        TABLE.get_or_init(|| Self::calibrate(BellIndex::PsiMinus).expect("singlet calibration"))
    }

    pub fn channel(&self) -> BellIndex {
        self.channel
    }

    pub fn entries(&self) -> &[(BellIndex, Pauli); 4] {
        &self.entries
    }

    pub fn correction(&self, announcement: &Announcement) -> Pauli {
        self.entries
            .iter()
            .find(|(o, _)| *o == announcement.outcome)
            .map(|(_, p)| *p)
            .expect("table covers all outcomes")
    }
}
