use serde::{Deserialize, Serialize};

use crate::stabilizer::{BellIndex, Pauli};

/// One step of an LOCC run. Events are recorded once per step, covering
/// every branch; `outcomes` lists the results that occurred in some branch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Event {
    Prepare {
        actors: Vec<String>,
        qubits: Vec<usize>,
        detail: String,
    },
    BellMeasure {
        actor: String,
        qubits: [usize; 2],
        outcomes: Vec<BellIndex>,
    },
    Announce {
        id: usize,
        from: String,
        to: String,
    },
    Correct {
        actor: String,
        qubit: usize,
        announcement: usize,
        deferred: bool,
        applied: Vec<(BellIndex, Pauli)>,
    },
    ApplyFrame {
        actor: String,
        qubits: Vec<usize>,
    },
    BringTogether {
        parties: [String; 2],
    },
}

/// Ordered audit trail of a protocol run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    events: Vec<Event>,
    singlets_consumed: usize,
    #[serde(skip)]
    announcements: usize,
}

impl Transcript {
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn singlets_consumed(&self) -> usize {
        self.singlets_consumed
    }

    pub(super) fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    pub(super) fn consume_singlet(&mut self) {
        self.singlets_consumed += 1;
    }

    pub(super) fn next_announcement(&mut self) -> usize {
        self.announcements += 1;
        self.announcements - 1
    }

    /// Appends another run's events, e.g. the preparation of a resource.
    pub fn extend(&mut self, other: &Transcript) {
        self.events.extend(other.events.iter().cloned());
        self.singlets_consumed += other.singlets_consumed;
    }

    /// Whether every correction cites an announcement made earlier.
    pub fn corrections_follow_announcements(&self) -> bool {
        let mut announced = Vec::new();
        for e in &self.events {
            match e {
                Event::Announce { id, .. } => announced.push(*id),
                Event::Correct { announcement, .. } if !announced.contains(announcement) => return false,
                _ => {}
            }
        }
        true
    }

    /// The `(outcome, correction)` pairs of every correction event, in order.
    pub fn correction_rules(&self) -> Vec<Vec<(BellIndex, Pauli)>> {
        self.events
            .iter()
            .filter_map(|e| match e {
                Event::Correct { applied, .. } => Some(applied.clone()),
                _ => None,
            })
            .collect()
    }
}
