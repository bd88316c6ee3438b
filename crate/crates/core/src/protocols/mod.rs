//! LOCC protocols over singlet chains: teleportation with announced-outcome
//! corrections, preparation of the four-party bound-entangled state, chain
//! substitution, and the end-to-end swapping protocol.

mod chain;
mod correction;
mod engine;
mod scenarios;
mod smolin;
mod transcript;

use thiserror::Error;

use crate::density::DensityError;
use crate::ensemble::EnsembleError;
use crate::stabilizer::StabilizerError;

pub use chain::{build_chain, default_labels, Chain, ChainConfig, Link, LinkRole, Piece, Toward};
pub use correction::{Announcement, CorrectionTable};
pub use engine::{Branch, CorrectionMode, Protocol};
pub use scenarios::{
    activation_reference, fig2_broken, fig3_broken, scenario_activation, scenario_fig2, scenario_fig3,
    scenario_relay, Activation, FIG2_NODES,
};
pub use smolin::{activate_pair, prepare_smolin_direct, prepare_smolin_locc, remark1_chain, teleport};
pub use transcript::{Event, Transcript};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("correction calibration failed: {0}")]
    Calibration(String),
    #[error("chain needs at least one link")]
    EmptyChain,
    #[error("no link {0} in a chain of {1} links")]
    InvalidLink(usize, usize),
    #[error("link {0} is not an unused singlet")]
    NotSinglet(usize),
    #[error("a link cannot be paired with itself")]
    SameLink,
    #[error("links {0} and {1} have the same sending node")]
    SharedSender(usize, usize),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("node {0} is not an interior node of a connected piece")]
    NotInterior(String),
    #[error("invalid order: {0}")]
    InvalidOrder(String),
    #[error("party {party} holds {count} live qubits, expected exactly one")]
    LiveQubits { party: String, count: usize },
    #[error("corrections are still pending in the Pauli frame")]
    PendingFrame,
    #[error("invalid chain configuration: {0}")]
    InvalidConfig(String),
}
