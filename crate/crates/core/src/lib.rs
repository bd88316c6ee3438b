//! Exact simulation of LOCC protocols over chains of singlets in which some
//! links are replaced by shares of a four-party activable bound-entangled
//! state, with entanglement certification of the resulting states.

pub mod density;
pub mod dyadic;
pub mod ensemble;
pub mod protocols;
pub mod stabilizer;
pub mod verification;
pub mod cli;
