use super::chain::{Chain, Toward};
use super::engine::{CorrectionMode, Protocol};
use super::smolin::prepare_smolin_direct;
use super::ProtocolError;

/// Node order of the seven-link chain: `A B F G C D H E`.
pub const FIG2_NODES: [&str; 8] = ["A", "B", "F", "G", "C", "D", "H", "E"];

/// Bring-togethers of the seven-link chain and the singlet each one uses.
const FIG2_MERGES: [(&str, Toward, usize); 3] = [("F", Toward::Left, 2), ("G", Toward::Right, 4), ("H", Toward::Left, 6)];

/// Seven-link chain with links 1,5 and 3,7 replaced by two bound-entangled
/// groups, then F, G and H merged away over the remaining singlets. The
/// result is the four-link chain `A B C D E` whose links alternate between
/// the groups, ready for the interior swaps.
pub fn scenario_fig2() -> Result<Chain, ProtocolError> {
    fig2_with(&[])
}

/// As [`scenario_fig2`] with singlet link `removed` (2, 4 or 6) absent and
/// its bring-together skipped.
pub fn fig2_broken(removed: usize) -> Result<Chain, ProtocolError> {
    if !FIG2_MERGES.iter().any(|m| m.2 == removed) {
        return Err(ProtocolError::InvalidConfig(format!(
            "link {removed} is not one of the connecting singlets 2, 4, 6"
        )));
    }
    fig2_with(&[removed])
}

fn fig2_with(removed: &[usize]) -> Result<Chain, ProtocolError> {
    let mut chain = Chain::with_labels(&FIG2_NODES, removed)?;
    chain.substitute_abe(1, 5)?;
    chain.substitute_abe(3, 7)?;
    for (node, toward, uses) in FIG2_MERGES {
        if !removed.contains(&uses) {
            chain.bring_together(node, toward)?;
        }
    }
    Ok(chain)
}

/// Seven-link chain with three groups (links 1,5; 3,7; 2,6) and G merged
/// right over link 4: nodes `A B F C D H E`.
pub fn scenario_fig3() -> Result<Chain, ProtocolError> {
    fig3_with(false)
}

/// [`scenario_fig3`] without link 4, so G is never merged.
pub fn fig3_broken() -> Result<Chain, ProtocolError> {
    fig3_with(true)
}

fn fig3_with(broken: bool) -> Result<Chain, ProtocolError> {
    let removed: &[usize] = if broken { &[4] } else { &[] };
    let mut chain = Chain::with_labels(&FIG2_NODES, removed)?;
    chain.substitute_abe(1, 5)?;
    chain.substitute_abe(3, 7)?;
    chain.substitute_abe(2, 6)?;
    if !broken {
        chain.bring_together("G", Toward::Right)?;
    }
    Ok(chain)
}

/// The three-group chain after C has swapped and the frame has been applied.
/// `rho_x` holds the six qubits of the state left by the two outer groups
/// and `auxiliary` the four qubits of the third group.
#[derive(Clone, Debug)]
pub struct Activation {
    pub chain: Chain,
    pub parties: [&'static str; 6],
    pub rho_x: [usize; 6],
    pub auxiliary: [usize; 4],
}

impl Activation {
    /// Finishes the swaps at B, F, D and H.
    pub fn complete(mut self) -> Result<Chain, ProtocolError> {
        self.chain.run_end_to_end(None)?;
        Ok(self.chain)
    }
}

pub fn scenario_activation() -> Result<Activation, ProtocolError> {
    let mut chain = scenario_fig3()?;
    chain.swap("C")?;
    chain.protocol_mut().apply_frames()?;
    let l = &chain.config().links;
    let rho_x = [l[0].left, l[0].right, l[2].right, l[4].right, l[2].left, l[4].left];
    let auxiliary = [l[1].left, l[1].right, l[3].left, l[3].right];
    Ok(Activation {
        chain,
        parties: ["A", "B", "D", "E", "F", "H"],
        rho_x,
        auxiliary,
    })
}

/// Direct construction of the same six-party state: the two groups
/// prepared outright, C swapping its two qubits and E correcting. Returns
/// the run and the qubits of A, B, D, E, F, H.
pub fn activation_reference() -> Result<(Protocol, [usize; 6]), ProtocolError> {
    let left = prepare_smolin_direct(["A", "B", "C", "D"])?;
    let right = prepare_smolin_direct(["F", "C", "H", "E"])?;
    let mut run = Protocol::new(left.tensor(&right)?);
    run.bell_step("C", (5, 2), 7, CorrectionMode::Immediate)?;
    Ok((run, [0, 1, 3, 7, 4, 6]))
}

/// Four-link chain `A … E` with groups on links 1,3 and 2,4: every link is
/// bound-entangled and no singlets remain.
pub fn scenario_relay() -> Result<Chain, ProtocolError> {
    let mut chain = super::chain::build_chain(4)?;
    chain.substitute_abe(1, 3)?;
    chain.substitute_abe(2, 4)?;
    Ok(chain)
}
