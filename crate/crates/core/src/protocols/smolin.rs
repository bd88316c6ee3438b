use super::chain::{prepare_group, Chain, ChainConfig, Link, LinkRole};
use super::correction::CorrectionTable;
use super::engine::{CorrectionMode, Protocol};
use super::transcript::Transcript;
use super::ProtocolError;
use crate::dyadic::Dyadic;
use crate::ensemble::{Ensemble, PartyRegistry};
use crate::stabilizer::{prepare_bell, BellIndex};

fn four_party_registry(parties: [&str; 4]) -> Result<PartyRegistry, ProtocolError> {
    let mut r = PartyRegistry::new(&parties)?;
    for p in parties {
        r.add_qubits(p, 1)?;
    }
    Ok(r)
}

/// `¼ Σ_k |Φ_k⟩⟨Φ_k| ⊗ |Φ_k⟩⟨Φ_k|` with pairs `(p0, p1)` and `(p2, p3)`,
/// one qubit per party in the listed order.
pub fn prepare_smolin_direct(parties: [&str; 4]) -> Result<Ensemble, ProtocolError> {
    let registry = four_party_registry(parties)?;
    let items = BellIndex::ALL
        .iter()
        .map(|&k| {
            let s = prepare_bell(k).tensor(&prepare_bell(k));
            Ok((Dyadic::half_pow(2), Ensemble::pure(s, registry.clone())?))
        })
        .collect::<Result<Vec<_>, ProtocolError>>()?;
    Ok(Ensemble::mix(items)?)
}

/// The same state built by LOCC from two singlets `(p0, p1)` and
/// `(p2, p3)`: `p0` and `p2` agree on a random Bell index, each prepares that
/// Bell state locally and teleports one half to its partner. Returned on
/// one qubit per party in the listed order.
pub fn prepare_smolin_locc(parties: [&str; 4]) -> Result<(Ensemble, Transcript), ProtocolError> {
    let mut registry = four_party_registry(parties)?;
    registry.register_singlet(0, 1);
    registry.register_singlet(2, 3);
    let singlets = prepare_bell(BellIndex::PsiMinus).tensor(&prepare_bell(BellIndex::PsiMinus));
    let mut protocol = Protocol::new(Ensemble::pure(singlets, registry)?);
    let kept = prepare_group(&mut protocol, [parties[0], parties[2]], [(0, 1), (2, 3)])?;
    let (e, transcript) = protocol.into_ensemble()?;
    Ok((e.select(&[kept[0], 1, kept[1], 3])?, transcript))
}

/// Teleports `source` over `channel = (sender half, receiver half)` with
/// the given table, forgetting the outcome afterwards.
pub fn teleport(
    e: &Ensemble,
    source: usize,
    channel: (usize, usize),
    table: &CorrectionTable,
) -> Result<(Ensemble, Transcript), ProtocolError> {
    let actor = e
        .registry()
        .owner(channel.0)
        .to_string();
    let mut p = Protocol::new(e.clone()).with_table(table.clone());
    p.teleport(&actor, source, channel)?;
    p.into_ensemble()
}

/// Co-locates `x` and `y`, which then Bell-measure their qubits together and
/// announce the result to the last of the two other parties, who corrects.
/// Returns the run and the remaining pair in registry order.
pub fn activate_pair(e: &Ensemble, x: &str, y: &str) -> Result<(Protocol, [String; 2]), ProtocolError> {
    let others: Vec<String> = e
        .registry()
        .parties()
        .iter()
        .filter(|p| *p != x && *p != y)
        .cloned()
        .collect();
    let [p, q] = <[String; 2]>::try_from(others)
        .map_err(|o| ProtocolError::InvalidConfig(format!("expected two other parties, found {}", o.len())))?;
    let mut run = Protocol::new(e.clone());
    run.bring_together(x, y)?;
    let pair = (run.sole_qubit(x)?, run.sole_qubit(y)?);
    let target = run.sole_qubit(&q)?;
    run.bell_step(x, pair, target, CorrectionMode::Immediate)?;
    Ok((run, [p, q]))
}

/// The four-party state as a two-link chain `p0 — p1p2 — p3` with `p1` and
/// `p2` co-located: the joint node swaps and `p3` corrects.
pub fn remark1_chain(e: &Ensemble, parties: [&str; 4]) -> Result<Chain, ProtocolError> {
    let mut run = Protocol::new(e.clone());
    run.bring_together(parties[1], parties[2])?;
    let q: Vec<usize> = parties
        .iter()
        .map(|p| run.sole_qubit(p))
        .collect::<Result<_, _>>()?;
    let config = ChainConfig {
        nodes: vec![parties[0].to_string(), parties[1].to_string(), parties[3].to_string()],
        links: vec![
            Link {
                left: q[0],
                right: q[1],
                role: LinkRole::Abe { group: 0 },
                origin: vec![1],
            },
            Link {
                left: q[2],
                right: q[3],
                role: LinkRole::Abe { group: 0 },
                origin: vec![2],
            },
        ],
        groups: vec![[1, 2]],
    };
    Chain::from_parts(config, run)
}

/// Any single-qubit stabilizer input, as an ensemble held by `party` next
/// to the rest of `e`.
#[cfg(test)]
fn with_input(e: &Ensemble, party: &str, input: &crate::stabilizer::StabilizerState) -> Result<Ensemble, ProtocolError> {
    let mut r = PartyRegistry::new(&[party])?;
    r.add_qubits(party, input.num_qubits())?;
    Ok(e.tensor(&Ensemble::pure(input.clone(), r)?)?)
}
