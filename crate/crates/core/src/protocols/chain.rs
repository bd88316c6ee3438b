use serde::Serialize;

use super::engine::{CorrectionMode, Protocol};
use super::ProtocolError;
use crate::dyadic::Dyadic;
use crate::ensemble::{Ensemble, PartyRegistry};
use crate::stabilizer::{prepare_bell, BellIndex, StabilizerState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkRole {
    Singlet,
    /// One of the two correlated pairs of bound-entangled group `group`.
    Abe { group: usize },
    /// Produced by an interior swap; no longer a primitive resource.
    Joined,
    Removed,
}

/// A link between neighbouring nodes: its left and right qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Link {
    pub left: usize,
    pub right: usize,
    pub role: LinkRole,
    /// Original 1-based link numbers merged into this link.
    pub origin: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainConfig {
    pub nodes: Vec<String>,
    pub links: Vec<Link>,
    /// Original link numbers of each bound-entangled group.
    pub groups: Vec<[usize; 2]>,
}

impl ChainConfig {
    fn node_index(&self, label: &str) -> Result<usize, ProtocolError> {
        self.nodes
            .iter()
            .position(|n| n == label)
            .ok_or_else(|| ProtocolError::UnknownNode(label.to_string()))
    }

    fn link_index(&self, number: usize) -> Result<usize, ProtocolError> {
        if number == 0 || number > self.links.len() {
            return Err(ProtocolError::InvalidLink(number, self.links.len()));
        }
        Ok(number - 1)
    }

    /// Node labels with two non-removed links, left to right.
    pub fn interior_nodes(&self) -> Vec<String> {
        (1..self.nodes.len().saturating_sub(1))
            .filter(|&v| self.links[v - 1].role != LinkRole::Removed && self.links[v].role != LinkRole::Removed)
            .map(|v| self.nodes[v].clone())
            .collect()
    }

    /// Maximal runs of non-removed links.
    pub fn pieces(&self) -> Vec<Piece> {
        let mut out = Vec::new();
        let mut start = None;
        for (k, l) in self.links.iter().enumerate() {
            match (l.role == LinkRole::Removed, start) {
                (false, None) => start = Some(k),
                (true, Some(s)) => {
                    out.push(self.piece(s, k - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push(self.piece(s, self.links.len() - 1));
        }
        out
    }

    fn piece(&self, first: usize, last: usize) -> Piece {
        let origin: Vec<usize> = self.links[first..=last].iter().flat_map(|l| l.origin.clone()).collect();
        let complete = self.groups.iter().all(|g| {
            let inside = g.iter().filter(|l| origin.contains(l)).count();
            inside == 0 || inside == 2
        });
        Piece {
            left: self.nodes[first].clone(),
            right: self.nodes[last + 1].clone(),
            left_qubit: self.links[first].left,
            right_qubit: self.links[last].right,
            complete,
        }
    }
}

/// A connected run of the chain and whether every bound-entangled group
/// touching it has both of its pairs inside it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Piece {
    pub left: String,
    pub right: String,
    pub left_qubit: usize,
    pub right_qubit: usize,
    pub complete: bool,
}

/// Direction of a bring-together contraction: the node hands its qubit to
/// its left or right neighbour over the connecting singlet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Toward {
    Left,
    Right,
}

/// A linear chain of nodes, its link structure and the running protocol.
#[derive(Clone, Debug)]
pub struct Chain {
    config: ChainConfig,
    protocol: Protocol,
}

/// Node labels `A, B, …` for `m` links.
pub fn default_labels(m: usize) -> Vec<String> {
    (0..=m)
        .map(|i| {
            if i < 26 {
                char::from(b'A' + i as u8).to_string()
            } else {
                format!("N{i}")
            }
        })
        .collect()
}

/// `m` singlets across `m + 1` nodes labelled `A, B, …`.
pub fn build_chain(m: usize) -> Result<Chain, ProtocolError> {
    Chain::with_labels(&default_labels(m), &[])
}

impl Chain {
    /// One singlet between each pair of neighbours, except for the listed
    /// (1-based) links, which are absent. Link `k` holds qubits `2k-2`
    /// (left node) and `2k-1` (right node).
    pub fn with_labels<S: AsRef<str>>(labels: &[S], removed: &[usize]) -> Result<Self, ProtocolError> {
        if labels.len() < 2 {
            return Err(ProtocolError::EmptyChain);
        }
        let m = labels.len() - 1;
        for &r in removed {
            if r == 0 || r > m {
                return Err(ProtocolError::InvalidLink(r, m));
            }
        }
        let mut registry = PartyRegistry::new(labels)?;
        let mut state = StabilizerState::zero(0);
        let mut links = Vec::with_capacity(m);
        for k in 0..m {
            let left = registry.add_qubits(labels[k].as_ref(), 1)?[0];
            let right = registry.add_qubits(labels[k + 1].as_ref(), 1)?[0];
            let number = k + 1;
            let role = if removed.contains(&number) {
                state = state.tensor(&StabilizerState::zero(2));
                LinkRole::Removed
            } else {
                state = state.tensor(&prepare_bell(BellIndex::PsiMinus));
                registry.register_singlet(left, right);
                LinkRole::Singlet
            };
            links.push(Link {
                left,
                right,
                role,
                origin: vec![number],
            });
        }
        let mut ensemble = Ensemble::pure(state, registry)?;
        for l in links.iter().filter(|l| l.role == LinkRole::Removed) {
            let owner = ensemble.registry().owner(l.left).to_string();
            ensemble = ensemble.discard(&owner, &[l.left])?;
            let owner = ensemble.registry().owner(l.right).to_string();
            ensemble = ensemble.discard(&owner, &[l.right])?;
        }
        Ok(Self {
            config: ChainConfig {
                nodes: labels.iter().map(|s| s.as_ref().to_string()).collect(),
                links,
                groups: Vec::new(),
            },
            protocol: Protocol::new(ensemble),
        })
    }

    /// Wraps an existing run with an explicit link structure. Link qubits
    /// need not belong to the node they hang off, only be reachable from it.
    pub fn from_parts(config: ChainConfig, protocol: Protocol) -> Result<Self, ProtocolError> {
        if config.nodes.len() != config.links.len() + 1 || config.links.is_empty() {
            return Err(ProtocolError::InvalidConfig(format!(
                "{} nodes for {} links",
                config.nodes.len(),
                config.links.len()
            )));
        }
        let mut qubits: Vec<usize> = config.links.iter().flat_map(|l| [l.left, l.right]).collect();
        qubits.sort_unstable();
        if qubits.windows(2).any(|w| w[0] == w[1]) {
            return Err(ProtocolError::InvalidConfig("links share a qubit".into()));
        }
        if qubits.last().is_some_and(|&q| q >= protocol.num_qubits()) {
            return Err(ProtocolError::InvalidConfig("link qubit out of range".into()));
        }
        for n in &config.nodes {
            protocol.registry().party_index(n)?;
        }
        Ok(Self { config, protocol })
    }

    pub fn config(&self) -> &ChainConfig {
        &self.config
    }

    pub fn protocol(&self) -> &Protocol {
        &self.protocol
    }

    pub fn protocol_mut(&mut self) -> &mut Protocol {
        &mut self.protocol
    }

    pub fn into_protocol(self) -> Protocol {
        self.protocol
    }

    /// Replaces singlet links `i` and `j` (1-based, current numbering) by the
    /// two correlated pairs of one bound-entangled group: the left node of
    /// each link, sharing a random Bell index with the other, prepares
    /// `|Φ_k⟩` on two fresh qubits and teleports one of them across its link.
    pub fn substitute_abe(&mut self, i: usize, j: usize) -> Result<usize, ProtocolError> {
        if i == j {
            return Err(ProtocolError::SameLink);
        }
        let (li, lj) = (self.config.link_index(i)?, self.config.link_index(j)?);
        for (number, idx) in [(i, li), (j, lj)] {
            let link = &self.config.links[idx];
            if link.role != LinkRole::Singlet || self.protocol.registry().singlet_partner(link.left).is_none() {
                return Err(ProtocolError::NotSinglet(number));
            }
        }
        let senders = [self.config.nodes[li].clone(), self.config.nodes[lj].clone()];
        let kept = prepare_group(
            &mut self.protocol,
            [&senders[0], &senders[1]],
            [
                (self.config.links[li].left, self.config.links[li].right),
                (self.config.links[lj].left, self.config.links[lj].right),
            ],
        )?;
        let group = self.config.groups.len();
        let origin = [self.config.links[li].origin[0], self.config.links[lj].origin[0]];
        self.config.groups.push(origin);
        for (idx, q) in [(li, kept[0]), (lj, kept[1])] {
            self.config.links[idx].left = q;
            self.config.links[idx].role = LinkRole::Abe { group };
        }
        Ok(group)
    }

    /// Bring-together over a singlet: `node` teleports the qubit of its other
    /// link to the neighbour on the given side, correcting immediately.
    pub fn bring_together(&mut self, node: &str, toward: Toward) -> Result<(), ProtocolError> {
        let v = self.interior_index(node)?;
        let (prev, next) = (self.config.links[v - 1].clone(), self.config.links[v].clone());
        let (source, channel, channel_number, role) = match toward {
            Toward::Left => (next.left, &prev, prev.origin[0], next.role),
            Toward::Right => (prev.right, &next, next.origin[0], prev.role),
        };
        let sender_half = if toward == Toward::Left { channel.right } else { channel.left };
        let receiver_half = if toward == Toward::Left { channel.left } else { channel.right };
        if channel.role != LinkRole::Singlet || self.protocol.registry().singlet_partner(sender_half).is_none() {
            return Err(ProtocolError::NotSinglet(channel_number));
        }
        self.protocol.teleport(node, source, (sender_half, receiver_half))?;
        self.contract(v, role);
        Ok(())
    }

    /// Co-locates two parties (no quantum operation).
    pub fn co_locate(&mut self, x: &str, y: &str) -> Result<(), ProtocolError> {
        self.protocol.bring_together(x, y)
    }

    /// Interior Bell measurement of `node`; the correction is deferred to the
    /// right end of the node's piece.
    pub fn swap(&mut self, node: &str) -> Result<(), ProtocolError> {
        let v = self.interior_index(node)?;
        let mut end = self.config.links[v].right;
        for l in &self.config.links[v..] {
            if l.role == LinkRole::Removed {
                break;
            }
            end = l.right;
        }
        let pair = (self.config.links[v - 1].right, self.config.links[v].left);
        self.protocol.bell_step(node, pair, end, CorrectionMode::Deferred)?;
        self.contract(v, LinkRole::Joined);
        Ok(())
    }

    /// Swaps every interior node (left to right, or in `order`), then applies
    /// the accumulated corrections at the piece ends.
    pub fn run_end_to_end(&mut self, order: Option<&[String]>) -> Result<(), ProtocolError> {
        let interior = self.config.interior_nodes();
        let order: Vec<String> = match order {
            None => interior,
            Some(o) => {
                let mut a = o.to_vec();
                let mut b = interior.clone();
                a.sort();
                b.sort();
                if a != b {
                    return Err(ProtocolError::InvalidOrder(format!(
                        "{o:?} is not a permutation of the interior nodes {interior:?}"
                    )));
                }
                o.to_vec()
            }
        };
        for node in &order {
            self.swap(node)?;
        }
        self.protocol.apply_frames()
    }

    /// Qubits of group `g` in link order: `[left₁, right₁, left₂, right₂]`.
    pub fn group_qubits(&self, g: usize) -> Vec<usize> {
        self.config
            .links
            .iter()
            .filter(|l| l.role == LinkRole::Abe { group: g })
            .flat_map(|l| [l.left, l.right])
            .collect()
    }

    fn interior_index(&self, node: &str) -> Result<usize, ProtocolError> {
        let v = self.config.node_index(node)?;
        if self.config.interior_nodes().iter().any(|n| n == node) {
            Ok(v)
        } else {
            Err(ProtocolError::NotInterior(node.to_string()))
        }
    }

    fn contract(&mut self, v: usize, role: LinkRole) {
        let next = self.config.links.remove(v);
        let prev = &mut self.config.links[v - 1];
        prev.right = next.right;
        prev.role = role;
        prev.origin.extend(next.origin);
        self.config.nodes.remove(v);
    }
}

/// The two-singlet preparation of one bound-entangled group. `channels[k]`
/// is the `(sender half, receiver half)` of the singlet leaving `senders[k]`.
/// Returns the qubit each sender keeps.
pub(super) fn prepare_group(
    protocol: &mut Protocol,
    senders: [&str; 2],
    channels: [(usize, usize); 2],
) -> Result<[usize; 2], ProtocolError> {
    let a = protocol.add_qubits(senders[0], 2)?;
    let c = protocol.add_qubits(senders[1], 2)?;
    let choices: Vec<_> = BellIndex::ALL
        .iter()
        .map(|k| {
            (
                Dyadic::half_pow(2),
                vec![(senders[0], k.preparation(a[0], a[1])), (senders[1], k.preparation(c[0], c[1]))],
            )
        })
        .collect();
    protocol.correlated_preparation(&choices, "shared uniform Bell index k; each sender prepares Phi_k")?;
    protocol.teleport(senders[0], a[1], channels[0])?;
    protocol.teleport(senders[1], c[1], channels[1])?;
    Ok([a[0], c[0]])
}
