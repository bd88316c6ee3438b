//! Certification batteries: each claim carries numeric evidence and its
//! status follows mechanically from that evidence and the tolerances.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::{Cut, DensityMatrix, EQ_TOLERANCE, PPT_TOLERANCE};
use crate::dyadic::Dyadic;
use crate::ensemble::Ensemble;
use crate::protocols::{activate_pair, Protocol, ProtocolError};
use crate::stabilizer::BellIndex;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Entrywise equality and fidelity tolerance.
    pub eq: f64,
    /// Smallest partial-transpose eigenvalue still read as non-negative is `-ppt`.
    pub ppt: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eq: EQ_TOLERANCE,
            ppt: PPT_TOLERANCE,
        }
    }
}

/// What an evidence value must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    /// Reported only.
    Info,
    AtMost { bound: f64 },
    AtLeast { bound: f64 },
    Near { target: f64, tolerance: f64 },
}

impl Check {
    pub fn holds(&self, value: f64) -> bool {
        match *self {
            Check::Info => true,
            Check::AtMost { bound } => value <= bound,
            Check::AtLeast { bound } => value >= bound,
            Check::Near { target, tolerance } => (value - target).abs() <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub name: String,
    pub value: f64,
    pub check: Check,
}

impl Evidence {
    pub fn new(name: impl Into<String>, value: f64, check: Check) -> Self {
        Self {
            name: name.into(),
            value,
            check,
        }
    }

    pub fn holds(&self) -> bool {
        self.value.is_finite() && self.check.holds(self.value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub anchor: String,
    /// What passing this claim establishes, and nothing more.
    pub statement: String,
    pub status: Status,
    pub evidence: Vec<Evidence>,
    pub tolerance: f64,
}

impl Claim {
    /// Passes iff there is at least one evidence entry and every entry holds.
    pub fn new(id: &str, anchor: &str, statement: &str, tolerance: f64, evidence: Vec<Evidence>) -> Self {
        let pass = !evidence.is_empty() && evidence.iter().all(Evidence::holds);
        Self {
            id: id.to_string(),
            anchor: anchor.to_string(),
            statement: statement.to_string(),
            status: if pass { Status::Pass } else { Status::Fail },
            evidence,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub claims: Vec<Claim>,
}

impl CertificationReport {
    pub fn all_pass(&self) -> bool {
        self.claims.iter().all(Claim::passed)
    }

    pub fn push(&mut self, claim: Claim) {
        self.claims.push(claim);
    }

    pub fn extend(&mut self, other: CertificationReport) {
        self.claims.extend(other.claims);
    }
}

/// Dense amplitudes of a Bell state, written out independently of the
/// stabilizer engine.
pub fn bell_vector(k: BellIndex) -> [Complex64; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = match k {
        BellIndex::PhiPlus => [s, 0.0, 0.0, s],
        BellIndex::PhiMinus => [s, 0.0, 0.0, -s],
        BellIndex::PsiPlus => [0.0, s, s, 0.0],
        BellIndex::PsiMinus => [0.0, s, -s, 0.0],
    };
    v.map(|x| Complex64::new(x, 0.0))
}

/// `¼ Σ_k |b_k⟩⟨b_k| ⊗ |b_k⟩⟨b_k|` from dense Bell vectors.
pub fn smolin_reference() -> DensityMatrix {
    let terms: Vec<DensityMatrix> = BellIndex::ALL
        .iter()
        .map(|&k| {
            let b = bell_vector(k);
            let doubled: Vec<Complex64> = b.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
            DensityMatrix::from_pure(&doubled).expect("normalized")
        })
        .collect();
    let items: Vec<(f64, &DensityMatrix)> = terms.iter().map(|t| (0.25, t)).collect();
    DensityMatrix::mixture(&items).expect("valid mixture")
}

fn party_qubits(e: &Ensemble) -> Result<Vec<usize>, ProtocolError> {
    e.registry()
        .parties()
        .iter()
        .map(|p| {
            let live = e.live_qubits(p)?;
            match live.as_slice() {
                [q] => Ok(*q),
                _ => Err(ProtocolError::LiveQubits {
                    party: p.clone(),
                    count: live.len(),
                }),
            }
        })
        .collect()
}

/// The five checks on a four-party, one-qubit-per-party state: the
/// reference matrix, symmetry under every transposition of parties, PPT on
/// the 2:2 cuts, NPT on the 1:3 cuts and pair activation.
pub fn smolin_battery(e: &Ensemble, tol: &Tolerances) -> Result<CertificationReport, ProtocolError> {
    let qubits = party_qubits(e)?;
    if qubits.len() != 4 {
        return Err(ProtocolError::InvalidConfig(format!("expected 4 parties, found {}", qubits.len())));
    }
    let labels = e.registry().parties().to_vec();
    let rho = e.densify(&qubits)?;
    let mut report = CertificationReport::default();

    report.push(Claim::new(
        "smolin-matrix",
        "four-party-state",
        "the state equals the uniform mixture of doubled Bell pairs entrywise",
        tol.eq,
        vec![Evidence::new(
            "max entry difference",
            rho.max_abs_diff(&smolin_reference()),
            Check::AtMost { bound: tol.eq },
        )],
    ));

    let mut symmetry = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let mut perm = [0, 1, 2, 3];
            perm.swap(i, j);
            let swapped = rho.permute_qubits(&perm)?;
            symmetry.push(Evidence::new(
                format!("swap {}{}", labels[i], labels[j]),
                swapped.max_abs_diff(&rho),
                Check::AtMost { bound: tol.eq },
            ));
        }
    }
    report.push(Claim::new(
        "smolin-symmetry",
        "four-party-state",
        "the state is invariant under every interchange of two parties",
        tol.eq,
        symmetry,
    ));

    let mut ppt = Vec::new();
    for partner in 1..4 {
        let cut = Cut::new(4, &[0, partner])?;
        let cert = rho.ppt_certificate(&cut, tol.ppt)?;
        ppt.push(Evidence::new(
            format!("min eigenvalue of partial transpose {}{}|rest", labels[0], labels[partner]),
            cert.min_eigenvalue,
            Check::AtLeast { bound: -tol.ppt },
        ));
    }
    report.push(Claim::new(
        "smolin-ppt-two-two",
        "four-party-state",
        "PPT across every 2:2 cut, so no entanglement is distillable across any of them; \
         separability itself is only exhibited explicitly for the cut between the two pairs",
        tol.ppt,
        ppt,
    ));

    let mut npt = Vec::new();
    for single in 0..4 {
        let cut = Cut::new(4, &[single])?;
        let cert = rho.ppt_certificate(&cut, tol.ppt)?;
        npt.push(Evidence::new(
            format!("min eigenvalue of partial transpose {}|rest", labels[single]),
            cert.min_eigenvalue,
            Check::AtMost { bound: -tol.ppt },
        ));
        npt.push(Evidence::new(
            format!("negativity {}|rest", labels[single]),
            rho.negativity(&cut)?,
            Check::Near {
                target: 0.5,
                tolerance: tol.eq,
            },
        ));
    }
    report.push(Claim::new(
        "smolin-npt-one-three",
        "four-party-state",
        "NPT across every 1:3 cut with negativity one half",
        tol.eq,
        npt,
    ));

    let mut activation = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let (run, [p, q]) = activate_pair(e, &labels[i], &labels[j])?;
            let f = distill_fidelity(&run, &p, &q, BellIndex::PsiMinus)?;
            activation.push(Evidence::new(
                format!("{}{} together: min singlet fidelity {}{}", labels[i], labels[j], p, q),
                f.min,
                Check::AtLeast { bound: 1.0 - tol.eq },
            ));
        }
    }
    report.push(Claim::new(
        "smolin-pair-activation",
        "pair-activation",
        "any two parties brought together distill a singlet between the other two in every branch",
        tol.eq,
        activation,
    ));
    Ok(report)
}

/// Per-branch and averaged overlap of an end pair with a Bell target.
#[derive(Clone, Debug, PartialEq)]
pub struct DistillFidelity {
    pub per_branch: Vec<(Dyadic, f64)>,
    pub min: f64,
    pub weighted: f64,
}

/// `a` and `b` must each hold exactly one live qubit.
pub fn distill_fidelity(run: &Protocol, a: &str, b: &str, target: BellIndex) -> Result<DistillFidelity, ProtocolError> {
    let v = bell_vector(target);
    let per_branch = run
        .pair_states(a, b)?
        .into_iter()
        .map(|(p, rho)| Ok((p, rho.fidelity_pure(&v)?)))
        .collect::<Result<Vec<_>, ProtocolError>>()?;
    let min = per_branch.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let weighted = per_branch.iter().map(|(p, f)| p.to_f64() * f).sum();
    Ok(DistillFidelity { per_branch, min, weighted })
}

/// Claim that `a`–`b` hold a singlet in every branch.
pub fn singlet_claim(
    id: &str,
    anchor: &str,
    run: &Protocol,
    a: &str,
    b: &str,
    tol: &Tolerances,
) -> Result<Claim, ProtocolError> {
    let f = distill_fidelity(run, a, b, BellIndex::PsiMinus)?;
    Ok(Claim::new(
        id,
        anchor,
        &format!("{a} and {b} share a singlet in every branch"),
        tol.eq,
        vec![
            Evidence::new("min singlet fidelity", f.min, Check::AtLeast { bound: 1.0 - tol.eq }),
            Evidence::new("weighted singlet fidelity", f.weighted, Check::Info),
            Evidence::new(
                "outcome histories",
                run.branches().iter().map(|b| b.histories() as f64).sum(),
                Check::Info,
            ),
        ],
    ))
}

/// PPT certificate across the cut between the two parties of each pair,
/// on the averaged joint state of all their live qubits.
pub fn pairwise_undistillability(
    run: &Protocol,
    pairs: &[(String, String)],
    tol: &Tolerances,
) -> Result<CertificationReport, ProtocolError> {
    let mut report = CertificationReport::default();
    for (x, y) in pairs {
        let qx = run.registry().live_qubits(x)?;
        let qy = run.registry().live_qubits(y)?;
        let qubits: Vec<usize> = qx.iter().chain(&qy).copied().collect();
        let rho = run.average_state(&qubits)?;
        let left: Vec<usize> = (0..qx.len()).collect();
        let cert = rho.ppt_certificate(&Cut::new(qubits.len(), &left)?, tol.ppt)?;
        report.push(Claim::new(
            &format!("ppt-{x}-{y}"),
            "pair-undistillability",
            &format!("PPT across {x}|{y}, so {x} and {y} alone cannot distill entanglement"),
            tol.ppt,
            vec![Evidence::new(
                "min eigenvalue of partial transpose",
                cert.min_eigenvalue,
                Check::AtLeast { bound: -tol.ppt },
            )],
        ));
    }
    Ok(report)
}

/// Claim that the `a`–`b` state is `I/4` in every branch.
pub fn depolarization_check(run: &Protocol, a: &str, b: &str, tol: &Tolerances) -> Result<Claim, ProtocolError> {
    let mixed = DensityMatrix::maximally_mixed(2)?;
    let states = run.pair_states(a, b)?;
    let worst = states.iter().map(|(_, r)| r.max_abs_diff(&mixed)).fold(0.0, f64::max);
    let f = distill_fidelity(run, a, b, BellIndex::PsiMinus)?;
    Ok(Claim::new(
        &format!("depolarized-{a}-{b}"),
        "broken-chain",
        &format!("{a} and {b} are left maximally mixed in every branch"),
        tol.eq,
        vec![
            Evidence::new("max entry difference from I/4", worst, Check::AtMost { bound: tol.eq }),
            Evidence::new(
                "weighted singlet fidelity",
                f.weighted,
                Check::Near {
                    target: 0.25,
                    tolerance: tol.eq,
                },
            ),
        ],
    ))
}

/// Claim that the averaged state of `qubits` equals `want` entrywise.
pub fn state_claim(
    id: &str,
    anchor: &str,
    statement: &str,
    run: &Protocol,
    qubits: &[usize],
    want: &DensityMatrix,
    tol: &Tolerances,
) -> Result<Claim, ProtocolError> {
    let got = run.average_state(qubits)?;
    let diff = if got.num_qubits() == want.num_qubits() {
        got.max_abs_diff(want)
    } else {
        f64::INFINITY
    };
    Ok(Claim::new(
        id,
        anchor,
        statement,
        tol.eq,
        vec![Evidence::new("max entry difference", diff, Check::AtMost { bound: tol.eq })],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::PartyRegistry;
    use crate::protocols::{build_chain, fig2_broken, prepare_smolin_direct, prepare_smolin_locc, scenario_relay};
    use crate::stabilizer::prepare_bell;

    const P: [&str; 4] = ["A", "B", "C", "D"];

    #[test]
    fn direct_and_locc_states_give_identical_reports() {
        let tol = Tolerances::default();
        let direct = smolin_battery(&prepare_smolin_direct(P).unwrap(), &tol).unwrap();
        let (locc, _) = prepare_smolin_locc(P).unwrap();
        assert!(direct.all_pass());
        assert_eq!(direct.claims.len(), 5);
        assert_eq!(direct, smolin_battery(&locc, &tol).unwrap());
    }

    #[test]
    fn two_singlets_fail_the_cut_claims() {
        let mut r = PartyRegistry::new(&P).unwrap();
        for p in P {
            r.add_qubits(p, 1).unwrap();
        }
        let s = prepare_bell(BellIndex::PsiMinus);
        let e = Ensemble::pure(s.tensor(&s), r).unwrap();
        let report = smolin_battery(&e, &Tolerances::default()).unwrap();
        let ppt = report.claims.iter().find(|c| c.id == "smolin-ppt-two-two").unwrap();
        assert!(!ppt.passed());
        // AB|CD is the one 2:2 cut the product passes
        assert!(ppt.evidence[0].holds());
        assert!(!ppt.evidence[1].holds());
    }

    #[test]
    fn claim_without_evidence_fails() {
        assert!(!Claim::new("x", "y", "z", 0.0, vec![]).passed());
        assert!(!Evidence::new("nan", f64::NAN, Check::Info).holds());
    }

    #[test]
    fn singlet_pair_is_not_ppt() {
        let run = Protocol::new(build_chain(1).unwrap().protocol().branches()[0].state().clone());
        let r = pairwise_undistillability(&run, &[("A".into(), "B".into())], &Tolerances::default()).unwrap();
        assert!(!r.all_pass());
        assert!((r.claims[0].evidence[0].value + 0.5).abs() < 1e-12);
    }

    #[test]
    fn relay_end_pair_is_ppt_before_the_run() {
        let chain = scenario_relay().unwrap();
        let r = pairwise_undistillability(chain.protocol(), &[("A".into(), "E".into())], &Tolerances::default()).unwrap();
        assert!(r.all_pass());
    }

    #[test]
    fn depolarization_check_separates_broken_from_intact() {
        let tol = Tolerances::default();
        let mut broken = fig2_broken(2).unwrap();
        broken.run_end_to_end(None).unwrap();
        assert!(depolarization_check(broken.protocol(), "A", "E", &tol).unwrap().passed());
        let mut intact = build_chain(4).unwrap();
        intact.run_end_to_end(None).unwrap();
        assert!(!depolarization_check(intact.protocol(), "A", "E", &tol).unwrap().passed());
        let f = distill_fidelity(intact.protocol(), "A", "E", BellIndex::PsiMinus).unwrap();
        assert!((f.min - 1.0).abs() < 1e-12);
    }
}
