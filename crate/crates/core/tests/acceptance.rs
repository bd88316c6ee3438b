//! The twelve acceptance criteria, one PASS/FAIL line each.

mod common;

use abe_locc::density::{abe_channel, werner, Cut, DensityMatrix, PPT_TOLERANCE};
use abe_locc::protocols::{
    build_chain, fig2_broken, prepare_smolin_direct, prepare_smolin_locc, remark1_chain, scenario_activation,
    scenario_fig2, scenario_fig3, scenario_relay, Chain,
};
use abe_locc::stabilizer::BellIndex;
use abe_locc::verification::{distill_fidelity, pairwise_undistillability, smolin_reference, Tolerances};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EQ: f64 = 1e-12;
const P: [&str; 4] = ["A", "B", "C", "D"];

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Minimum singlet fidelity of `a`–`b` over all branches.
fn min_fidelity(chain: &Chain, a: &str, b: &str) -> Result<f64, String> {
    Ok(distill_fidelity(chain.protocol(), a, b, BellIndex::PsiMinus).map_err(err)?.min)
}

fn smolin_dense() -> Result<DensityMatrix, String> {
    let (e, _) = prepare_smolin_locc(P).map_err(err)?;
    e.densify(&[0, 1, 2, 3]).map_err(err)
}

fn to_dense(rho: &DensityMatrix) -> common::Dense {
    let d = rho.matrix().nrows();
    (0..d).map(|i| (0..d).map(|j| rho.entry(i, j)).collect()).collect()
}

fn criterion_1() -> Outcome {
    let (e, t) = prepare_smolin_locc(P).map_err(err)?;
    let diff = e.densify(&[0, 1, 2, 3]).map_err(err)?.max_abs_diff(&smolin_reference());
    ensure(diff <= EQ, format!("max entry difference {diff:e}"))?;
    ensure(t.singlets_consumed() == 2, format!("{} singlets consumed", t.singlets_consumed()))?;
    Ok(format!("max entry difference {diff:e}, 2 singlets consumed"))
}

fn criterion_2() -> Outcome {
    let rho = smolin_dense()?;
    // ACBD swaps B and C, ADCB swaps B and D
    let mut worst: f64 = 0.0;
    for perm in [[0, 2, 1, 3], [0, 3, 2, 1]] {
        worst = worst.max(rho.permute_qubits(&perm).map_err(err)?.max_abs_diff(&rho));
    }
    ensure(worst <= EQ, format!("asymmetry {worst:e}"))?;
    Ok(format!("ABCD = ACBD = ADCB within {worst:e}"))
}

fn criterion_3() -> Outcome {
    let rho = smolin_dense()?;
    let dense = to_dense(&rho);
    let mut min_two_two = f64::INFINITY;
    for partner in 1..4 {
        let cut = Cut::new(4, &[0, partner]).map_err(err)?;
        let cert = rho.ppt_certificate(&cut, PPT_TOLERANCE).map_err(err)?;
        ensure(cert.is_ppt, format!("2:2 cut A{partner} is NPT ({})", cert.min_eigenvalue))?;
        min_two_two = min_two_two.min(cert.min_eigenvalue);
    }
    let mut negativities = Vec::new();
    for single in 0..4 {
        let cut = Cut::new(4, &[single]).map_err(err)?;
        let cert = rho.ppt_certificate(&cut, PPT_TOLERANCE).map_err(err)?;
        ensure(!cert.is_ppt, format!("1:3 cut {single} passed PPT"))?;
        let oracle_ev = common::jacobi_eigenvalues(&common::partial_transpose(4, &dense, &[single]));
        let oracle: f64 = oracle_ev.iter().filter(|x| **x < 0.0).map(|x| -x).sum();
        ensure((oracle - 0.5).abs() <= EQ, format!("oracle negativity {oracle}"))?;
        let n = rho.negativity(&cut).map_err(err)?;
        ensure((n - oracle).abs() <= EQ, format!("negativity {n} vs oracle {oracle}"))?;
        negativities.push(n);
    }
    Ok(format!(
        "2:2 min eigenvalue {min_two_two:.3e}, 1:3 negativities {:?}",
        negativities.iter().map(|n| format!("{n:.12}")).collect::<Vec<_>>()
    ))
}

fn criterion_4() -> Outcome {
    let mut chain = remark1_chain(&prepare_smolin_direct(P).map_err(err)?, P).map_err(err)?;
    chain.run_end_to_end(None).map_err(err)?;
    let f = min_fidelity(&chain, "A", "D")?;
    ensure((f - 1.0).abs() <= EQ, format!("A–D fidelity {f}"))?;
    Ok(format!("A–D min fidelity {f}"))
}

/// Every set of disjoint link pairs of `{1..m}`, including the empty set.
fn matchings(links: &[usize]) -> Vec<Vec<(usize, usize)>> {
    let Some((&first, rest)) = links.split_first() else {
        return vec![vec![]];
    };
    let mut out = matchings(rest);
    for (k, &partner) in rest.iter().enumerate() {
        let remaining: Vec<usize> = rest.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, &l)| l).collect();
        for mut m in matchings(&remaining) {
            m.insert(0, (first, partner));
            out.push(m);
        }
    }
    out
}

fn permutations(items: &[String]) -> Vec<Vec<String>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    (0..items.len())
        .flat_map(|i| {
            let mut rest = items.to_vec();
            let head = rest.remove(i);
            permutations(&rest).into_iter().map(move |mut t| {
                t.insert(0, head.clone());
                t
            })
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut configs, mut runs) = (0, 0);
    for m in 3..=7 {
        let labels = abe_locc::protocols::default_labels(m);
        let links: Vec<usize> = (1..=m).collect();
        for subs in matchings(&links) {
            let mut base = build_chain(m).map_err(err)?;
            for &(i, j) in &subs {
                base.substitute_abe(i, j).map_err(err)?;
            }
            let interior = base.config().interior_nodes();
            let orders = if m <= 5 {
                permutations(&interior)
            } else {
                let mut o = vec![interior.clone(), interior.iter().rev().cloned().collect()];
                for _ in 0..2 {
                    let mut s = interior.clone();
                    s.shuffle(&mut rng);
                    o.push(s);
                }
                o
            };
            for order in orders {
                let mut c = base.clone();
                c.run_end_to_end(Some(&order)).map_err(err)?;
                let f = min_fidelity(&c, &labels[0], &labels[m])?;
                ensure((f - 1.0).abs() <= EQ, format!("m={m} {subs:?} order {order:?}: fidelity {f}"))?;
                runs += 1;
            }
            configs += 1;
        }
    }
    Ok(format!("{configs} substitution sets, {runs} runs, all end pairs singlets"))
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..=10 {
        let w = werner(k as f64 / 10.0).map_err(err)?;
        worst = worst.max(abe_channel(&w).map_err(err)?.max_abs_diff(&w));
    }
    ensure(worst <= EQ, format!("Werner state moved by {worst:e}"))?;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let ket00 = DensityMatrix::from_pure(&[one, zero, zero, zero]).map_err(err)?;
    let ket11 = DensityMatrix::from_pure(&[zero, zero, zero, one]).map_err(err)?;
    let want = DensityMatrix::mixture(&[(0.5, &ket00), (0.5, &ket11)]).map_err(err)?;
    let d = abe_channel(&ket00).map_err(err)?.max_abs_diff(&want);
    ensure(d <= EQ, format!("|00⟩ image off by {d:e}"))?;
    Ok(format!("Werner fixed within {worst:e}, |00⟩ image within {d:e}"))
}

fn criterion_7() -> Outcome {
    let mut chain = scenario_fig2().map_err(err)?;
    let reference = smolin_reference();
    for g in 0..2 {
        let q = chain.group_qubits(g);
        let d = chain.protocol().average_state(&q).map_err(err)?.max_abs_diff(&reference);
        ensure(d <= EQ, format!("group {g} off by {d:e}"))?;
    }
    chain.run_end_to_end(None).map_err(err)?;
    let f = min_fidelity(&chain, "A", "E")?;
    ensure((f - 1.0).abs() <= EQ, format!("A–E fidelity {f}"))?;
    Ok(format!("groups ABCD and BCDE match the four-party state, A–E min fidelity {f}"))
}

fn criterion_8() -> Outcome {
    let mixed = DensityMatrix::maximally_mixed(2).map_err(err)?;
    let mut notes = Vec::new();
    for removed in [2, 4, 6] {
        let mut chain = fig2_broken(removed).map_err(err)?;
        chain.run_end_to_end(None).map_err(err)?;
        for (_, rho) in chain.protocol().pair_states("A", "E").map_err(err)? {
            let d = rho.max_abs_diff(&mixed);
            ensure(d <= EQ, format!("link {removed} removed: off I/4 by {d:e}"))?;
        }
        let f = distill_fidelity(chain.protocol(), "A", "E", BellIndex::PsiMinus).map_err(err)?;
        ensure((f.weighted - 0.25).abs() <= EQ, format!("link {removed} removed: fidelity {}", f.weighted))?;
        notes.push(format!("{removed}:{:.12}", f.weighted));
    }
    let mut intact = scenario_fig2().map_err(err)?;
    intact.run_end_to_end(None).map_err(err)?;
    let f = min_fidelity(&intact, "A", "E")?;
    ensure((f - 1.0).abs() <= EQ, format!("intact fidelity {f}"))?;
    Ok(format!("removed-link fidelities {}, intact {f}", notes.join(" ")))
}

fn criterion_9() -> Outcome {
    let mut chain = scenario_fig3().map_err(err)?;
    chain.run_end_to_end(None).map_err(err)?;
    let f = min_fidelity(&chain, "A", "E")?;
    ensure((f - 1.0).abs() <= EQ, format!("A–E fidelity {f}"))?;
    Ok(format!("A–E min fidelity {f}"))
}

fn criterion_10() -> Outcome {
    let act = scenario_activation().map_err(err)?;
    let mut worst = f64::INFINITY;
    for i in 0..6 {
        for j in i + 1..6 {
            let rho = act.chain.protocol().average_state(&[act.rho_x[i], act.rho_x[j]]).map_err(err)?;
            let cert = rho.ppt_certificate(&Cut::new(2, &[0]).map_err(err)?, PPT_TOLERANCE).map_err(err)?;
            ensure(cert.is_ppt, format!("{}{} marginal is NPT", act.parties[i], act.parties[j]))?;
            worst = worst.min(cert.min_eigenvalue);
        }
    }
    let done = act.complete().map_err(err)?;
    let f = distill_fidelity(done.protocol(), "A", "E", BellIndex::PsiMinus).map_err(err)?;
    ensure((f.min - 1.0).abs() <= EQ, format!("A–E fidelity {}", f.min))?;
    let histories: u64 = done.protocol().branches().iter().map(|b| b.histories()).sum();
    Ok(format!(
        "15 marginals PPT (min eigenvalue {worst}), A–E fidelity {} over {histories} outcome histories",
        f.min
    ))
}

fn criterion_11() -> Outcome {
    let mut chain = scenario_relay().map_err(err)?;
    let nodes = chain.config().nodes.clone();
    let mut pairs = Vec::new();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if !(i == 0 && j == nodes.len() - 1) {
                pairs.push((nodes[i].clone(), nodes[j].clone()));
            }
        }
    }
    ensure(pairs.len() == 9, "expected 9 pairs")?;
    let report = pairwise_undistillability(chain.protocol(), &pairs, &Tolerances::default()).map_err(err)?;
    ensure(report.all_pass(), "some node pair is not PPT")?;
    chain.run_end_to_end(None).map_err(err)?;
    let f = min_fidelity(&chain, "A", "E")?;
    ensure((f - 1.0).abs() <= EQ, format!("A–E fidelity {f}"))?;
    Ok(format!("9 pairs PPT, A–E min fidelity {f}"))
}

fn criterion_12() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut branches = 0;
    let circuits = 1000;
    for k in 0..circuits {
        branches += common::cross_validate(&mut rng, 20, 1e-10).map_err(|e| format!("circuit {k}: {e}"))?;
    }
    Ok(format!("{circuits} random circuits, {branches} branches agree with the state-vector oracle"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("four-party state from two singlets", criterion_1),
        ("party interchange symmetry", criterion_2),
        ("cut structure and negativity", criterion_3),
        ("co-located pair gives an end singlet", criterion_4),
        ("chains with any substitution set", criterion_5),
        ("two-qubit twirl channel", criterion_6),
        ("two-group superactivation", criterion_7),
        ("broken chains depolarize", criterion_8),
        ("three-group superactivation", criterion_9),
        ("activation by an auxiliary state", criterion_10),
        ("relay channel", criterion_11),
        ("engine cross-validation", criterion_12),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!("{}/{} acceptance criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

