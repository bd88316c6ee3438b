//! Brute-force oracles shared by the integration tests. The oracles work on
//! dense vectors only; `cross_validate` runs the engine next to them.
#![allow(dead_code)]

use abe_locc::dyadic::Dyadic;
use abe_locc::ensemble::{Ensemble, Measurement, Outcome, PartyRegistry};
use abe_locc::stabilizer::{Gate, Pauli, PauliString, Phase, Sign, StabilizerState};
use num_complex::Complex64;
use rand::Rng;

pub type Vector = Vec<Complex64>;
pub type Dense = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zero_state(n: usize) -> Vector {
    let mut v = vec![c(0.0, 0.0); 1 << n];
    v[0] = c(1.0, 0.0);
    v
}

/// Bit of qubit `q` in basis index `i`; qubit 0 is the most significant.
fn bit(n: usize, q: usize, i: usize) -> usize {
    (i >> (n - 1 - q)) & 1
}

fn flip(n: usize, q: usize, i: usize) -> usize {
    i ^ (1 << (n - 1 - q))
}

pub fn apply_gate(n: usize, v: &Vector, g: &Gate) -> Vector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = vec![c(0.0, 0.0); v.len()];
    for (i, &a) in v.iter().enumerate() {
        if a == c(0.0, 0.0) {
            continue;
        }
        match *g {
            Gate::H(q) => {
                let j = flip(n, q, i);
                out[i] += a * if bit(n, q, i) == 1 { -s } else { s };
                out[j] += a * s;
            }
            Gate::S(q) => out[i] += a * if bit(n, q, i) == 1 { c(0.0, 1.0) } else { c(1.0, 0.0) },
            Gate::Sdg(q) => out[i] += a * if bit(n, q, i) == 1 { c(0.0, -1.0) } else { c(1.0, 0.0) },
            Gate::X(q) => out[flip(n, q, i)] += a,
            Gate::Y(q) => out[flip(n, q, i)] += a * if bit(n, q, i) == 1 { c(0.0, -1.0) } else { c(0.0, 1.0) },
            Gate::Z(q) => out[i] += a * if bit(n, q, i) == 1 { -1.0 } else { 1.0 },
            Gate::Cnot(ctl, t) => out[if bit(n, ctl, i) == 1 { flip(n, t, i) } else { i }] += a,
            Gate::Cz(x, y) => out[i] += a * if bit(n, x, i) & bit(n, y, i) == 1 { -1.0 } else { 1.0 },
            Gate::Swap(x, y) => {
                let j = if bit(n, x, i) != bit(n, y, i) { flip(n, y, flip(n, x, i)) } else { i };
                out[j] += a;
            }
        }
    }
    out
}

pub fn apply_circuit(n: usize, v: &Vector, circuit: &[Gate]) -> Vector {
    circuit.iter().fold(v.clone(), |acc, g| apply_gate(n, &acc, g))
}

/// `P|v⟩` for a Pauli string with its phase.
pub fn apply_pauli(p: &PauliString, v: &Vector) -> Vector {
    let n = p.num_qubits();
    let mut out = v.clone();
    for q in 0..n {
        let g = match p.letter(q) {
            Pauli::I => continue,
            Pauli::X => Gate::X(q),
            Pauli::Y => Gate::Y(q),
            Pauli::Z => Gate::Z(q),
        };
        out = apply_gate(n, &out, &g);
    }
    let phase = match p.phase() {
        Phase::PlusOne => c(1.0, 0.0),
        Phase::PlusI => c(0.0, 1.0),
        Phase::MinusOne => c(-1.0, 0.0),
        Phase::MinusI => c(0.0, -1.0),
    };
    out.iter().map(|a| a * phase).collect()
}

/// Projects onto the `±1` eigenspaces of a Hermitian Pauli string:
/// `[(p₊, |v₊⟩), (p₋, |v₋⟩)]`, normalized where the probability is nonzero.
pub fn measure(p: &PauliString, v: &Vector) -> [(f64, Vector); 2] {
    let pv = apply_pauli(p, v);
    let branch = |sign: f64| {
        let w: Vector = v.iter().zip(&pv).map(|(a, b)| (a + b * sign) * 0.5).collect();
        let prob: f64 = w.iter().map(|a| a.norm_sqr()).sum();
        let w = if prob > 1e-14 { w.iter().map(|a| a / prob.sqrt()).collect() } else { w };
        (prob, w)
    };
    [branch(1.0), branch(-1.0)]
}

pub fn outer(v: &Vector) -> Dense {
    v.iter().map(|a| v.iter().map(|b| a * b.conj()).collect()).collect()
}

pub fn mixture(items: &[(f64, Vector)]) -> Dense {
    let d = items[0].1.len();
    let mut m = vec![vec![c(0.0, 0.0); d]; d];
    for (p, v) in items {
        for (i, row) in outer(v).iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                m[i][j] += x * *p;
            }
        }
    }
    m
}

pub fn max_diff(a: &Dense, m: &nalgebra::DMatrix<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            worst = worst.max((x - m[(i, j)]).norm());
        }
    }
    worst
}

/// Partial transpose of the qubits in `left` by direct index manipulation.
pub fn partial_transpose(n: usize, m: &Dense, left: &[usize]) -> Dense {
    let mask: usize = left.iter().map(|&q| 1 << (n - 1 - q)).sum();
    let d = m.len();
    let mut out = vec![vec![c(0.0, 0.0); d]; d];
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let (ii, jj) = ((i & !mask) | (j & mask), (j & !mask) | (i & mask));
            out[ii][jj] = *x;
        }
    }
    out
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(m: &Dense) -> Vec<f64> {
    let d = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    assert!(x.im.abs() < 1e-12, "Jacobi oracle needs a real matrix");
                    x.re
                })
                .collect()
        })
        .collect();
    for _sweep in 0..100 {
        let off: f64 = (0..d).flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..d {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..d {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..d).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn random_gate<R: Rng>(rng: &mut R, n: usize) -> Gate {
    let q = rng.random_range(0..n);
    let kind = rng.random_range(0..if n > 1 { 9 } else { 6 });
    let other = if n > 1 { (q + 1 + rng.random_range(0..n - 1)) % n } else { q };
    match kind {
        0 => Gate::H(q),
        1 => Gate::S(q),
        2 => Gate::Sdg(q),
        3 => Gate::X(q),
        4 => Gate::Y(q),
        5 => Gate::Z(q),
        6 => Gate::Cnot(q, other),
        7 => Gate::Cz(q, other),
        _ => Gate::Swap(q, other),
    }
}

/// A Hermitian, non-identity Pauli string with a random sign.
pub fn random_pauli<R: Rng>(rng: &mut R, n: usize) -> PauliString {
    loop {
        let letters: Vec<(usize, Pauli)> = (0..n)
            .map(|q| (q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)]))
            .collect();
        let p = PauliString::from_letters(n, &letters);
        if !p.is_identity() {
            let phase = if rng.random_bool(0.5) { Phase::PlusOne } else { Phase::MinusOne };
            return p.with_phase(phase);
        }
    }
}

/// One random run: up to `max_gates` gates on `n ≤ 6` qubits interleaved
/// with up to three Pauli measurements, followed exhaustively by the engine
/// and by the state-vector oracle. Returns the number of compared branches,
/// or a description of the first disagreement.
pub fn cross_validate<R: Rng>(rng: &mut R, max_gates: usize, tol: f64) -> Result<usize, String> {
    let n = rng.random_range(1..=6);
    let gates = rng.random_range(0..=max_gates);
    let measurements = rng.random_range(0..=3);
    let mut steps: Vec<Option<Gate>> = (0..gates).map(|_| Some(random_gate(rng, n))).collect();
    for _ in 0..measurements {
        let at = rng.random_range(0..=steps.len());
        steps.insert(at, None);
    }

    let mut registry = PartyRegistry::new(&["P"]).unwrap();
    registry.add_qubits("P", n).unwrap();
    let start = Ensemble::pure(StabilizerState::zero(n), registry).map_err(|e| e.to_string())?;
    let mut engine: Vec<(Vec<Sign>, Dyadic, Ensemble)> = vec![(vec![], Dyadic::ONE, start)];
    let mut oracle: Vec<(Vec<Sign>, f64, Vector)> = vec![(vec![], 1.0, zero_state(n))];

    for step in steps {
        match step {
            Some(g) => {
                for (_, _, e) in &mut engine {
                    *e = e.map_members(&[g]).map_err(|e| e.to_string())?;
                }
                for (_, _, v) in &mut oracle {
                    *v = apply_gate(n, v, &g);
                }
            }
            None => {
                let p = random_pauli(rng, n);
                let mut next = Vec::new();
                for (hist, prob, e) in &engine {
                    for b in e.branch_measure(&Measurement::Pauli(p.clone())).map_err(|e| e.to_string())? {
                        let Outcome::Pauli(sign) = b.outcome else {
                            return Err("Pauli measurement gave a Bell outcome".into());
                        };
                        let mut h = hist.clone();
                        h.push(sign);
                        next.push((h, *prob * b.probability, b.ensemble));
                    }
                }
                engine = next;
                let mut next = Vec::new();
                for (hist, prob, v) in &oracle {
                    for (sign, (q, w)) in [Sign::Plus, Sign::Minus].into_iter().zip(measure(&p, v)) {
                        if q > 1e-12 {
                            let mut h = hist.clone();
                            h.push(sign);
                            next.push((h, prob * q, w));
                        }
                    }
                }
                oracle = next;
            }
        }
    }

    let total: Dyadic = engine.iter().map(|b| b.1).sum();
    if total != Dyadic::ONE {
        return Err(format!("branch probabilities sum to {total}"));
    }
    if engine.len() != oracle.len() {
        return Err(format!("{} engine branches, {} oracle branches", engine.len(), oracle.len()));
    }
    let all: Vec<usize> = (0..n).collect();
    for (hist, prob, e) in &engine {
        let (_, q, v) = oracle
            .iter()
            .find(|o| &o.0 == hist)
            .ok_or_else(|| format!("oracle has no branch {hist:?}"))?;
        if (prob.to_f64() - q).abs() > tol {
            return Err(format!("branch {hist:?}: probability {prob} vs {q}"));
        }
        let rho = e.densify(&all).map_err(|e| e.to_string())?;
        let d = max_diff(&outer(v), rho.matrix());
        if d > tol {
            return Err(format!("branch {hist:?}: density differs by {d}"));
        }
    }
    Ok(engine.len())
}
