use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::pauli::{words_for, Pauli, PauliString};
use super::{BellIndex, Sign, StabilizerError};
use crate::density::{DensityMatrix, DENSE_QUBIT_CAP};
use crate::dyadic::Dyadic;

/// Clifford gates. Pauli gates are included so corrections apply directly;
/// each equals a product of `H` and `S` (see the tests).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
}

impl Gate {
    pub fn pauli(letter: Pauli, q: usize) -> Option<Gate> {
        match letter {
            Pauli::I => None,
            Pauli::X => Some(Gate::X(q)),
            Pauli::Y => Some(Gate::Y(q)),
            Pauli::Z => Some(Gate::Z(q)),
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::Sdg(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => vec![q],
            Gate::Cnot(a, b) | Gate::Cz(a, b) | Gate::Swap(a, b) => vec![a, b],
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), StabilizerError> {
        let qs = self.qubits();
        if let Some(&q) = qs.iter().find(|&&q| q >= n) {
            return Err(StabilizerError::QubitOutOfRange { qubit: q, n });
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(StabilizerError::DuplicateTargets(qs[0]));
        }
        Ok(())
    }

    /// Conjugates `p` in place: `p ← U p U†`.
    pub fn conjugate(&self, p: &mut PauliString) {
        match *self {
            Gate::H(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                if x && z {
                    p.add_phase(2);
                }
                if x != z {
                    p.flip_x(q);
                    p.flip_z(q);
                }
            }
            Gate::S(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                if x && z {
                    p.add_phase(2);
                }
                if x {
                    p.flip_z(q);
                }
            }
            Gate::Sdg(q) => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                if x && !z {
                    p.add_phase(2);
                }
                if x {
                    p.flip_z(q);
                }
            }
            Gate::X(q) => {
                if p.z_bit(q) {
                    p.add_phase(2);
                }
            }
            Gate::Y(q) => {
                if p.x_bit(q) != p.z_bit(q) {
                    p.add_phase(2);
                }
            }
            Gate::Z(q) => {
                if p.x_bit(q) {
                    p.add_phase(2);
                }
            }
            Gate::Cnot(c, t) => {
                let (xc, zc, xt, zt) = (p.x_bit(c), p.z_bit(c), p.x_bit(t), p.z_bit(t));
                if xc && zt && (xt == zc) {
                    p.add_phase(2);
                }
                if xc {
                    p.flip_x(t);
                }
                if zt {
                    p.flip_z(c);
                }
            }
            Gate::Cz(a, b) => {
                Gate::H(b).conjugate(p);
                Gate::Cnot(a, b).conjugate(p);
                Gate::H(b).conjugate(p);
            }
            Gate::Swap(a, b) => {
                let (la, lb) = (p.letter(a), p.letter(b));
                p.set(a, lb);
                p.set(b, la);
            }
        }
    }
}

/// One outcome of a Pauli measurement.
#[derive(Clone, Debug)]
pub struct PauliBranch {
    pub outcome: Sign,
    pub probability: Dyadic,
    pub state: StabilizerState,
}

/// One outcome of a Bell measurement.
#[derive(Clone, Debug)]
pub struct BellBranch {
    pub outcome: BellIndex,
    pub probability: Dyadic,
    pub state: StabilizerState,
}

/// A pure stabilizer state given by `n` independent commuting Hermitian
/// generators. Global phase is not represented.
#[derive(Clone, Debug)]
pub struct StabilizerState {
    n: usize,
    gens: Vec<PauliString>,
    canonical: bool,
}

/// Column of the symplectic matrix: `(qubit, is_z)`.
type Column = (usize, bool);

fn has_column(p: &PauliString, (q, is_z): Column) -> bool {
    if is_z {
        p.z_bit(q)
    } else {
        p.x_bit(q)
    }
}

/// Full Gauss-Jordan elimination over GF(2) with phases tracked through
/// Pauli products. Pivots are chosen in the order of `columns`; the first
/// `rank` rows end up sorted by pivot and every pivot column is cleared in
/// all other rows. Returns the pivot column of each of those rows.
fn gauss_jordan(rows: &mut [PauliString], columns: impl IntoIterator<Item = Column>) -> Vec<Column> {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in columns {
        if rank == rows.len() {
            break;
        }
        let Some(found) = (rank..rows.len()).find(|&r| has_column(&rows[r], col)) else {
            continue;
        };
        rows.swap(rank, found);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let (before, pivot) = head.split_at_mut(rank);
        let pivot = &pivot[0];
        for row in before.iter_mut().chain(tail.iter_mut()) {
            if has_column(row, col) {
                row.mul_assign_right(pivot);
            }
        }
        pivots.push(col);
        rank += 1;
    }
    pivots
}

/// Qubit-major column order: `x_0, z_0, x_1, z_1, …`.
fn qubit_major(qubits: impl IntoIterator<Item = usize>) -> impl Iterator<Item = Column> {
    qubits.into_iter().flat_map(|q| [(q, false), (q, true)])
}

fn qubit_mask(n: usize, qubits: &[usize]) -> Vec<u64> {
    let mut mask = vec![0u64; words_for(n)];
    for &q in qubits {
        mask[q / 64] |= 1 << (q % 64);
    }
    mask
}

impl StabilizerState {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Self {
        let gens = (0..n).map(|q| PauliString::single(n, q, Pauli::Z)).collect();
        Self { n, gens, canonical: true }
    }

    /// Validates and wraps a generator list.
    pub fn from_generators(n: usize, gens: Vec<PauliString>) -> Result<Self, StabilizerError> {
        if gens.len() != n {
            return Err(StabilizerError::DimensionMismatch {
                expected: n,
                found: gens.len(),
            });
        }
        for g in &gens {
            if g.num_qubits() != n {
                return Err(StabilizerError::DimensionMismatch {
                    expected: n,
                    found: g.num_qubits(),
                });
            }
            if !g.is_hermitian() {
                return Err(StabilizerError::NonHermitian(g.to_string()));
            }
        }
        for (i, a) in gens.iter().enumerate() {
            for b in &gens[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(StabilizerError::Anticommuting(a.to_string(), b.to_string()));
                }
            }
        }
        let mut state = Self { n, gens, canonical: false };
        state.canonicalize();
        if state.gens.iter().any(|g| g.is_identity()) {
            return Err(StabilizerError::Dependent);
        }
        Ok(state)
    }

    /// Parses generators like `["+XX", "-ZZ"]`.
    pub fn from_strs(gens: &[&str]) -> Result<Self, StabilizerError> {
        let gens = gens
            .iter()
            .map(|s| s.parse::<PauliString>())
            .collect::<Result<Vec<_>, _>>()?;
        let n = gens.first().map_or(0, |g| g.num_qubits());
        Self::from_generators(n, gens)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.gens
    }

    /// Puts the generators into reduced row echelon form (qubit-major pivot
    /// order `x_0, z_0, x_1, …`). Two states are equal iff their canonical
    /// generator lists are identical, signs included.
    pub fn canonicalize(&mut self) {
        if self.canonical {
            return;
        }
        let pivots = gauss_jordan(&mut self.gens, qubit_major(0..self.n));
        // dependent rows reduce to ±I; keep them last so the caller can detect it
        debug_assert!(pivots.len() <= self.n);
        self.canonical = true;
    }

    pub fn canonical(&self) -> Self {
        let mut s = self.clone();
        s.canonicalize();
        s
    }

    /// Canonical generator list, usable as an ordering/hashing key.
    pub fn canonical_key(&self) -> Vec<PauliString> {
        self.canonical().gens
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let n = self.n + other.n;
        let targets: Vec<usize> = (self.n..n).collect();
        let mut gens: Vec<PauliString> = self.gens.iter().map(|g| g.extended(other.n)).collect();
        gens.extend(
            other
                .gens
                .iter()
                .map(|g| g.embed(n, &targets).expect("targets sized to the tensor factor")),
        );
        Self {
            n,
            gens,
            canonical: self.canonical && other.canonical,
        }
    }

    /// Appends `extra` qubits in `|0⟩`.
    pub fn extended(&self, extra: usize) -> Self {
        self.tensor(&Self::zero(extra))
    }

    pub fn apply(&self, gate: Gate) -> Result<Self, StabilizerError> {
        let mut s = self.clone();
        s.apply_mut(gate)?;
        Ok(s)
    }

    pub fn apply_circuit(&self, gates: &[Gate]) -> Result<Self, StabilizerError> {
        let mut s = self.clone();
        for &g in gates {
            s.apply_mut(g)?;
        }
        Ok(s)
    }

    pub(crate) fn apply_mut(&mut self, gate: Gate) -> Result<(), StabilizerError> {
        gate.validate(self.n)?;
        for g in &mut self.gens {
            gate.conjugate(g);
        }
        // Pauli gates only flip signs and keep the echelon structure
        if !matches!(gate, Gate::X(_) | Gate::Y(_) | Gate::Z(_)) {
            self.canonical = false;
        }
        Ok(())
    }

    /// Conjugation by an arbitrary Pauli string (phase irrelevant).
    pub fn apply_pauli(&self, p: &PauliString) -> Result<Self, StabilizerError> {
        if p.num_qubits() != self.n {
            return Err(StabilizerError::DimensionMismatch {
                expected: self.n,
                found: p.num_qubits(),
            });
        }
        let mut s = self.clone();
        for g in &mut s.gens {
            if !g.commutes_with(p) {
                g.add_phase(2);
            }
        }
        Ok(s)
    }

    /// Expectation of a Hermitian Pauli string, which is always `+1`, `-1` or `0`.
    pub fn expectation(&self, p: &PauliString) -> Result<i8, StabilizerError> {
        let Some(sign) = p.sign() else {
            return Err(StabilizerError::NonHermitian(p.to_string()));
        };
        if self.gens.iter().any(|g| !g.commutes_with(p)) {
            return Ok(0);
        }
        let canon = self.canonical();
        let mut rest = p.clone().with_phase(super::Phase::PlusOne);
        for (g, col) in canon.gens.iter().zip(qubit_major_pivots(&canon)) {
            if has_column(&rest, col) {
                rest.mul_assign_right(g);
            }
        }
        debug_assert!(rest.is_identity(), "commuting operator must lie in the group");
        let residual: i8 = if rest.phase_exponent() == 0 { 1 } else { -1 };
        Ok(sign * residual)
    }

    /// Projective measurement of a Hermitian Pauli string; all branches.
    pub fn measure_pauli(&self, p: &PauliString) -> Result<Vec<PauliBranch>, StabilizerError> {
        if p.num_qubits() != self.n {
            return Err(StabilizerError::DimensionMismatch {
                expected: self.n,
                found: p.num_qubits(),
            });
        }
        if !p.is_hermitian() {
            return Err(StabilizerError::NonHermitian(p.to_string()));
        }
        if p.is_identity() {
            let outcome = if p.phase_exponent() == 0 { Sign::Plus } else { Sign::Minus };
            return Ok(vec![PauliBranch {
                outcome,
                probability: Dyadic::ONE,
                state: self.clone(),
            }]);
        }
        let anti: Vec<usize> = (0..self.n).filter(|&i| !self.gens[i].commutes_with(p)).collect();
        let Some((&first, others)) = anti.split_first() else {
            let outcome = match self.expectation(p)? {
                1 => Sign::Plus,
                _ => Sign::Minus,
            };
            return Ok(vec![PauliBranch {
                outcome,
                probability: Dyadic::ONE,
                state: self.clone(),
            }]);
        };
        let mut base = self.clone();
        base.canonical = false;
        let pivot = base.gens[first].clone();
        for &j in others {
            base.gens[j].mul_assign_right(&pivot);
        }
        let branches = [Sign::Plus, Sign::Minus]
            .into_iter()
            .map(|outcome| {
                let mut s = base.clone();
                s.gens[first] = match outcome {
                    Sign::Plus => p.clone(),
                    Sign::Minus => p.negated(),
                };
                PauliBranch {
                    outcome,
                    probability: Dyadic::half_pow(1),
                    state: s,
                }
            })
            .collect();
        Ok(branches)
    }

    /// Bell measurement of `(qa, qb)`: `XX` then `ZZ`, all branches.
    pub fn bell_measure(&self, qa: usize, qb: usize) -> Result<Vec<BellBranch>, StabilizerError> {
        for q in [qa, qb] {
            if q >= self.n {
                return Err(StabilizerError::QubitOutOfRange { qubit: q, n: self.n });
            }
        }
        if qa == qb {
            return Err(StabilizerError::DuplicateTargets(qa));
        }
        let xx = PauliString::from_letters(self.n, &[(qa, Pauli::X), (qb, Pauli::X)]);
        let zz = PauliString::from_letters(self.n, &[(qa, Pauli::Z), (qb, Pauli::Z)]);
        let mut out = Vec::with_capacity(4);
        for bx in self.measure_pauli(&xx)? {
            for bz in bx.state.measure_pauli(&zz)? {
                out.push(BellBranch {
                    outcome: BellIndex::from_signs(bx.outcome, bz.outcome),
                    probability: bx.probability * bz.probability,
                    state: bz.state,
                });
            }
        }
        out.sort_by_key(|b| b.outcome);
        Ok(out)
    }

    /// Generators of the subgroup supported inside `qubits`, projected onto
    /// them (in the listed order).
    fn local_subgroup(&self, qubits: &[usize]) -> Result<Vec<PauliString>, StabilizerError> {
        let mut inside = vec![false; self.n];
        for &q in qubits {
            if q >= self.n {
                return Err(StabilizerError::QubitOutOfRange { qubit: q, n: self.n });
            }
            if inside[q] {
                return Err(StabilizerError::DuplicateTargets(q));
            }
            inside[q] = true;
        }
        let outside: Vec<usize> = (0..self.n).filter(|&q| !inside[q]).collect();
        let mut rows = self.gens.clone();
        let pivots = gauss_jordan(&mut rows, qubit_major(outside).chain(qubit_major(qubits.to_vec())));
        let mask = qubit_mask(self.n, qubits);
        Ok(rows[..pivots.len()]
            .iter()
            .filter(|r| r.supported_within(&mask))
            .map(|r| r.project(qubits))
            .collect())
    }

    /// Reduced density operator on `qubits` (dense ordering follows the list):
    /// `2^-k Σ g` over stabilizer-group elements supported inside the subset.
    pub fn reduced_density(&self, qubits: &[usize]) -> Result<DensityMatrix, StabilizerError> {
        let k = qubits.len();
        if k > DENSE_QUBIT_CAP {
            return Err(StabilizerError::TooLarge { qubits: k, cap: DENSE_QUBIT_CAP });
        }
        let local = self.local_subgroup(qubits)?;
        let dim = 1usize << k;
        let local_qubits: Vec<usize> = (0..k).collect();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        let scale = 1.0 / dim as f64;
        // Gray-code walk over the 2^r subgroup elements
        let mut element = PauliString::identity(k);
        let r = local.len();
        for step in 0..(1u64 << r) {
            if step > 0 {
                let flip = step.trailing_zeros() as usize;
                element.mul_assign_right(&local[flip]);
            }
            for b in 0..dim {
                let (row, amp) = element.act_on_basis(&local_qubits, b);
                m[(row, b)] += amp * scale;
            }
        }
        Ok(DensityMatrix::from_matrix_unchecked(k, m))
    }

    /// The pure state on `qubits` when the state factorizes across that
    /// subset, `None` when the subset is entangled with the rest.
    pub fn restrict(&self, qubits: &[usize]) -> Result<Option<StabilizerState>, StabilizerError> {
        let local = self.local_subgroup(qubits)?;
        if local.len() != qubits.len() {
            return Ok(None);
        }
        Ok(Some(Self::from_generators(qubits.len(), local)?))
    }

    /// Resets a decoupled subset to `|0…0⟩`; errors if it is entangled with
    /// the rest.
    pub fn reset_decoupled(&self, qubits: &[usize]) -> Result<Self, StabilizerError> {
        let rest: Vec<usize> = {
            let mut inside = vec![false; self.n];
            for &q in qubits {
                if q >= self.n {
                    return Err(StabilizerError::QubitOutOfRange { qubit: q, n: self.n });
                }
                inside[q] = true;
            }
            (0..self.n).filter(|&q| !inside[q]).collect()
        };
        let mut rows = self.gens.clone();
        let pivots = gauss_jordan(&mut rows, qubit_major(qubits.to_vec()).chain(qubit_major(rest.clone())));
        let mask = qubit_mask(self.n, &rest);
        let mut gens: Vec<PauliString> = rows[..pivots.len()]
            .iter()
            .filter(|r| r.supported_within(&mask))
            .cloned()
            .collect();
        if gens.len() != rest.len() {
            return Err(StabilizerError::Entangled(qubits.to_vec()));
        }
        gens.extend(qubits.iter().map(|&q| PauliString::single(self.n, q, Pauli::Z)));
        Ok(Self {
            n: self.n,
            gens,
            canonical: false,
        })
    }

    /// Dense amplitudes (qubit 0 most significant), fixed up to global phase.
    pub fn to_statevector(&self) -> Result<Vec<Complex64>, StabilizerError> {
        if self.n > DENSE_QUBIT_CAP {
            return Err(StabilizerError::TooLarge {
                qubits: self.n,
                cap: DENSE_QUBIT_CAP,
            });
        }
        let dim = 1usize << self.n;
        let qubits: Vec<usize> = (0..self.n).collect();
        let project = |mut v: Vec<Complex64>| {
            for g in &self.gens {
                let mut gv = vec![Complex64::new(0.0, 0.0); dim];
                for (b, &a) in v.iter().enumerate() {
                    if a.norm_sqr() > 0.0 {
                        let (to, amp) = g.act_on_basis(&qubits, b);
                        gv[to] += amp * a;
                    }
                }
                for (x, y) in v.iter_mut().zip(gv) {
                    *x = (*x + y) * 0.5;
                }
            }
            v
        };
        // some basis state has overlap at least 2^-n with the stabilizer state
        for start in 0..dim {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[start] = Complex64::new(1.0, 0.0);
            let v = project(v);
            let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                let phase = v[start] / v[start].norm();
                return Ok(v.into_iter().map(|a| a / (norm * phase)).collect());
            }
        }
        unreachable!("a stabilizer state overlaps some basis state")
    }
}

fn qubit_major_pivots(canon: &StabilizerState) -> Vec<Column> {
    let mut pivots = Vec::with_capacity(canon.n);
    let mut cols = qubit_major(0..canon.n);
    for g in &canon.gens {
        let col = cols.by_ref().find(|&c| has_column(g, c)).expect("canonical row has a pivot");
        pivots.push(col);
    }
    pivots
}

impl PartialEq for StabilizerState {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.canonical_key() == other.canonical_key()
    }
}

impl Eq for StabilizerState {}

impl fmt::Display for StabilizerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.gens.iter().map(|g| g.to_string()).collect();
        write!(f, "<{}>", gens.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(gens: &[&str]) -> StabilizerState {
        StabilizerState::from_strs(gens).unwrap()
    }

    #[test]
    fn hadamard_maps_zero_to_plus() {
        let s = StabilizerState::zero(1).apply(Gate::H(0)).unwrap();
        assert_eq!(s, st(&["+X"]));
    }

    #[test]
    fn bell_circuit_gives_phi_plus() {
        let s = StabilizerState::zero(2)
            .apply_circuit(&[Gate::H(0), Gate::Cnot(0, 1)])
            .unwrap();
        assert_eq!(s, st(&["+XX", "+ZZ"]));
    }

    #[test]
    fn s_squared_is_z() {
        let mut p: PauliString = "X".parse().unwrap();
        Gate::S(0).conjugate(&mut p);
        assert_eq!(p.to_string(), "+Y");
        Gate::S(0).conjugate(&mut p);
        assert_eq!(p.to_string(), "-X");
        let mut q: PauliString = "X".parse().unwrap();
        Gate::Z(0).conjugate(&mut q);
        assert_eq!(p, q);
    }

    #[test]
    fn pauli_gates_are_h_s_compositions() {
        let x = [Gate::H(0), Gate::S(0), Gate::S(0), Gate::H(0)];
        let z = [Gate::S(0), Gate::S(0)];
        for letter in ["X", "Y", "Z"] {
            let base: PauliString = letter.parse().unwrap();
            let conj = |gates: &[Gate]| {
                let mut p = base.clone();
                for g in gates {
                    g.conjugate(&mut p);
                }
                p
            };
            assert_eq!(conj(&x), conj(&[Gate::X(0)]));
            assert_eq!(conj(&z), conj(&[Gate::Z(0)]));
            let y: Vec<Gate> = z.iter().chain(x.iter()).copied().collect();
            assert_eq!(conj(&y), conj(&[Gate::Y(0)]));
        }
    }

    #[test]
    fn rejects_bad_targets() {
        let s = StabilizerState::zero(2);
        assert!(matches!(s.apply(Gate::H(2)), Err(StabilizerError::QubitOutOfRange { .. })));
        assert!(matches!(s.apply(Gate::Cnot(1, 1)), Err(StabilizerError::DuplicateTargets(1))));
    }

    #[test]
    fn rejects_invalid_generators() {
        assert!(StabilizerState::from_strs(&["XI", "ZI"]).is_err());
        assert!(StabilizerState::from_strs(&["XX", "XX"]).is_err());
        assert!(StabilizerState::from_strs(&["+iZ"]).is_err());
    }

    #[test]
    fn measure_z_on_zero_is_deterministic() {
        let b = StabilizerState::zero(1).measure_pauli(&"Z".parse().unwrap()).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].outcome, Sign::Plus);
        assert_eq!(b[0].probability, Dyadic::ONE);
    }

    #[test]
    fn measure_z_on_plus_splits() {
        let plus = st(&["X"]);
        let b = plus.measure_pauli(&"Z".parse().unwrap()).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].outcome, Sign::Plus);
        assert_eq!(b[0].probability, Dyadic::half_pow(1));
        assert_eq!(b[0].state, st(&["Z"]));
        assert_eq!(b[1].state, st(&["-Z"]));
    }

    #[test]
    fn outcome_is_the_eigenvalue_of_the_signed_string() {
        let b = st(&["X"]).measure_pauli(&"-Z".parse().unwrap()).unwrap();
        assert_eq!(b[0].outcome, Sign::Plus);
        assert_eq!(b[0].state, st(&["-Z"]));
        assert_eq!(b[1].state, st(&["Z"]));
    }

    #[test]
    fn measure_xx_on_phi_plus() {
        let b = st(&["XX", "ZZ"]).measure_pauli(&"XX".parse().unwrap()).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].outcome, Sign::Plus);
        let yy = st(&["XX", "ZZ"]).expectation(&"YY".parse().unwrap()).unwrap();
        assert_eq!(yy, -1);
    }

    #[test]
    fn imaginary_measurement_rejected() {
        let r = StabilizerState::zero(1).measure_pauli(&"+iZ".parse().unwrap());
        assert!(matches!(r, Err(StabilizerError::NonHermitian(_))));
    }

    #[test]
    fn bell_measure_zero_zero() {
        let b = StabilizerState::zero(2).bell_measure(0, 1).unwrap();
        let outcomes: Vec<_> = b.iter().map(|b| (b.outcome, b.probability)).collect();
        assert_eq!(
            outcomes,
            vec![
                (BellIndex::PhiPlus, Dyadic::half_pow(1)),
                (BellIndex::PhiMinus, Dyadic::half_pow(1))
            ]
        );
        assert!(matches!(
            StabilizerState::zero(2).bell_measure(1, 1),
            Err(StabilizerError::DuplicateTargets(1))
        ));
    }

    #[test]
    fn reduced_density_examples() {
        let phi = st(&["XX", "ZZ"]);
        let half = phi.reduced_density(&[0]).unwrap();
        assert!((half.entry(0, 0).re - 0.5).abs() < 1e-15);
        assert!(half.entry(0, 1).norm() < 1e-15);
        let zero = StabilizerState::zero(1).reduced_density(&[0]).unwrap();
        assert!((zero.entry(0, 0).re - 1.0).abs() < 1e-15);
        let plus_zero = st(&["XI", "IZ"]).reduced_density(&[0]).unwrap();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((plus_zero.entry(i, j).re - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn statevector_examples() {
        let s = 1.0 / 2f64.sqrt();
        let zero = StabilizerState::zero(1).to_statevector().unwrap();
        assert!((zero[0].re - 1.0).abs() < 1e-15 && zero[1].norm() < 1e-15);
        let phi = st(&["XX", "ZZ"]).to_statevector().unwrap();
        let want = [s, 0.0, 0.0, s];
        for (a, w) in phi.iter().zip(want) {
            assert!((a - Complex64::new(w, 0.0)).norm() < 1e-12);
        }
        let psi = st(&["-XX", "-ZZ"]).to_statevector().unwrap();
        assert!((psi[1] + psi[2]).norm() < 1e-12);
        assert!((psi[1].norm() - s).abs() < 1e-12);
    }

    #[test]
    fn restrict_and_reset() {
        // Φ⁺ on (0,2), |+⟩ on 1
        let s = st(&["XIX", "ZIZ", "IXI"]);
        assert_eq!(s.restrict(&[1]).unwrap(), Some(st(&["X"])));
        assert_eq!(s.restrict(&[0]).unwrap(), None);
        assert_eq!(s.restrict(&[2, 0]).unwrap(), Some(st(&["XX", "ZZ"])));
        let r = s.reset_decoupled(&[1]).unwrap();
        assert_eq!(r, st(&["XIX", "ZIZ", "IZI"]));
        assert!(matches!(s.reset_decoupled(&[0]), Err(StabilizerError::Entangled(_))));
    }

    #[test]
    fn canonical_form_is_basis_independent() {
        let a = st(&["XX", "ZZ"]);
        let b = st(&["-YY", "ZZ"]);
        assert_eq!(a, b);
        assert_eq!(a.canonical_key(), b.canonical_key());
        assert_ne!(a, st(&["XX", "-ZZ"]));
    }
}
