//! Dense Hermitian operators on at most [`DENSE_QUBIT_CAP`] qubits: partial
//! transpose, negativity, PPT certificates, fidelities, party permutations,
//! and the two-qubit correlated-Pauli twirl.
//!
//! Basis ordering is big-endian: the first qubit is the most significant bit
//! of the row index.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stabilizer::{Pauli, PauliString};

pub const DENSE_QUBIT_CAP: usize = 12;

/// Default equality tolerance for dense comparisons.
pub const EQ_TOLERANCE: f64 = 1e-12;
/// Default PPT boundary: the smallest partial-transpose eigenvalue may dip to
/// `-PPT_TOLERANCE` before the state counts as NPT.
pub const PPT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("{0} qubits exceeds the dense cap of {DENSE_QUBIT_CAP}")]
    TooLarge(usize),
    #[error("matrix is {rows}x{cols}, expected {dim}x{dim}")]
    Shape { rows: usize, cols: usize, dim: usize },
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace {0} differs from 1")]
    Trace(f64),
    #[error("minimum eigenvalue {0:e} is negative")]
    NotPositive(f64),
    #[error("invalid cut: {0}")]
    InvalidCut(String),
    #[error("permutation {0:?} is not a bijection on the qubits")]
    InvalidPermutation(Vec<usize>),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("werner parameter {0} outside [0, 1]")]
    WernerParameter(f64),
}

/// A bipartition of the qubits of a `k`-qubit operator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Cut {
    pub fn new(k: usize, left: &[usize]) -> Result<Self, DensityError> {
        let mut seen = vec![false; k];
        for &q in left {
            if q >= k {
                return Err(DensityError::InvalidCut(format!("qubit {q} out of range for {k}")));
            }
            if seen[q] {
                return Err(DensityError::InvalidCut(format!("qubit {q} listed twice")));
            }
            seen[q] = true;
        }
        let right: Vec<usize> = (0..k).filter(|&q| !seen[q]).collect();
        if left.is_empty() || right.is_empty() {
            return Err(DensityError::InvalidCut("both sides must be nonempty".into()));
        }
        let mut left = left.to_vec();
        left.sort_unstable();
        Ok(Self { left, right })
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    pub fn num_qubits(&self) -> usize {
        self.left.len() + self.right.len()
    }

    /// The same bipartition with the sides exchanged.
    pub fn mirrored(&self) -> Self {
        Self {
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }
}

/// Hermitian `2^k × 2^k` operator, not necessarily positive (e.g. a partial
/// transpose).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    k: usize,
    m: DMatrix<Complex64>,
}

impl HermitianOperator {
    pub fn num_qubits(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// Largest `|m_ij − conj(m_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.m)
    }

    /// Real spectrum, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_spectrum(&self.m)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Trace norm `Σ|λ|`.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.abs()).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.m, &other.m)
    }

    /// Partial transpose on the `left` side of `cut`.
    pub fn partial_transpose(&self, cut: &Cut) -> Result<HermitianOperator, DensityError> {
        if cut.num_qubits() != self.k {
            return Err(DensityError::InvalidCut(format!(
                "cut covers {} qubits, operator has {}",
                cut.num_qubits(),
                self.k
            )));
        }
        let mask: usize = cut
            .left
            .iter()
            .map(|&q| 1usize << (self.k - 1 - q))
            .sum();
        let dim = self.m.nrows();
        let mut out = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                // swap the left-side bits between row and column index
                let ii = (i & !mask) | (j & mask);
                let jj = (j & !mask) | (i & mask);
                out[(ii, jj)] = self.m[(i, j)];
            }
        }
        Ok(HermitianOperator { k: self.k, m: out })
    }
}

/// A validated density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(HermitianOperator);

/// Result of a PPT test across one cut.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PptCertificate {
    pub is_ppt: bool,
    pub min_eigenvalue: f64,
}

fn dim_of(k: usize) -> Result<usize, DensityError> {
    if k > DENSE_QUBIT_CAP {
        return Err(DensityError::TooLarge(k));
    }
    Ok(1 << k)
}

fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn hermitian_spectrum(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-12) and positivity
    /// (minimum eigenvalue ≥ −1e-10).
    pub fn new(k: usize, m: DMatrix<Complex64>) -> Result<Self, DensityError> {
        let dim = dim_of(k)?;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(DensityError::Shape {
                rows: m.nrows(),
                cols: m.ncols(),
                dim,
            });
        }
        let defect = hermiticity_defect(&m);
        if defect > EQ_TOLERANCE {
            return Err(DensityError::NotHermitian(defect));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > EQ_TOLERANCE || tr.im.abs() > EQ_TOLERANCE {
            return Err(DensityError::Trace(tr.re));
        }
        let min = hermitian_spectrum(&m)[0];
        if min < -PPT_TOLERANCE {
            return Err(DensityError::NotPositive(min));
        }
        Ok(Self(HermitianOperator { k, m }))
    }

    pub(crate) fn from_matrix_unchecked(k: usize, m: DMatrix<Complex64>) -> Self {
        Self(HermitianOperator { k, m })
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn from_pure(amplitudes: &[Complex64]) -> Result<Self, DensityError> {
        let k = amplitudes.len().trailing_zeros() as usize;
        let dim = dim_of(k)?;
        if dim != amplitudes.len() {
            return Err(DensityError::Shape {
                rows: amplitudes.len(),
                cols: 1,
                dim,
            });
        }
        let v = DMatrix::from_column_slice(dim, 1, amplitudes);
        Self::new(k, &v * v.adjoint())
    }

    pub fn maximally_mixed(k: usize) -> Result<Self, DensityError> {
        let dim = dim_of(k)?;
        let m = DMatrix::<Complex64>::identity(dim, dim) / Complex64::new(dim as f64, 0.0);
        Ok(Self::from_matrix_unchecked(k, m))
    }

    /// Convex combination `Σ w_i ρ_i`; weights must sum to one.
    pub fn mixture(items: &[(f64, &DensityMatrix)]) -> Result<Self, DensityError> {
        let Some((_, first)) = items.first() else {
            return Err(DensityError::DimensionMismatch { expected: 1, found: 0 });
        };
        let k = first.num_qubits();
        let dim = 1 << k;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (w, rho) in items {
            if rho.num_qubits() != k {
                return Err(DensityError::DimensionMismatch {
                    expected: k,
                    found: rho.num_qubits(),
                });
            }
            m += rho.matrix() * Complex64::new(*w, 0.0);
        }
        Self::new(k, m)
    }

    pub fn num_qubits(&self) -> usize {
        self.0.k
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0.m
    }

    pub fn as_operator(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.0.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues()
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    pub fn approx_eq(&self, other: &DensityMatrix, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix, DensityError> {
        let k = self.num_qubits() + other.num_qubits();
        dim_of(k)?;
        Ok(Self::from_matrix_unchecked(k, self.matrix().kronecker(other.matrix())))
    }

    pub fn partial_transpose(&self, cut: &Cut) -> Result<HermitianOperator, DensityError> {
        self.0.partial_transpose(cut)
    }

    /// `(‖ρ^{T_left}‖₁ − 1) / 2` from the full spectrum.
    pub fn negativity(&self, cut: &Cut) -> Result<f64, DensityError> {
        let pt = self.partial_transpose(cut)?;
        Ok(((pt.trace_norm() - 1.0) / 2.0).max(0.0))
    }

    pub fn ppt_certificate(&self, cut: &Cut, tol: f64) -> Result<PptCertificate, DensityError> {
        let min_eigenvalue = self.partial_transpose(cut)?.min_eigenvalue();
        Ok(PptCertificate {
            is_ppt: min_eigenvalue >= -tol,
            min_eigenvalue,
        })
    }

    /// `⟨ψ|ρ|ψ⟩` for a unit vector `ψ`.
    pub fn fidelity_pure(&self, target: &[Complex64]) -> Result<f64, DensityError> {
        let dim = self.matrix().nrows();
        if target.len() != dim {
            return Err(DensityError::DimensionMismatch {
                expected: dim,
                found: target.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                acc += target[i].conj() * self.0.m[(i, j)] * target[j];
            }
        }
        Ok(acc.re.clamp(0.0, 1.0))
    }

    /// Relabels qubits: output qubit `j` is input qubit `perm[j]`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<DensityMatrix, DensityError> {
        let k = self.num_qubits();
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
            return Err(DensityError::InvalidPermutation(perm.to_vec()));
        }
        let dim = 1usize << k;
        let map = |b: usize| {
            let mut out = 0;
            for (j, &src) in perm.iter().enumerate() {
                let bit = (b >> (k - 1 - j)) & 1;
                out |= bit << (k - 1 - src);
            }
            out
        };
        let idx: Vec<usize> = (0..dim).map(map).collect();
        let m = DMatrix::from_fn(dim, dim, |i, j| self.0.m[(idx[i], idx[j])]);
        Ok(Self::from_matrix_unchecked(k, m))
    }

    /// Partial trace keeping `keep` (in the listed order).
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix, DensityError> {
        let k = self.num_qubits();
        let cut = Cut::new(k, keep).or_else(|e| {
            if keep.len() == k {
                Ok(Cut {
                    left: keep.to_vec(),
                    right: vec![],
                })
            } else {
                Err(e)
            }
        })?;
        let traced = cut.right.clone();
        // bring kept qubits to the front in the requested order
        let order: Vec<usize> = keep.iter().copied().chain(traced.iter().copied()).collect();
        let permuted = self.permute_qubits(&order)?;
        let kd = 1usize << keep.len();
        let td = 1usize << traced.len();
        let m = DMatrix::from_fn(kd, kd, |i, j| {
            (0..td)
                .map(|t| permuted.0.m[(i * td + t, j * td + t)])
                .sum::<Complex64>()
        });
        Ok(Self::from_matrix_unchecked(keep.len(), m))
    }
}

/// `p |Ψ⁻⟩⟨Ψ⁻| + (1 − p) I/4`.
pub fn werner(p: f64) -> Result<DensityMatrix, DensityError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(DensityError::WernerParameter(p));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let singlet = DensityMatrix::from_pure(&[
        Complex64::new(0.0, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(0.0, 0.0),
    ])?;
    let mixed = DensityMatrix::maximally_mixed(2)?;
    let m = singlet.matrix() * Complex64::new(p, 0.0) + mixed.matrix() * Complex64::new(1.0 - p, 0.0);
    Ok(DensityMatrix::from_matrix_unchecked(2, m))
}

fn dense_pauli(p: &PauliString) -> DMatrix<Complex64> {
    let k = p.num_qubits();
    let dim = 1usize << k;
    let qubits: Vec<usize> = (0..k).collect();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for b in 0..dim {
        let (row, amp) = p.act_on_basis(&qubits, b);
        m[(row, b)] = amp;
    }
    m
}

/// The channel a four-party bound-entangled state induces on a two-qubit
/// input: `ρ ↦ ¼ Σ_σ (σ⊗σ) ρ (σ⊗σ)` over `σ ∈ {I, X, Y, Z}`.
pub fn abe_channel(rho: &DensityMatrix) -> Result<DensityMatrix, DensityError> {
    if rho.num_qubits() != 2 {
        return Err(DensityError::DimensionMismatch {
            expected: 2,
            found: rho.num_qubits(),
        });
    }
    let mut out = DMatrix::<Complex64>::zeros(4, 4);
    for letter in Pauli::ALL {
        let u = dense_pauli(&PauliString::from_letters(2, &[(0, letter), (1, letter)]));
        out += &u * rho.matrix() * u.adjoint();
    }
    Ok(DensityMatrix::from_matrix_unchecked(2, out / Complex64::new(4.0, 0.0)))
}
