use num_complex::Complex64 as C64;

use super::{mixing_angles, ChainSpec, MAX_DENSE_QUBITS};
use crate::error::{ChainError, Result};
use crate::linalg::{self, CMatrix};

/// Real-coefficient Pauli string built from σˣ and σᶻ factors only.
///
/// `x_mask` and `z_mask` use the dense-index bit layout, so the string maps
/// |b⟩ to (−1)^{popcount(b & z_mask)} |b ⊕ x_mask⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub x_mask: usize,
    pub z_mask: usize,
}

impl PauliTerm {
    fn accumulate(&self, m: &mut CMatrix) {
        for b in 0..m.ncols() {
            let sign = if (b & self.z_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(b ^ self.x_mask, b)] += C64::new(sign * self.coeff, 0.0);
        }
    }
}

/// Dense Hermitian operator on the 2^N chain space.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    n_qubits: usize,
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Wraps a matrix, checking Hermiticity to 1e-12 relative to its largest entry.
    pub fn from_matrix(n_qubits: usize, matrix: CMatrix) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(ChainError::DimensionMismatch { expected: dim, got: matrix.nrows() });
        }
        let scale = linalg::max_abs(&matrix).max(f64::MIN_POSITIVE);
        let deviation = linalg::hermiticity_defect(&matrix);
        if deviation > 1e-12 * scale {
            return Err(ChainError::NotHermitian { deviation });
        }
        Ok(HermitianOperator { n_qubits, matrix })
    }

    pub fn from_terms(n_qubits: usize, terms: &[PauliTerm]) -> Result<Self> {
        guard(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut matrix = CMatrix::zeros(dim, dim);
        for term in terms {
            term.accumulate(&mut matrix);
        }
        Ok(HermitianOperator { n_qubits, matrix })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Eigenvalues ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// Eigenvalues ascending with the matching eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        linalg::hermitian_eigen(&self.matrix)
    }

    /// Largest absolute eigenvalue bound from the row sums.
    pub fn norm_bound(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

fn guard(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_QUBITS {
        return Err(ChainError::DimensionGuard { n, max: MAX_DENSE_QUBITS });
    }
    Ok(())
}

/// ℋ_S = −½ Σ (ε_i σᶻ_i + Δ_i σˣ_i) − ½ Σ K_i σᶻ_i σᶻ_{i+1} in the charge basis.
pub fn build_hamiltonian_lab(spec: &ChainSpec) -> Result<HermitianOperator> {
    spec.validate_shape()?;
    let n = spec.n_qubits;
    guard(n)?;
    let mut terms = Vec::with_capacity(3 * n);
    for i in 0..n {
        let m = linalg::site_mask(i, n);
        terms.push(PauliTerm { coeff: -0.5 * spec.epsilon[i], x_mask: 0, z_mask: m });
        terms.push(PauliTerm { coeff: -0.5 * spec.delta[i], x_mask: m, z_mask: 0 });
    }
    for (i, &k) in spec.coupling.iter().enumerate() {
        let m = linalg::site_mask(i, n) | linalg::site_mask(i + 1, n);
        terms.push(PauliTerm { coeff: -0.5 * k, x_mask: 0, z_mask: m });
    }
    HermitianOperator::from_terms(n, &prune(terms))
}

/// ℋ′_S = −½ Σ ω_i σᶻ_i − ½ Σ K_i (c_i σᶻ_i + s_i σˣ_i)(c_{i+1} σᶻ_{i+1} + s_{i+1} σˣ_{i+1})
/// in the single-qubit eigenbasis {|0⟩, |1⟩}.
pub fn build_hamiltonian_eigen(spec: &ChainSpec) -> Result<HermitianOperator> {
    spec.validate()?;
    let n = spec.n_qubits;
    guard(n)?;
    let angles = mixing_angles(spec)?;
    HermitianOperator::from_terms(n, &prune(eigen_terms(spec, &angles)))
}

pub(crate) fn eigen_terms(spec: &ChainSpec, angles: &super::MixingAngles) -> Vec<PauliTerm> {
    let n = spec.n_qubits;
    let mut terms = Vec::with_capacity(5 * n);
    for i in 0..n {
        terms.push(PauliTerm { coeff: -0.5 * angles.omega[i], x_mask: 0, z_mask: linalg::site_mask(i, n) });
    }
    for (i, &k) in spec.coupling.iter().enumerate() {
        let (a, b) = (linalg::site_mask(i, n), linalg::site_mask(i + 1, n));
        let (ca, sa, cb, sb) = (angles.cos(i), angles.sin(i), angles.cos(i + 1), angles.sin(i + 1));
        terms.push(PauliTerm { coeff: -0.5 * k * ca * cb, x_mask: 0, z_mask: a | b });
        terms.push(PauliTerm { coeff: -0.5 * k * ca * sb, x_mask: b, z_mask: a });
        terms.push(PauliTerm { coeff: -0.5 * k * sa * cb, x_mask: a, z_mask: b });
        terms.push(PauliTerm { coeff: -0.5 * k * sa * sb, x_mask: a | b, z_mask: 0 });
    }
    terms
}

fn prune(terms: Vec<PauliTerm>) -> Vec<PauliTerm> {
    terms.into_iter().filter(|t| t.coeff != 0.0).collect()
}
