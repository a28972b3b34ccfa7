//! Initial states of the chain and state-level utilities: product and
//! Bell-head preparations in both frames, ground and Gibbs states, fidelity.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::chain::{HermitianOperator, MixingAngles};
use crate::error::{ChainError, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};

/// Normalised pure state on 2^N amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(n_qubits: usize, amplitudes: DVector<C64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if amplitudes.len() != dim {
            return Err(ChainError::DimensionMismatch { expected: dim, got: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(ChainError::InvalidParameter(format!("state norm {norm} differs from 1")));
        }
        Ok(StateVector { n_qubits, amplitudes })
    }

    /// Normalises `amplitudes` before wrapping them.
    pub fn normalized(n_qubits: usize, mut amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) {
            return Err(ChainError::InvalidParameter("zero state vector".into()));
        }
        amplitudes.unscale_mut(norm);
        Self::new(n_qubits, amplitudes)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// |⟨self|other⟩|².
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix { n_qubits: self.n_qubits, matrix: m }
    }
}

/// Dense density matrix on 2^N × 2^N entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: CMatrix,
}

/// Deviations of a candidate density matrix from the physical constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub fn is_physical(&self) -> bool {
        self.hermiticity <= 1e-12 && self.trace_error <= 1e-10 && self.min_eigenvalue >= -1e-9
    }
}

impl DensityMatrix {
    /// Wraps a matrix after checking Hermiticity, unit trace and positivity.
    pub fn new(n_qubits: usize, matrix: CMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(n_qubits, matrix)?;
        let diag = rho.diagnostics();
        if diag.hermiticity > 1e-12 {
            return Err(ChainError::NotHermitian { deviation: diag.hermiticity });
        }
        if diag.trace_error > 1e-10 {
            return Err(ChainError::InvalidParameter(format!("trace deviates from 1 by {:.3e}", diag.trace_error)));
        }
        if diag.min_eigenvalue < -1e-9 {
            return Err(ChainError::Positivity { time: 0.0, min_eigenvalue: diag.min_eigenvalue });
        }
        Ok(rho)
    }

    /// Only the shape is checked.
    pub fn from_matrix_unchecked(n_qubits: usize, matrix: CMatrix) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(ChainError::DimensionMismatch { expected: dim, got: matrix.nrows() });
        }
        Ok(DensityMatrix { n_qubits, matrix })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        DensityMatrix { n_qubits, matrix: CMatrix::identity(dim, dim) / C64::from(dim as f64) }
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

    pub fn matrix_mut(&mut self) -> &mut CMatrix {
        &mut self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.matrix)
    }

    /// Tr ρ², computed without forming the product.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut m = self.matrix.clone();
        linalg::hermitize(&mut m);
        linalg::hermitian_eigenvalues(&m)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        let scale = linalg::max_abs(&self.matrix).max(f64::MIN_POSITIVE);
        StateDiagnostics {
            hermiticity: linalg::hermiticity_defect(&self.matrix) / scale,
            trace_error: (self.trace() - ONE).norm(),
            min_eigenvalue: self.min_eigenvalue(),
        }
    }

    /// Tr[A ρ].
    pub fn expectation(&self, op: &CMatrix) -> C64 {
        let n = self.dim();
        let mut acc = ZERO;
        for j in 0..n {
            for k in 0..n {
                acc += op[(j, k)] * self.matrix[(k, j)];
            }
        }
        acc
    }

    /// Makes the matrix exactly Hermitian and rescales it to unit trace.
    /// Returns the trace before rescaling.
    pub fn renormalize(&mut self) -> C64 {
        linalg::hermitize(&mut self.matrix);
        let tr = self.trace();
        if tr.re != 0.0 {
            self.matrix.unscale_mut(tr.re);
        }
        tr
    }
}

fn product_of(n: usize, single: [C64; 2]) -> DVector<C64> {
    DVector::from_fn(1 << n, |b, _| {
        (0..n).map(|i| single[linalg::bit(b, i, n)]).product::<C64>()
    })
}

/// |+⟩^⊗N in the charge basis; every amplitude equals 2^{−N/2}.
pub fn plus_product(n: usize) -> Result<StateVector> {
    if n == 0 {
        return Err(ChainError::InvalidParameter("need at least one qubit".into()));
    }
    let h = C64::from(FRAC_1_SQRT_2);
    StateVector::normalized(n, product_of(n, [h, h]))
}

/// (|↑↓⟩ + |↓↑⟩)/√2 on sites 0, 1 followed by |+⟩^⊗(N−2).
pub fn bell_head(n: usize) -> Result<StateVector> {
    let h = C64::from(FRAC_1_SQRT_2);
    bell_then_product(n, [h, h])
}

/// |0⟩^⊗N in the single-qubit eigenbasis.
pub fn eigenbasis_product(n: usize) -> Result<StateVector> {
    if n == 0 {
        return Err(ChainError::InvalidParameter("need at least one qubit".into()));
    }
    StateVector::new(n, product_of(n, [ONE, ZERO]))
}

/// (|01⟩ + |10⟩)/√2 on sites 0, 1 followed by |0⟩^⊗(N−2), eigenbasis.
pub fn eigenbasis_bell_head(n: usize) -> Result<StateVector> {
    bell_then_product(n, [ONE, ZERO])
}

fn bell_then_product(n: usize, tail: [C64; 2]) -> Result<StateVector> {
    if n < 2 {
        return Err(ChainError::InvalidParameter(format!("Bell-head state needs N >= 2, got {n}")));
    }
    let amps = DVector::from_fn(1 << n, |b, _| {
        let pair = match (linalg::bit(b, 0, n), linalg::bit(b, 1, n)) {
            (0, 1) | (1, 0) => C64::from(FRAC_1_SQRT_2),
            _ => ZERO,
        };
        (2..n).map(|i| tail[linalg::bit(b, i, n)]).product::<C64>() * pair
    });
    StateVector::normalized(n, amps)
}

/// Single-qubit change of basis whose columns are |0⟩ = (cos θ/2, sin θ/2)
/// and |1⟩ = (sin θ/2, −cos θ/2) in the charge basis (|↑⟩, |↓⟩).
///
/// With this choice σᶻ_charge = cos θ σᶻ + sin θ σˣ in the eigenbasis.
pub fn eigenbasis_rotation(theta: f64) -> CMatrix {
    let (s, c) = (0.5 * theta).sin_cos();
    CMatrix::from_row_slice(2, 2, &[C64::from(c), C64::from(s), C64::from(s), C64::from(-c)])
}

/// Tensor product of the per-site rotations, mapping eigenbasis amplitudes to
/// charge-basis amplitudes.
pub fn frame_rotation(angles: &MixingAngles) -> CMatrix {
    angles
        .theta
        .iter()
        .map(|&t| eigenbasis_rotation(t))
        .reduce(|acc, u| linalg::kron(&acc, &u))
        .unwrap_or_else(|| CMatrix::identity(1, 1))
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: StateVector,
    pub energy: f64,
    /// Number of eigenvalues within 1e-10 of the minimum.
    pub degeneracy: usize,
}

pub fn ground_state(h: &HermitianOperator) -> Result<GroundState> {
    let m = h.matrix();
    let scale = linalg::max_abs(m).max(f64::MIN_POSITIVE);
    let deviation = linalg::hermiticity_defect(m);
    if deviation > 1e-12 * scale {
        return Err(ChainError::NotHermitian { deviation });
    }
    let (values, vectors) = h.eigen();
    let e0 = values[0];
    let tol = 1e-10 * e0.abs().max(1.0);
    let degeneracy = values.iter().take_while(|&&e| e - e0 <= tol).count();
    let state = StateVector::normalized(h.n_qubits(), vectors.column(0).into_owned())?;
    Ok(GroundState { state, energy: e0, degeneracy })
}

/// Gibbs state exp(−H/T)/Z with T in energy units of E_C.
pub fn thermal_state(h: &HermitianOperator, temperature: f64) -> Result<DensityMatrix> {
    if !(temperature > 0.0) {
        return Err(ChainError::InvalidParameter(format!("temperature must be positive, got {temperature}")));
    }
    let (values, vectors) = h.eigen();
    let e0 = values[0];
    let weights: Vec<f64> = values.iter().map(|e| (-(e - e0) / temperature).exp()).collect();
    let z: f64 = weights.iter().sum();
    let dim = values.len();
    let mut scaled = vectors.clone();
    for (j, w) in weights.iter().enumerate() {
        scaled.column_mut(j).scale_mut(w / z);
    }
    let mut rho = scaled * vectors.adjoint();
    linalg::hermitize(&mut rho);
    debug_assert_eq!(rho.nrows(), dim);
    let mut out = DensityMatrix::from_matrix_unchecked(h.n_qubits(), rho)?;
    out.renormalize();
    Ok(out)
}

/// Gibbs state for a temperature given in Kelvin, with E_C = `energy_unit_kelvin` K.
pub fn thermal_state_kelvin(h: &HermitianOperator, kelvin: f64, energy_unit_kelvin: f64) -> Result<DensityMatrix> {
    if !(energy_unit_kelvin > 0.0) {
        return Err(ChainError::InvalidParameter("energy_unit_kelvin must be positive".into()));
    }
    thermal_state(h, kelvin / energy_unit_kelvin)
}

/// ⟨g|ρ|g⟩.
pub fn fidelity(g: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    if g.dim() != rho.dim() {
        return Err(ChainError::DimensionMismatch { expected: rho.dim(), got: g.dim() });
    }
    let v = rho.matrix() * g.amplitudes();
    let f = g.amplitudes().dotc(&v);
    debug_assert!(f.im.abs() < 1e-10);
    Ok(f.re.clamp(0.0, 1.0))
}
