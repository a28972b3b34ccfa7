//! Exact closed-system propagation through the spectral decomposition of H.
//!
//! Used for noiseless runs (Γ = 0, n_T = 0), where it replaces time stepping
//! by one diagonalisation, and as the oracle for the dense integrator.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::chain::HermitianOperator;
use crate::error::{ChainError, Result};
use crate::linalg::CMatrix;
use crate::state::{DensityMatrix, StateVector};

#[derive(Debug, Clone)]
pub struct UnitaryPropagator {
    n_qubits: usize,
    energies: Vec<f64>,
    vectors: CMatrix,
}

impl UnitaryPropagator {
    pub fn new(h: &HermitianOperator) -> Self {
        let (energies, vectors) = h.eigen();
        UnitaryPropagator { n_qubits: h.n_qubits(), energies, vectors }
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Prepares a pure initial state for repeated evaluation.
    pub fn pure(&self, psi0: &StateVector) -> Result<PureEvolution<'_>> {
        if psi0.dim() != self.energies.len() {
            return Err(ChainError::DimensionMismatch { expected: self.energies.len(), got: psi0.dim() });
        }
        let coeffs = self.vectors.adjoint() * psi0.amplitudes();
        Ok(PureEvolution { prop: self, coeffs })
    }

    /// Prepares a mixed initial state for repeated evaluation.
    pub fn mixed(&self, rho0: &DensityMatrix) -> Result<MixedEvolution<'_>> {
        if rho0.dim() != self.energies.len() {
            return Err(ChainError::DimensionMismatch { expected: self.energies.len(), got: rho0.dim() });
        }
        let in_eigenbasis = self.vectors.adjoint() * rho0.matrix() * &self.vectors;
        Ok(MixedEvolution { prop: self, in_eigenbasis })
    }
}

pub struct PureEvolution<'a> {
    prop: &'a UnitaryPropagator,
    coeffs: DVector<C64>,
}

impl PureEvolution<'_> {
    /// e^{−iHt}|ψ₀⟩.
    pub fn at(&self, t: f64) -> StateVector {
        let phased = DVector::from_iterator(
            self.coeffs.len(),
            self.coeffs.iter().zip(&self.prop.energies).map(|(c, &e)| c * C64::from_polar(1.0, -e * t)),
        );
        let amps = &self.prop.vectors * phased;
        StateVector::normalized(self.prop.n_qubits, amps).expect("unitary evolution preserves the norm")
    }
}

pub struct MixedEvolution<'a> {
    prop: &'a UnitaryPropagator,
    in_eigenbasis: CMatrix,
}

impl MixedEvolution<'_> {
    /// e^{−iHt} ρ₀ e^{iHt}.
    pub fn at(&self, t: f64) -> DensityMatrix {
        let e = &self.prop.energies;
        let phased = CMatrix::from_fn(e.len(), e.len(), |a, b| {
            self.in_eigenbasis[(a, b)] * C64::from_polar(1.0, -(e[a] - e[b]) * t)
        });
        let mut rho = &self.prop.vectors * phased * self.prop.vectors.adjoint();
        crate::linalg::hermitize(&mut rho);
        DensityMatrix::from_matrix_unchecked(self.prop.n_qubits, rho).expect("dimension preserved")
    }
}
