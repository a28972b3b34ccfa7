//! Chain parameterisation: per-site biases and splittings, bond couplings,
//! single-qubit mixing angles and the quench protocol.
//!
//! Energies are in units of the charging energy E_C and times in E_C⁻¹
//! (ħ = k_B = 1). Sites are 0-based in the library API; site 0 is the most
//! significant qubit of every dense basis index.

mod disorder;
mod hamiltonian;

pub use disorder::{sample_disorder, DisorderSpec, DisorderTarget};
pub use hamiltonian::{build_hamiltonian_eigen, build_hamiltonian_lab, HermitianOperator, PauliTerm};

use serde::{Deserialize, Serialize};

use crate::error::{ChainError, Result};

/// Largest chain that may be built as a dense operator.
pub const MAX_DENSE_QUBITS: usize = 14;

/// Energy bias of a charge qubit, ε = 4 E_C (1 − 2 N_g).
pub fn charge_qubit_bias(n_g: f64, e_c: f64) -> f64 {
    4.0 * e_c * (1.0 - 2.0 * n_g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_qubits: usize,
    pub epsilon: Vec<f64>,
    pub delta: Vec<f64>,
    /// Bond strengths K_i between sites i and i + 1 (length N − 1).
    pub coupling: Vec<f64>,
    #[serde(default = "default_energy_unit")]
    pub energy_unit_kelvin: f64,
}

fn default_energy_unit() -> f64 {
    1.0
}

impl ChainSpec {
    pub fn homogeneous(n_qubits: usize, epsilon: f64, delta: f64, coupling: f64) -> Self {
        ChainSpec {
            n_qubits,
            epsilon: vec![epsilon; n_qubits],
            delta: vec![delta; n_qubits],
            coupling: vec![coupling; n_qubits.saturating_sub(1)],
            energy_unit_kelvin: 1.0,
        }
    }

    /// Degeneracy-point chain with Δ = 0.1 and K = Δ/4.
    pub fn standard(n_qubits: usize) -> Self {
        Self::homogeneous(n_qubits, 0.0, 0.1, 0.025)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        if let Some((i, d)) = self.delta.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
            return Err(ChainError::InvalidSpec(format!("delta[{i}] = {d} must be positive")));
        }
        Ok(())
    }

    /// Length, finiteness and unit checks without the Δ_i > 0 requirement.
    pub fn validate_shape(&self) -> Result<()> {
        let n = self.n_qubits;
        if n == 0 {
            return Err(ChainError::InvalidSpec("chain needs at least one qubit".into()));
        }
        if self.epsilon.len() != n || self.delta.len() != n {
            return Err(ChainError::InvalidSpec(format!(
                "expected {n} biases and splittings, got {} and {}",
                self.epsilon.len(),
                self.delta.len()
            )));
        }
        if self.coupling.len() != n - 1 {
            return Err(ChainError::InvalidSpec(format!(
                "open chain of {n} sites needs {} couplings, got {}",
                n - 1,
                self.coupling.len()
            )));
        }
        if self.epsilon.iter().chain(&self.delta).chain(&self.coupling).any(|v| !v.is_finite()) {
            return Err(ChainError::InvalidSpec("non-finite bias or coupling".into()));
        }
        if !(self.energy_unit_kelvin > 0.0) {
            return Err(ChainError::InvalidSpec("energy_unit_kelvin must be positive".into()));
        }
        Ok(())
    }

    /// Same chain with every bond set to `k`.
    pub fn with_uniform_coupling(&self, k: f64) -> Self {
        ChainSpec { coupling: vec![k; self.coupling.len()], ..self.clone() }
    }

    /// Converts a temperature in Kelvin to energy units of E_C.
    pub fn temperature_in_energy_units(&self, kelvin: f64) -> f64 {
        kelvin / self.energy_unit_kelvin
    }
}

/// Single-qubit mixing angles θ_i = atan2(Δ_i, ε_i) and splittings ω_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingAngles {
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl MixingAngles {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// cos θ_i, computed as ε_i / ω_i so that it is exactly zero at ε_i = 0.
    pub fn cos(&self, i: usize) -> f64 {
        self.cos[i]
    }

    pub fn sin(&self, i: usize) -> f64 {
        self.sin[i]
    }
}

pub fn mixing_angles(spec: &ChainSpec) -> Result<MixingAngles> {
    let n = spec.n_qubits;
    if spec.epsilon.len() != n || spec.delta.len() != n {
        return Err(ChainError::InvalidSpec("bias/splitting lengths differ from n_qubits".into()));
    }
    let mut out = MixingAngles {
        theta: Vec::with_capacity(n),
        omega: Vec::with_capacity(n),
        cos: Vec::with_capacity(n),
        sin: Vec::with_capacity(n),
    };
    for (i, (&eps, &delta)) in spec.epsilon.iter().zip(&spec.delta).enumerate() {
        if !(delta > 0.0) {
            return Err(ChainError::InvalidSpec(format!(
                "delta[{i}] = {delta}: mixing angle needs a positive splitting"
            )));
        }
        let omega = eps.hypot(delta);
        out.theta.push(delta.atan2(eps));
        out.omega.push(omega);
        out.cos.push(eps / omega);
        out.sin.push(delta / omega);
    }
    Ok(out)
}

/// Instantaneous switch of the homogeneous coupling from `k_ini` to `k_fin`
/// at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchSpec {
    pub k_ini: f64,
    pub k_fin: f64,
}

impl QuenchSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_ini >= 0.0) || !self.k_fin.is_finite() {
            return Err(ChainError::InvalidParameter(format!(
                "quench needs k_ini >= 0 and finite k_fin, got {} -> {}",
                self.k_ini, self.k_fin
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    #[test]
    fn charge_bias_formula() {
        assert_eq!(charge_qubit_bias(0.5, 1.0), 0.0);
        assert_eq!(charge_qubit_bias(0.25, 1.0), 2.0);
        assert_eq!(charge_qubit_bias(0.75, 2.0), -4.0);
    }

    #[test]
    fn angles_at_degeneracy_and_off() {
        let mut spec = ChainSpec::homogeneous(3, 0.0, 0.1, 0.025);
        spec.epsilon = vec![0.0, 0.1, -0.1];
        let a = mixing_angles(&spec).unwrap();
        assert_eq!(a.theta[0], FRAC_PI_2);
        assert_eq!(a.cos(0), 0.0);
        assert_eq!(a.sin(0), 1.0);
        assert!((a.omega[0] - 0.1).abs() < 1e-15);
        assert!((a.theta[1] - FRAC_PI_4).abs() < 1e-15);
        assert!((a.omega[1] - 0.1 * SQRT_2).abs() < 1e-15);
        assert!((a.theta[2] - 3.0 * FRAC_PI_4).abs() < 1e-15);
        assert!((a.omega[2] - 0.1 * SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_positive_splitting() {
        let mut spec = ChainSpec::standard(2);
        spec.delta[1] = 0.0;
        assert!(mixing_angles(&spec).is_err());
        assert!(spec.validate().is_err());
    }

    #[test]
    fn validate_checks_lengths() {
        let mut spec = ChainSpec::standard(4);
        assert!(spec.validate().is_ok());
        spec.coupling.push(0.1);
        assert!(matches!(spec.validate(), Err(ChainError::InvalidSpec(_))));
    }
}
