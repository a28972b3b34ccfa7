//! Simulation of open qubit chains: chain Hamiltonians and disorder, initial
//! state preparation, Lindblad evolution, logarithmic negativity, correlation
//! witnesses and a mixed-state matrix-product engine for long chains.

pub mod chain;
pub mod error;
pub mod linalg;
pub mod lindblad;
pub mod measures;
pub mod mps;
pub mod state;
pub mod unitary;
pub mod witness;

pub use chain::{
    build_hamiltonian_eigen, build_hamiltonian_lab, charge_qubit_bias, mixing_angles, sample_disorder, ChainSpec,
    DisorderSpec, DisorderTarget, HermitianOperator, MixingAngles, QuenchSpec,
};
pub use error::{ChainError, Result};
pub use lindblad::{evolve, evolve_with, rates_from_angles, EvolveOptions, LindbladGenerator, NoiseSpec, RateSet};
pub use measures::{block_log_negativity, log_negativity, pair_log_negativity, reduce, ReducedState};
pub use mps::{Checkpoint, MpsMixedState, TebdEvolver, TrotterPlan};
pub use state::{DensityMatrix, StateVector};
pub use unitary::UnitaryPropagator;
pub use witness::{bound_c1, bound_c2, bound_c2_optimized, correlation, correlation_matrix, CorrelationMatrix};
