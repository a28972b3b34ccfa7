//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a flat `Float64Array`; the layouts are documented
//! per function. Chains are capped at [`MAX_QUBITS`] sites to keep the page
//! responsive.

use nalgebra::Matrix3;
use qchain_core::chain::{build_hamiltonian_eigen, mixing_angles, ChainSpec};
use qchain_core::lindblad::{
    evolve_with, rates_from_angles, steady_state_with, EvolveOptions, LindbladGenerator, NoiseSpec, SteadyStateOptions,
};
use qchain_core::measures::{log_negativity, pair_log_negativity, reduce_pure};
use qchain_core::state::{eigenbasis_product, ground_state};
use qchain_core::witness::{bound_c1, bound_c2, bound_c2_optimized, CorrelationMatrix};
use qchain_core::{ChainError, UnitaryPropagator};
use wasm_bindgen::prelude::*;

pub const MAX_QUBITS: usize = 6;

type Result<T> = std::result::Result<T, String>;

fn err(e: ChainError) -> String {
    e.to_string()
}

fn chain(n_qubits: usize, delta: f64, coupling: f64) -> Result<ChainSpec> {
    if !(2..=MAX_QUBITS).contains(&n_qubits) {
        return Err(format!("the demo supports 2 to {MAX_QUBITS} qubits"));
    }
    let spec = ChainSpec::homogeneous(n_qubits, 0.0, delta, coupling);
    spec.validate().map_err(err)?;
    Ok(spec)
}

/// E_N of pairs (1,2), (1,3) and (1,N) after a coupling quench from `k_ini`
/// to `k_fin`, starting in the ground state of the initial chain.
///
/// Layout: `points` times, then `points` values for each of the three pairs.
#[wasm_bindgen]
pub fn quench_curves(
    n_qubits: usize,
    delta: f64,
    k_ini: f64,
    k_fin: f64,
    gamma: f64,
    n_thermal: f64,
    t_max: f64,
    points: usize,
) -> Result<Vec<f64>> {
    let fin = chain(n_qubits, delta, k_fin)?;
    let ini = fin.with_uniform_coupling(k_ini);
    if points < 2 || !(t_max > 0.0) {
        return Err("need t_max > 0 and at least two points".into());
    }
    let psi0 = if k_ini == 0.0 {
        eigenbasis_product(n_qubits).map_err(err)?
    } else {
        ground_state(&build_hamiltonian_eigen(&ini).map_err(err)?).map_err(err)?.state
    };
    let pairs = [(0, 1), (0, 2.min(n_qubits - 1)), (0, n_qubits - 1)];
    let h = build_hamiltonian_eigen(&fin).map_err(err)?;
    let mut out = vec![0.0; 4 * points];
    let sample = |k: usize| k as f64 * t_max / (points - 1) as f64;
    if gamma == 0.0 {
        let prop = UnitaryPropagator::new(&h);
        let ev = prop.pure(&psi0).map_err(err)?;
        for k in 0..points {
            let psi = ev.at(sample(k));
            out[k] = sample(k);
            for (p, &(i, j)) in pairs.iter().enumerate() {
                out[(p + 1) * points + k] = log_negativity(&reduce_pure(&psi, &[i, j]).map_err(err)?, &[i]).map_err(err)?;
            }
        }
        return Ok(out);
    }
    let rates = rates_from_angles(&mixing_angles(&fin).map_err(err)?, &NoiseSpec { gamma, n_thermal });
    let gen = LindbladGenerator::new(&h, &rates).map_err(err)?;
    let spacing = t_max / (points - 1) as f64;
    let substeps = (spacing / (0.05f64).min(0.1 / gen.frequency_scale())).ceil().max(1.0) as usize;
    let opts = EvolveOptions { positivity_every: 0, ..EvolveOptions::new(t_max, spacing / substeps as f64, substeps) };
    let mut k = 0;
    evolve_with(&psi0.to_density(), &gen, &opts, |t, rho| {
        if k < points {
            out[k] = t;
            for (p, &(i, j)) in pairs.iter().enumerate() {
                out[(p + 1) * points + k] = pair_log_negativity(rho, i, j)?;
            }
            k += 1;
        }
        Ok(())
    })
    .map_err(err)?;
    Ok(out)
}

/// Steady-state E_N(1,2) for each Γ in `gammas` (all positive).
///
/// Layout: one value per Γ, then one convergence flag (1 or 0) per Γ.
#[wasm_bindgen]
pub fn steady_entanglement(n_qubits: usize, delta: f64, k_over_delta: f64, n_thermal: f64, gammas: Vec<f64>) -> Result<Vec<f64>> {
    let spec = chain(n_qubits, delta, k_over_delta * delta)?;
    let h = build_hamiltonian_eigen(&spec).map_err(err)?;
    let angles = mixing_angles(&spec).map_err(err)?;
    let rho0 = eigenbasis_product(n_qubits).map_err(err)?.to_density();
    let mut values = Vec::with_capacity(gammas.len());
    let mut flags = Vec::with_capacity(gammas.len());
    for &gamma in &gammas {
        if !(gamma > 0.0) {
            return Err(format!("Γ = {gamma}: steady states need Γ > 0"));
        }
        let gen = LindbladGenerator::new(&h, &rates_from_angles(&angles, &NoiseSpec { gamma, n_thermal })).map_err(err)?;
        let ss = steady_state_with(&rho0, &gen, &SteadyStateOptions::default()).map_err(err)?;
        values.push(pair_log_negativity(&ss.state, 0, 1).map_err(err)?);
        flags.push(if ss.converged { 1.0 } else { 0.0 });
    }
    values.extend(flags);
    Ok(values)
}

/// Witness bounds for a row-major 3×3 correlation matrix.
///
/// Layout: `[C1, C2, C2']`; C2' is NaN when the matrix is too asymmetric.
#[wasm_bindgen]
pub fn witness_bounds(entries: Vec<f64>) -> Result<Vec<f64>> {
    if entries.len() != 9 {
        return Err(format!("expected 9 correlation entries, got {}", entries.len()));
    }
    let x = CorrelationMatrix::from_entries(1, 2, Matrix3::from_row_slice(&entries)).map_err(err)?;
    let opt = bound_c2_optimized(&x).map_or(f64::NAN, |o| o.value);
    Ok(vec![bound_c1(&x), bound_c2(&x), opt])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quench_layout_and_start() {
        let out = quench_curves(4, 0.1, 0.0, 0.025, 0.0, 0.0, 20.0, 11).unwrap();
        assert_eq!(out.len(), 44);
        assert_eq!(out[10], 20.0);
        assert_eq!(out[11], 0.0);
        assert!(out[11..22].iter().any(|v| *v > 0.05));
        let noisy = quench_curves(4, 0.1, 0.0, 0.025, 0.01, 0.0, 20.0, 11).unwrap();
        assert!((noisy[0] - 0.0).abs() < 1e-12 && (noisy[10] - 20.0).abs() < 1e-9);
        assert!(noisy[11..22].iter().zip(&out[11..22]).all(|(a, b)| (a - b).abs() < 0.05));
    }

    #[test]
    fn ground_state_start_is_entangled() {
        let out = quench_curves(3, 0.1, 0.01, 0.025, 0.0, 0.0, 10.0, 3).unwrap();
        assert!(out[3] > 0.01);
    }

    #[test]
    fn steady_values_and_flags() {
        let out = steady_entanglement(2, 0.1, 0.25, 10.0, vec![0.05]).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out[0].abs() < 1e-9);
        assert_eq!(out[1], 1.0);
        assert!(steady_entanglement(2, 0.1, 0.25, 0.0, vec![0.0]).is_err());
    }

    #[test]
    fn bell_bounds() {
        let b = witness_bounds(vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0]).unwrap();
        assert!(b.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let asym = witness_bounds(vec![0.5, 0.3, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.5]).unwrap();
        assert!(asym[2].is_nan());
        assert!(witness_bounds(vec![0.0; 8]).is_err());
        assert!(quench_curves(9, 0.1, 0.0, 0.025, 0.0, 0.0, 1.0, 3).is_err());
    }
}
