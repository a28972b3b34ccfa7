//! Reduced states, partial transposes and the logarithmic negativity
//! E_N = log₂ ‖ρ^{T_A}‖₁.

use crate::error::{ChainError, Result};
use crate::linalg::{self, CMatrix, ZERO};
use crate::state::{DensityMatrix, StateVector};

/// Largest number of retained sites supported by [`reduce`].
pub const MAX_REDUCED_SITES: usize = 4;

/// Density matrix of a few retained sites, in increasing site order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    sites: Vec<usize>,
    matrix: CMatrix,
}

impl ReducedState {
    pub fn new(sites: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        if sites.is_empty() || sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ChainError::InvalidSites(format!("sites {sites:?} must be strictly increasing")));
        }
        let dim = 1usize << sites.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(ChainError::DimensionMismatch { expected: dim, got: matrix.nrows() });
        }
        Ok(ReducedState { sites, matrix })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(self.sites.len(), self.matrix.clone()).expect("shape checked")
    }

    fn local_mask(&self, part: &[usize]) -> Result<usize> {
        if part.is_empty() || part.len() >= self.sites.len() {
            return Err(ChainError::InvalidSites(format!(
                "partition {part:?} must be a non-empty proper subset of {:?}",
                self.sites
            )));
        }
        let k = self.sites.len();
        let mut mask = 0usize;
        for &p in part {
            let pos = self
                .sites
                .iter()
                .position(|&s| s == p)
                .ok_or_else(|| ChainError::InvalidSites(format!("site {p} not among {:?}", self.sites)))?;
            if mask & linalg::site_mask(pos, k) != 0 {
                return Err(ChainError::InvalidSites(format!("site {p} repeated in partition")));
            }
            mask |= linalg::site_mask(pos, k);
        }
        Ok(mask)
    }
}

/// Partial trace of `rho` onto `sites` (0-based, distinct, any order; the
/// result is ordered increasingly).
pub fn reduce(rho: &DensityMatrix, sites: &[usize]) -> Result<ReducedState> {
    reduce_matrix(rho.matrix(), rho.n_qubits(), sites)
}

/// Full-register offsets of every local configuration of the kept and the
/// traced sites.
struct Split {
    kept: Vec<usize>,
    kept_full: Vec<usize>,
    env_full: Vec<usize>,
}

fn split_sites(n: usize, sites: &[usize]) -> Result<Split> {
    let mut kept = sites.to_vec();
    kept.sort_unstable();
    if kept.is_empty() || kept.len() > MAX_REDUCED_SITES {
        return Err(ChainError::InvalidSites(format!("keep between 1 and {MAX_REDUCED_SITES} sites, got {}", kept.len())));
    }
    if kept.windows(2).any(|w| w[0] == w[1]) || kept.iter().any(|&s| s >= n) {
        return Err(ChainError::InvalidSites(format!("sites {sites:?} invalid for a chain of {n}")));
    }
    let k = kept.len();
    let traced: Vec<usize> = (0..n).filter(|s| !kept.contains(s)).collect();
    let spread = |local: usize, bits: &[usize], width: usize| -> usize {
        bits.iter()
            .enumerate()
            .filter(|(pos, _)| linalg::bit(local, *pos, width) == 1)
            .map(|(_, &site)| linalg::site_mask(site, n))
            .sum()
    };
    let kept_full = (0..1usize << k).map(|x| spread(x, &kept, k)).collect();
    let env_full = (0..1usize << traced.len()).map(|e| spread(e, &traced, traced.len())).collect();
    Ok(Split { kept, kept_full, env_full })
}

/// Partial trace of |ψ⟩⟨ψ| onto `sites` without forming the full density matrix.
pub fn reduce_pure(psi: &StateVector, sites: &[usize]) -> Result<ReducedState> {
    let Split { kept, kept_full, env_full } = split_sites(psi.n_qubits(), sites)?;
    let a = psi.amplitudes();
    let dk = kept_full.len();
    let mut out = CMatrix::zeros(dk, dk);
    for &e in &env_full {
        for y in 0..dk {
            let ay = a[kept_full[y] | e].conj();
            if ay == ZERO {
                continue;
            }
            for x in 0..dk {
                out[(x, y)] += a[kept_full[x] | e] * ay;
            }
        }
    }
    ReducedState::new(kept, out)
}

pub fn reduce_matrix(m: &CMatrix, n: usize, sites: &[usize]) -> Result<ReducedState> {
    let Split { kept, kept_full, env_full } = split_sites(n, sites)?;
    let dk = kept_full.len();
    let mut out = CMatrix::zeros(dk, dk);
    for y in 0..dk {
        for x in 0..dk {
            let mut acc = ZERO;
            for &e in &env_full {
                acc += m[(kept_full[x] | e, kept_full[y] | e)];
            }
            out[(x, y)] = acc;
        }
    }
    ReducedState::new(kept, out)
}

/// Transposes the indices of the sites in `part`, leaving the rest untouched.
pub fn partial_transpose(rs: &ReducedState, part: &[usize]) -> Result<CMatrix> {
    let mask = rs.local_mask(part)?;
    let m = &rs.matrix;
    let d = m.nrows();
    let mut out = CMatrix::zeros(d, d);
    for b in 0..d {
        for a in 0..d {
            let a2 = (a & !mask) | (b & mask);
            let b2 = (b & !mask) | (a & mask);
            out[(a2, b2)] = m[(a, b)];
        }
    }
    Ok(out)
}

/// Σ|λ_i| of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    let mut h = m.clone();
    linalg::hermitize(&mut h);
    linalg::hermitian_eigenvalues(&h).iter().map(|v| v.abs()).sum()
}

/// Logarithmic negativity across the cut (`part` | rest of `rs`).
pub fn log_negativity(rs: &ReducedState, part: &[usize]) -> Result<f64> {
    let pt = partial_transpose(rs, part)?;
    Ok(log_negativity_from_trace_norm(trace_norm_hermitian(&pt)))
}

/// log₂ of a trace norm, clamped to zero for norms at or below one.
pub fn log_negativity_from_trace_norm(norm: f64) -> f64 {
    if norm <= 1.0 {
        0.0
    } else {
        norm.log2()
    }
}

/// E_N of the two-site reduced state of sites `i` and `j`.
pub fn pair_log_negativity(rho: &DensityMatrix, i: usize, j: usize) -> Result<f64> {
    let rs = reduce(rho, &[i, j])?;
    log_negativity(&rs, &[i.min(j)])
}

/// E_N across the cut between two blocks of two sites each.
pub fn block_log_negativity(rho: &DensityMatrix, block_a: [usize; 2], block_b: [usize; 2]) -> Result<f64> {
    let all = [block_a[0], block_a[1], block_b[0], block_b[1]];
    let mut sorted = all;
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(ChainError::InvalidSites(format!("blocks {block_a:?} and {block_b:?} overlap")));
    }
    let rs = reduce(rho, &all)?;
    log_negativity(&rs, &block_a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{bell_head, eigenbasis_bell_head, eigenbasis_product, plus_product};
    use nalgebra::DVector;
    use num_complex::Complex64 as C64;

    fn bell() -> CMatrix {
        eigenbasis_bell_head(2).unwrap().to_density().into_matrix()
    }

    #[test]
    fn reduce_product_state() {
        let rho = eigenbasis_product(5).unwrap().to_density();
        let rs = reduce(&rho, &[3, 1]).unwrap();
        assert_eq!(rs.sites(), &[1, 3]);
        assert!((rs.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(rs.matrix().iter().skip(1).all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn reduce_bell_head_tail_factors_out() {
        let rho = bell_head(4).unwrap().to_density();
        let rs = reduce(&rho, &[0, 1]).unwrap();
        assert!((rs.matrix() - bell()).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn reduce_is_consistent() {
        let psi = StateVector::normalized(
            4,
            DVector::from_fn(16, |i, _| C64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos())),
        )
        .unwrap();
        let rho = psi.to_density();
        let three = reduce(&rho, &[0, 1, 2]).unwrap();
        let nested = reduce_matrix(three.matrix(), 3, &[0, 1]).unwrap();
        let direct = reduce(&rho, &[0, 1]).unwrap();
        assert!((nested.matrix() - direct.matrix()).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn pure_reduction_matches_density_reduction() {
        let psi = StateVector::normalized(
            5,
            DVector::from_fn(32, |i, _| C64::new((i as f64 * 0.3).cos(), (i as f64 * 2.1).sin())),
        )
        .unwrap();
        let rho = psi.to_density();
        for sites in [vec![0, 1], vec![4, 2], vec![0, 2, 3, 4], vec![3]] {
            let a = reduce_pure(&psi, &sites).unwrap();
            let b = reduce(&rho, &sites).unwrap();
            assert_eq!(a.sites(), b.sites());
            assert!((a.matrix() - b.matrix()).norm() < 1e-14);
        }
    }

    #[test]
    fn reduce_rejects_bad_sites() {
        let rho = eigenbasis_product(3).unwrap().to_density();
        assert!(reduce(&rho, &[0, 0]).is_err());
        assert!(reduce(&rho, &[3]).is_err());
        assert!(reduce(&rho, &[]).is_err());
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let rs = ReducedState::new(vec![0, 1], bell()).unwrap();
        let pt = partial_transpose(&rs, &[0]).unwrap();
        let ev = linalg::hermitian_eigenvalues(&pt);
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        let twice = partial_transpose(&ReducedState::new(vec![0, 1], pt).unwrap(), &[0]).unwrap();
        assert!((twice - bell()).iter().all(|z| z.norm() < 1e-15));
        assert!(partial_transpose(&rs, &[0, 1]).is_err());
        assert!(partial_transpose(&rs, &[]).is_err());
    }

    #[test]
    fn log_negativity_reference_values() {
        let rs = ReducedState::new(vec![0, 1], bell()).unwrap();
        assert!((log_negativity(&rs, &[0]).unwrap() - 1.0).abs() < 1e-12);
        let product = plus_product(2).unwrap().to_density();
        assert_eq!(pair_log_negativity(&product, 0, 1).unwrap(), 0.0);
        // Werner state p|β⟩⟨β| + (1−p) I/4: trace norm 1 + (3p − 1)/2 for p > 1/3.
        let p = 0.5;
        let werner = bell() * C64::from(p) + CMatrix::identity(4, 4) * C64::from((1.0 - p) / 4.0);
        let rs = ReducedState::new(vec![0, 1], werner).unwrap();
        assert!((log_negativity(&rs, &[1]).unwrap() - 1.25f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn bell_head_tail_pair_is_separable() {
        let rho = bell_head(4).unwrap().to_density();
        assert_eq!(pair_log_negativity(&rho, 2, 3).unwrap(), 0.0);
        assert!((pair_log_negativity(&rho, 0, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn block_negativity_of_inner_bell_pair() {
        // |0⟩ ⊗ |β′⟩ ⊗ |0⟩ on four sites, blocks {0,1} | {2,3}.
        let mut amps = DVector::from_element(16, ZERO);
        amps[0b0100] = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        amps[0b0010] = C64::from(std::f64::consts::FRAC_1_SQRT_2);
        let rho = StateVector::new(4, amps).unwrap().to_density();
        assert!((block_log_negativity(&rho, [0, 1], [2, 3]).unwrap() - 1.0).abs() < 1e-12);
        let product = eigenbasis_product(4).unwrap().to_density();
        assert_eq!(block_log_negativity(&product, [0, 1], [2, 3]).unwrap(), 0.0);
        assert!(block_log_negativity(&product, [0, 1], [1, 3]).is_err());
    }

    #[test]
    fn trace_norm_matches_singular_values() {
        let p = 0.8;
        let werner = bell() * C64::from(p) + CMatrix::identity(4, 4) * C64::from((1.0 - p) / 4.0);
        let pt = partial_transpose(&ReducedState::new(vec![0, 1], werner).unwrap(), &[0]).unwrap();
        let svd_norm: f64 = pt.clone().svd(false, false).singular_values.iter().sum();
        assert!((trace_norm_hermitian(&pt) - svd_norm).abs() < 1e-12);
    }
}
