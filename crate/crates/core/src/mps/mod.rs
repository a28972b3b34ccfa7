//! Matrix-product representation of chain density matrices.
//!
//! ρ is expanded in the single-site matrix units ε₁ = |0⟩⟨0|, ε₂ = |0⟩⟨1|,
//! ε₃ = |1⟩⟨0|, ε₄ = |1⟩⟨1|, stored with the 0-based physical index
//! s = 2·row + col. The chain is kept in mixed canonical form around an
//! orthogonality centre: tensors left of it are left-orthonormal, tensors
//! right of it right-orthonormal, so singular values across any bond can be
//! read off after moving the centre there.

mod checkpoint;
mod tebd;

pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use tebd::{yoshida_weights, TebdEvolver, TrotterPlan, TruncationReport, DEFAULT_CUTOFF, DEFAULT_WEIGHT_CEILING};

use serde::{Deserialize, Serialize};

use crate::error::{ChainError, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::measures::{ReducedState, MAX_REDUCED_SITES};
use crate::state::DensityMatrix;

/// Local dimension of the vectorised single-site space.
pub const PHYS: usize = 4;
/// Drift of the reduced-state trace above which a warning is logged.
pub const TRACE_DRIFT_WARN: f64 = 1e-4;

/// Three-index site tensor A[l, s, r] stored with l fastest, then s, then r.
///
/// The same buffer read column-major is both the (Dl·4 × Dr) left-grouped and
/// the (Dl × 4·Dr) right-grouped matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteTensor {
    pub dl: usize,
    pub dr: usize,
    pub data: Vec<num_complex::Complex64>,
}

impl SiteTensor {
    fn from_left_matrix(m: &CMatrix) -> Self {
        debug_assert_eq!(m.nrows() % PHYS, 0);
        SiteTensor { dl: m.nrows() / PHYS, dr: m.ncols(), data: m.as_slice().to_vec() }
    }

    fn from_right_matrix(m: &CMatrix) -> Self {
        debug_assert_eq!(m.ncols() % PHYS, 0);
        SiteTensor { dl: m.nrows(), dr: m.ncols() / PHYS, data: m.as_slice().to_vec() }
    }

    fn left_matrix(&self) -> CMatrix {
        CMatrix::from_column_slice(self.dl * PHYS, self.dr, &self.data)
    }

    fn right_matrix(&self) -> CMatrix {
        CMatrix::from_column_slice(self.dl, PHYS * self.dr, &self.data)
    }

    /// Σ_s tr(ε_s) A[:, s, :].
    fn traced(&self) -> CMatrix {
        CMatrix::from_fn(self.dl, self.dr, |l, r| {
            self.data[l + self.dl * PHYS * r] + self.data[l + self.dl * (3 + PHYS * r)]
        })
    }

    /// Applies a 4×4 map to the physical index.
    fn apply_local(&mut self, map: &CMatrix) {
        let (dl, dr) = (self.dl, self.dr);
        let mut v = [ZERO; PHYS];
        for r in 0..dr {
            for l in 0..dl {
                for (s, vs) in v.iter_mut().enumerate() {
                    *vs = self.data[l + dl * (s + PHYS * r)];
                }
                for t in 0..PHYS {
                    let mut acc = ZERO;
                    for (s, vs) in v.iter().enumerate() {
                        acc += map[(t, s)] * vs;
                    }
                    self.data[l + dl * (t + PHYS * r)] = acc;
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dl == 0 || self.dr == 0 || self.data.len() != self.dl * PHYS * self.dr {
            return Err(ChainError::InvalidSpec(format!(
                "site tensor of shape ({}, 4, {}) holds {} entries",
                self.dl,
                self.dr,
                self.data.len()
            )));
        }
        Ok(())
    }
}

/// Single-site 2×2 matrix to the four ε coefficients.
fn local_coefficients(m: &CMatrix) -> [num_complex::Complex64; PHYS] {
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpsMixedState {
    tensors: Vec<SiteTensor>,
    center: usize,
}

impl MpsMixedState {
    /// Bond-dimension-one state ρ₁ ⊗ ρ₂ ⊗ … from single-site density matrices.
    pub fn from_product(locals: &[DensityMatrix]) -> Result<Self> {
        if locals.is_empty() {
            return Err(ChainError::InvalidSpec("product state needs at least one site".into()));
        }
        let mut tensors = Vec::with_capacity(locals.len());
        for (i, rho) in locals.iter().enumerate() {
            if rho.n_qubits() != 1 {
                return Err(ChainError::InvalidSpec(format!("local state {i} spans {} qubits", rho.n_qubits())));
            }
            DensityMatrix::new(1, rho.matrix().clone())?;
            tensors.push(SiteTensor { dl: 1, dr: 1, data: local_coefficients(rho.matrix()).to_vec() });
        }
        let mut out = MpsMixedState { tensors, center: 0 };
        out.canonicalize();
        Ok(out)
    }

    /// Exact decomposition of a dense density matrix by successive SVDs.
    pub fn from_dense(rho: &DensityMatrix) -> Result<Self> {
        let n = rho.n_qubits();
        if n == 0 || n > 10 {
            return Err(ChainError::DimensionGuard { n, max: 10 });
        }
        let total = PHYS.pow(n as u32);
        let m = rho.matrix();
        let coeffs: Vec<_> = (0..total)
            .map(|idx| {
                let (mut row, mut col) = (0usize, 0usize);
                for k in 0..n {
                    let s = (idx / PHYS.pow(k as u32)) % PHYS;
                    row |= (s >> 1) << (n - 1 - k);
                    col |= (s & 1) << (n - 1 - k);
                }
                m[(row, col)]
            })
            .collect();
        let mut rest = CMatrix::from_column_slice(1, total, &coeffs);
        let mut tensors = Vec::with_capacity(n);
        for _ in 0..n - 1 {
            let dl = rest.nrows();
            let cols = rest.ncols() / PHYS;
            let grouped = CMatrix::from_column_slice(dl * PHYS, cols, rest.as_slice());
            let dec = linalg::svd(&grouped);
            let keep = dec.s.iter().filter(|&&s| s > 1e-14 * dec.s[0]).count().max(1);
            let u = dec.u.columns(0, keep).into_owned();
            let vt = dec.v_adjoint.rows(0, keep).into_owned();
            let s = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                keep,
                dec.s[..keep].iter().map(|&x| num_complex::Complex64::from(x)),
            ));
            tensors.push(SiteTensor::from_left_matrix(&u));
            rest = s * vt;
        }
        tensors.push(SiteTensor::from_right_matrix(&rest));
        Ok(MpsMixedState { tensors, center: n - 1 })
    }

    /// Tensor product of `self` (left) and `other` (right).
    pub fn concat(mut self, mut other: MpsMixedState) -> MpsMixedState {
        self.move_center(self.tensors.len() - 1);
        other.move_center(0);
        self.tensors.extend(other.tensors);
        let mut out = self;
        out.canonicalize();
        out
    }

    pub fn from_tensors(tensors: Vec<SiteTensor>, center: usize) -> Result<Self> {
        if tensors.is_empty() || center >= tensors.len() {
            return Err(ChainError::InvalidSpec("tensor list empty or centre out of range".into()));
        }
        for t in &tensors {
            t.validate()?;
        }
        if tensors[0].dl != 1 || tensors[tensors.len() - 1].dr != 1 {
            return Err(ChainError::InvalidSpec("boundary bonds must have dimension 1".into()));
        }
        if let Some(i) = tensors.windows(2).position(|w| w[0].dr != w[1].dl) {
            return Err(ChainError::InvalidSpec(format!("bond {i} dimensions disagree")));
        }
        Ok(MpsMixedState { tensors, center })
    }

    pub fn n_sites(&self) -> usize {
        self.tensors.len()
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn tensors(&self) -> &[SiteTensor] {
        &self.tensors
    }

    /// Dimensions of the N − 1 internal bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.tensors.len() - 1].iter().map(|t| t.dr).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Brings the chain into canonical form with the centre at site 0.
    pub fn canonicalize(&mut self) {
        self.center = self.tensors.len() - 1;
        self.move_center(0);
    }

    pub(crate) fn move_center(&mut self, target: usize) {
        while self.center < target {
            let j = self.center;
            let qr = self.tensors[j].left_matrix().qr();
            let (q, r) = qr.unpack();
            self.tensors[j] = SiteTensor::from_left_matrix(&q);
            let next = r * self.tensors[j + 1].right_matrix();
            self.tensors[j + 1] = SiteTensor::from_right_matrix(&next);
            self.center += 1;
        }
        while self.center > target {
            let j = self.center;
            let qr = self.tensors[j].right_matrix().adjoint().qr();
            let (q, r) = qr.unpack();
            self.tensors[j] = SiteTensor::from_right_matrix(&q.adjoint());
            let prev = self.tensors[j - 1].left_matrix() * r.adjoint();
            self.tensors[j - 1] = SiteTensor::from_left_matrix(&prev);
            self.center -= 1;
        }
    }

    /// Singular values across bond `j` (between sites j and j+1), descending.
    pub fn bond_weights(&mut self, j: usize) -> Vec<f64> {
        self.move_center(j);
        linalg::svd(&self.tensors[j].left_matrix()).s
    }

    #[cfg(test)]
    pub(crate) fn tensor_mut(&mut self, j: usize) -> &mut SiteTensor {
        &mut self.tensors[j]
    }

    pub(crate) fn apply_local(&mut self, j: usize, map: &CMatrix) {
        self.tensors[j].apply_local(map);
    }

    /// Two-site tensor across bond (j, j+1) as a (Dl·4 × 4·Dr) matrix.
    pub(crate) fn bond_block(&self, j: usize) -> CMatrix {
        let a = self.tensors[j].left_matrix();
        let b = self.tensors[j + 1].right_matrix();
        a * b
    }

    pub(crate) fn set_bond(&mut self, j: usize, left: SiteTensor, right: SiteTensor, center: usize) {
        self.tensors[j] = left;
        self.tensors[j + 1] = right;
        self.center = center;
    }

    /// Tr ρ through the per-site trace functional.
    pub fn trace(&self) -> num_complex::Complex64 {
        let mut acc = CMatrix::from_element(1, 1, ONE);
        for t in &self.tensors {
            acc = acc * t.traced();
        }
        acc[(0, 0)]
    }

    /// Coefficients of the kept sites after tracing the others, as a 4^k
    /// vector with the first kept site fastest.
    fn contract_keeping(&self, kept: &[usize]) -> Vec<num_complex::Complex64> {
        let mut acc = CMatrix::from_element(1, 1, ONE);
        for (k, t) in self.tensors.iter().enumerate() {
            if kept.contains(&k) {
                let p = acc.nrows();
                let grown = &acc * t.right_matrix();
                acc = CMatrix::from_column_slice(p * PHYS, t.dr, grown.as_slice());
            } else {
                acc = acc * t.traced();
            }
        }
        acc.as_slice().to_vec()
    }

    /// Unnormalised reduced density matrix of the sorted `sites`.
    fn reduced_raw(&self, sites: &[usize]) -> Result<(Vec<usize>, CMatrix)> {
        let n = self.n_sites();
        let mut kept = sites.to_vec();
        kept.sort_unstable();
        if kept.is_empty() || kept.len() > MAX_REDUCED_SITES {
            return Err(ChainError::InvalidSites(format!("keep between 1 and {MAX_REDUCED_SITES} sites")));
        }
        if kept.windows(2).any(|w| w[0] == w[1]) || kept.iter().any(|&s| s >= n) {
            return Err(ChainError::InvalidSites(format!("sites {sites:?} invalid for a chain of {n}")));
        }
        let coeffs = self.contract_keeping(&kept);
        Ok((kept.clone(), coefficients_to_matrix(&coeffs, kept.len())))
    }

    /// Reduced density matrix of up to four sites, Hermitised and normalised.
    pub fn reduced(&self, sites: &[usize]) -> Result<ReducedState> {
        let (kept, mut m) = self.reduced_raw(sites)?;
        linalg::hermitize(&mut m);
        let tr = linalg::trace(&m).re;
        if !(tr > 0.0) {
            return Err(ChainError::TraceDrift { time: f64::NAN, drift: tr - 1.0 });
        }
        if (tr - 1.0).abs() > TRACE_DRIFT_WARN {
            log::warn!("reduced state of sites {kept:?} has trace {tr}; renormalising");
        }
        m.unscale_mut(tr);
        ReducedState::new(kept, m)
    }

    /// Reduced state of the pair (i, j).
    pub fn reduced_pair_dm(&self, i: usize, j: usize) -> Result<ReducedState> {
        if i >= j {
            return Err(ChainError::InvalidSites(format!("pair ({i}, {j}) must satisfy i < j")));
        }
        self.reduced(&[i, j])
    }

    /// Full dense density matrix (small chains only).
    pub fn to_dense(&self) -> Result<DensityMatrix> {
        let n = self.n_sites();
        if n > 10 {
            return Err(ChainError::DimensionGuard { n, max: 10 });
        }
        let all: Vec<usize> = (0..n).collect();
        let coeffs = self.contract_keeping(&all);
        DensityMatrix::from_matrix_unchecked(n, coefficients_to_matrix(&coeffs, n))
    }
}

/// Maps coefficients (first site fastest, s = 2·row + col) to a 2^k matrix
/// with the first site as most significant bit.
fn coefficients_to_matrix(coeffs: &[num_complex::Complex64], k: usize) -> CMatrix {
    let dim = 1usize << k;
    let mut m = CMatrix::zeros(dim, dim);
    for (idx, &v) in coeffs.iter().enumerate() {
        let (mut row, mut col) = (0usize, 0usize);
        let mut rest = idx;
        for site in 0..k {
            let s = rest % PHYS;
            rest /= PHYS;
            row |= (s >> 1) << (k - 1 - site);
            col |= (s & 1) << (k - 1 - site);
        }
        m[(row, col)] = v;
    }
    m
}
