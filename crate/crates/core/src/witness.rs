//! Two-site spin–spin correlations C^{ab}_{ij} = Tr[σ^a_i σ^b_j ρ] and the
//! correlation-based lower bounds on the logarithmic negativity.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{ChainError, Result};
use crate::linalg::{self, Axis, CMatrix};
use crate::measures::{reduce, ReducedState};
use crate::state::DensityMatrix;

/// Below this asymmetry X is symmetrized silently.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Above this asymmetry the optimized bound is refused.
pub const ASYMMETRY_LIMIT: f64 = 1e-4;
const IMAG_TOL: f64 = 1e-10;
const ENTRY_SLACK: f64 = 1e-9;

/// Correlation matrix X[a][b] = C^{ab}_{ij}, axes ordered x, y, z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    entries: Matrix3<f64>,
    sites: (usize, usize),
    asymmetry: f64,
}

impl CorrelationMatrix {
    pub fn from_entries(i: usize, j: usize, entries: Matrix3<f64>) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|v| !v.is_finite() || v.abs() > 1.0 + ENTRY_SLACK) {
            return Err(ChainError::InvalidParameter(format!("correlation entry {bad} outside [-1, 1]")));
        }
        let entries = entries.map(|v| v.clamp(-1.0, 1.0));
        let asymmetry = (entries - entries.transpose()).amax();
        Ok(CorrelationMatrix { entries, sites: (i, j), asymmetry })
    }

    pub fn entries(&self) -> &Matrix3<f64> {
        &self.entries
    }

    pub fn get(&self, a: Axis, b: Axis) -> f64 {
        self.entries[(a.index(), b.index())]
    }

    pub fn sites(&self) -> (usize, usize) {
        self.sites
    }

    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    /// (X + Xᵀ)/2, subject to the symmetry policy.
    pub fn symmetrized(&self) -> Result<Matrix3<f64>> {
        if self.asymmetry >= ASYMMETRY_LIMIT {
            return Err(ChainError::Asymmetric { asymmetry: self.asymmetry, limit: ASYMMETRY_LIMIT });
        }
        if self.asymmetry >= SYMMETRY_TOL {
            log::warn!(
                "correlation matrix for sites ({}, {}) has asymmetry {:.3e}; symmetrizing",
                self.sites.0,
                self.sites.1,
                self.asymmetry
            );
        }
        Ok((self.entries + self.entries.transpose()) * 0.5)
    }
}

fn pauli_pair(a: Axis, b: Axis) -> CMatrix {
    linalg::kron(&linalg::pauli(a), &linalg::pauli(b))
}

fn real_expectation(rs: &ReducedState, op: &CMatrix) -> Result<f64> {
    let v = (op * rs.matrix()).trace();
    if v.im.abs() > IMAG_TOL {
        return Err(ChainError::ComplexCorrelation { imag: v.im });
    }
    Ok(v.re)
}

/// Tr[σ^a_i σ^b_j ρ] for distinct sites `i`, `j`.
pub fn correlation(rho: &DensityMatrix, i: usize, j: usize, a: Axis, b: Axis) -> Result<f64> {
    if i == j {
        return Err(ChainError::InvalidSites(format!("correlation needs two distinct sites, got {i} twice")));
    }
    let rs = reduce(rho, &[i, j])?;
    let (a, b) = if i < j { (a, b) } else { (b, a) };
    real_expectation(&rs, &pauli_pair(a, b))
}

/// All nine correlations of the pair (`i`, `j`).
pub fn correlation_matrix(rho: &DensityMatrix, i: usize, j: usize) -> Result<CorrelationMatrix> {
    if i == j {
        return Err(ChainError::InvalidSites(format!("correlation needs two distinct sites, got {i} twice")));
    }
    let rs = reduce(rho, &[i, j])?;
    correlation_matrix_of_pair(&rs, i > j)
}

/// Correlations of a two-site reduced state; `swapped` exchanges the roles
/// of the two sites.
pub fn correlation_matrix_of_pair(rs: &ReducedState, swapped: bool) -> Result<CorrelationMatrix> {
    if rs.sites().len() != 2 {
        return Err(ChainError::InvalidSites(format!("expected a pair, got sites {:?}", rs.sites())));
    }
    let mut x = Matrix3::zeros();
    for a in Axis::ALL {
        for b in Axis::ALL {
            let v = real_expectation(rs, &pauli_pair(a, b))?;
            if swapped {
                x[(b.index(), a.index())] = v;
            } else {
                x[(a.index(), b.index())] = v;
            }
        }
    }
    let (s0, s1) = (rs.sites()[0], rs.sites()[1]);
    let sites = if swapped { (s1, s0) } else { (s0, s1) };
    CorrelationMatrix::from_entries(sites.0, sites.1, x)
}

/// max[0, log₂(|C^{xx}| + |C^{zz}|)].
pub fn bound_c1(x: &CorrelationMatrix) -> f64 {
    let s = x.entries[(0, 0)].abs() + x.entries[(2, 2)].abs();
    if s <= 1.0 {
        0.0
    } else {
        s.log2()
    }
}

fn c2_from_diagonal(d: &Vector3<f64>) -> f64 {
    let s = 1.0 + d.iter().map(|v| v.abs()).sum::<f64>();
    if s <= 2.0 {
        0.0
    } else {
        s.log2() - 1.0
    }
}

/// max[0, log₂(1 + |C^{xx}| + |C^{yy}| + |C^{zz}|) − 1].
pub fn bound_c2(x: &CorrelationMatrix) -> f64 {
    c2_from_diagonal(&x.entries.diagonal())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizedBound {
    pub value: f64,
    pub eigenvalues: [f64; 3],
    /// Proper rotation whose columns are the optimal measurement axes.
    pub axes: Matrix3<f64>,
}

/// The C₂ bound after rotating both measured axes into the eigenbasis of X.
pub fn bound_c2_optimized(x: &CorrelationMatrix) -> Result<OptimizedBound> {
    let sym = x.symmetrized()?;
    let eig = SymmetricEigen::new(sym);
    let mut axes = eig.eigenvectors;
    if axes.determinant() < 0.0 {
        axes.column_mut(2).neg_mut();
    }
    let ev = eig.eigenvalues;
    Ok(OptimizedBound { value: c2_from_diagonal(&ev), eigenvalues: [ev[0], ev[1], ev[2]], axes })
}

/// C₂ with both measured axes held at a fixed rotation `axes`.
pub fn bound_c2_frozen(x: &CorrelationMatrix, axes: &Matrix3<f64>) -> f64 {
    let rotated = axes.transpose() * x.entries * axes;
    c2_from_diagonal(&rotated.diagonal())
}

/// All witness values for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub c1: f64,
    pub c2: f64,
    /// `None` when X is too asymmetric for the optimized bound.
    pub c2_opt: Option<OptimizedBound>,
}

pub fn bounds(x: &CorrelationMatrix) -> BoundSet {
    BoundSet { c1: bound_c1(x), c2: bound_c2(x), c2_opt: bound_c2_optimized(x).ok() }
}
