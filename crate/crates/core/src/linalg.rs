//! Small dense linear-algebra helpers shared by the dense and MPS paths.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Spin measurement axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn pauli(self) -> CMatrix {
        pauli(self)
    }
}

impl std::str::FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(format!("unknown axis '{other}'")),
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        };
        f.write_str(s)
    }
}

pub fn pauli(axis: Axis) -> CMatrix {
    match axis {
        Axis::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Axis::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        Axis::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Replace `m` by `(m + m†) / 2` in place.
pub fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
        m[(j, j)] = C64::new(m[(j, j)].re, 0.0);
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Real symmetric input (every Hamiltonian of the chain model is real) is
/// routed through the real solver, which is several times faster.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let is_real = m.iter().all(|z| z.im == 0.0);
    let (values, vectors): (Vec<f64>, CMatrix) = if is_real {
        let eig = m.map(|z| z.re).symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|x| C64::new(x, 0.0)))
    } else {
        let eig = m.clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = CMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    (sorted_values, sorted_vectors)
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = if m.iter().all(|z| z.im == 0.0) {
        m.map(|z| z.re).symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.clone().symmetric_eigenvalues().iter().copied().collect()
    };
    values.sort_by(f64::total_cmp);
    values
}

/// Thin singular value decomposition m = U·diag(s)·V†, values descending.
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v_adjoint: CMatrix,
}

pub fn svd(m: &CMatrix) -> Svd {
    let (rows, cols) = m.shape();
    let f = faer::Mat::<faer::c64>::from_fn(rows, cols, |i, j| {
        let z = m[(i, j)];
        faer::c64::new(z.re, z.im)
    });
    let dec = f.thin_svd().expect("SVD of a finite matrix");
    let (u, s, v) = (dec.U(), dec.S().column_vector(), dec.V());
    let k = s.nrows();
    Svd {
        u: CMatrix::from_fn(rows, k, |i, j| {
            let z = u[(i, j)];
            C64::new(z.re, z.im)
        }),
        s: (0..k).map(|i| s[i].re).collect(),
        v_adjoint: CMatrix::from_fn(k, cols, |i, j| {
            let z = v[(j, i)];
            C64::new(z.re, -z.im)
        }),
    }
}

/// Bit of `site` (0-based, site 0 most significant) in basis index `b`.
#[inline]
pub fn bit(b: usize, site: usize, n: usize) -> usize {
    (b >> (n - 1 - site)) & 1
}

#[inline]
pub fn site_mask(site: usize, n: usize) -> usize {
    1 << (n - 1 - site)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_reconstructs_rectangular_input() {
        let m = CMatrix::from_fn(7, 4, |i, j| C64::new((i * 3 + j) as f64 * 0.37, (i as f64 - 2.0 * j as f64).sin()));
        let d = svd(&m);
        assert_eq!(d.s.len(), 4);
        assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        let sd = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(4, d.s.iter().map(|&x| C64::from(x))));
        assert!((&d.u * sd * &d.v_adjoint - &m).norm() < 1e-13 * m.norm());
        assert!((d.u.adjoint() * &d.u - CMatrix::identity(4, 4)).norm() < 1e-13);
    }

    #[test]
    fn pauli_algebra() {
        let x = pauli(Axis::X);
        let y = pauli(Axis::Y);
        let z = pauli(Axis::Z);
        let xy = &x * &y;
        assert!((xy - &z * I).iter().all(|e| e.norm() < 1e-15));
        assert!((&z * &z - CMatrix::identity(2, 2)).iter().all(|e| e.norm() < 1e-15));
    }

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(2.0, 0.0),
                C64::new(0.0, 1.0),
                ZERO,
                C64::new(0.0, -1.0),
                C64::new(-1.0, 0.0),
                C64::new(0.5, 0.0),
                ZERO,
                C64::new(0.5, 0.0),
                ONE,
            ],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            3,
            vals.iter().map(|&v| C64::new(v, 0.0)),
        ));
        let back = &vecs * d * vecs.adjoint();
        assert!((back - m).iter().all(|e| e.norm() < 1e-12));
    }

    #[test]
    fn bit_order_site_zero_most_significant() {
        assert_eq!(bit(0b100, 0, 3), 1);
        assert_eq!(bit(0b100, 2, 3), 0);
        assert_eq!(site_mask(2, 3), 1);
    }
}
