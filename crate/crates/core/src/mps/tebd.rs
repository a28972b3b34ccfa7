//! Suzuki–Trotter time evolution of [`MpsMixedState`] under the chain master
//! equation.
//!
//! The Liouvillian is split into even-bond coherent couplings (A), odd-bond
//! coherent couplings (B) and single-site terms (C: the −½ωσz part of H plus
//! the dissipator). Each piece is exponentiated exactly on its 16- or
//! 4-dimensional local space. The second-order step is
//! S₂(τ) = C(τ/2) A(τ/2) B(τ) A(τ/2) C(τ/2) and the fourth-order step is the
//! triple jump S₂(w₁τ) S₂(w₀τ) S₂(w₁τ) with w₁ = 1/(2 − 2^{1/3}),
//! w₀ = 1 − 2w₁.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{MpsMixedState, SiteTensor, PHYS};
use crate::chain::{mixing_angles, ChainSpec, HermitianOperator};
use crate::error::{ChainError, Result};
use crate::linalg::{self, Axis, CMatrix, ZERO};
use crate::lindblad::{LindbladGenerator, RateSet};

/// Relative singular-value cutoff below which values are always dropped.
pub const DEFAULT_CUTOFF: f64 = 1e-12;
/// Discarded weight per step above which the step is flagged.
pub const DEFAULT_WEIGHT_CEILING: f64 = 1e-6;

/// (w₁, w₀) of the fourth-order triple jump.
pub fn yoshida_weights() -> (f64, f64) {
    let c = 2f64.cbrt();
    let w1 = 1.0 / (2.0 - c);
    (w1, 1.0 - 2.0 * w1)
}

/// Gates for one second-order sweep of length τ.
#[derive(Debug, Clone)]
struct SweepGates {
    bond_half: Vec<CMatrix>,
    bond_full: Vec<CMatrix>,
    site_half: Vec<CMatrix>,
}

#[derive(Debug, Clone)]
pub struct TrotterPlan {
    n_sites: usize,
    dt: f64,
    order: u8,
    max_bond: usize,
    cutoff: f64,
    weight_ceiling: f64,
    weights: Vec<f64>,
    sweeps: Vec<SweepGates>,
}

impl TrotterPlan {
    /// Builds the gates for an eigen-frame chain with the given rates.
    pub fn new(spec: &ChainSpec, rates: &RateSet, dt: f64, max_bond: usize) -> Result<Self> {
        Self::with_order(spec, rates, dt, max_bond, 4)
    }

    pub fn with_order(spec: &ChainSpec, rates: &RateSet, dt: f64, max_bond: usize, order: u8) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_qubits;
        if n < 2 {
            return Err(ChainError::InvalidSpec("TEBD needs at least two sites".into()));
        }
        if rates.len() != n {
            return Err(ChainError::DimensionMismatch { expected: n, got: rates.len() });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(ChainError::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if max_bond == 0 {
            return Err(ChainError::InvalidParameter("bond dimension must be positive".into()));
        }
        let weights = match order {
            2 => vec![1.0],
            4 => {
                let (w1, w0) = yoshida_weights();
                vec![w1, w0, w1]
            }
            _ => return Err(ChainError::InvalidParameter(format!("Trotter order {order} not supported; use 2 or 4"))),
        };
        let angles = mixing_angles(spec)?;
        let bonds: Vec<CMatrix> = (0..n - 1)
            .map(|j| {
                let a = site_axis(angles.cos(j), angles.sin(j));
                let b = site_axis(angles.cos(j + 1), angles.sin(j + 1));
                linalg::kron(&a, &b) * C64::from(-0.5 * spec.coupling[j])
            })
            .collect();
        let sites: Vec<CMatrix> = (0..n)
            .map(|i| site_liouvillian(angles.omega[i], rates, i))
            .collect::<Result<_>>()?;
        let sweeps = weights
            .iter()
            .map(|&w| {
                let tau = w * dt;
                SweepGates {
                    bond_half: bonds.iter().map(|h| coherent_gate(h, 0.5 * tau)).collect(),
                    bond_full: bonds.iter().map(|h| coherent_gate(h, tau)).collect(),
                    site_half: sites.iter().map(|l| (l * C64::from(0.5 * tau)).exp()).collect(),
                }
            })
            .collect();
        Ok(TrotterPlan {
            n_sites: n,
            dt,
            order,
            max_bond,
            cutoff: DEFAULT_CUTOFF,
            weight_ceiling: DEFAULT_WEIGHT_CEILING,
            weights,
            sweeps,
        })
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_weight_ceiling(mut self, ceiling: f64) -> Self {
        self.weight_ceiling = ceiling;
        self
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn max_bond(&self) -> usize {
        self.max_bond
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Stage weights of the composition; they sum to one.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// c σz + s σx.
fn site_axis(c: f64, s: f64) -> CMatrix {
    linalg::pauli(Axis::Z) * C64::from(c) + linalg::pauli(Axis::X) * C64::from(s)
}

/// exp(−iτh) ⊗ conj(exp(−iτh)) on two sites, in the s = 2·row + col basis.
fn coherent_gate(h: &CMatrix, tau: f64) -> CMatrix {
    let (e, v) = linalg::hermitian_eigen(h);
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        e.len(),
        e.iter().map(|&x| C64::from_polar(1.0, -x * tau)),
    ));
    let u = &v * phases * v.adjoint();
    let mut g = CMatrix::zeros(16, 16);
    for t in 0..16 {
        let (t1, t2) = (t / PHYS, t % PHYS);
        let (tr, tc) = (2 * (t1 >> 1) + (t2 >> 1), 2 * (t1 & 1) + (t2 & 1));
        for s in 0..16 {
            let (s1, s2) = (s / PHYS, s % PHYS);
            let (sr, sc) = (2 * (s1 >> 1) + (s2 >> 1), 2 * (s1 & 1) + (s2 & 1));
            g[(t, s)] = u[(tr, sr)] * u[(tc, sc)].conj();
        }
    }
    g
}

/// Single-site generator (−½ωσz plus dissipator) in the s = 2·row + col basis.
fn site_liouvillian(omega: f64, rates: &RateSet, i: usize) -> Result<CMatrix> {
    let h = HermitianOperator::from_matrix(1, linalg::pauli(Axis::Z) * C64::from(-0.5 * omega))?;
    let local = RateSet { g_relax: vec![rates.g_relax[i]], g_excite: vec![rates.g_excite[i]], g_dephase: vec![rates.g_dephase[i]] };
    let sup = LindbladGenerator::new(&h, &local)?.superoperator();
    // superoperator() acts on column-major vec(ρ): v = row + 2·col.
    let v = |s: usize| (s >> 1) + 2 * (s & 1);
    Ok(CMatrix::from_fn(PHYS, PHYS, |t, s| sup[(v(t), v(s))]))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    /// Relative discarded weight summed over every gate so far.
    pub total_weight: f64,
    pub max_step_weight: f64,
    /// Steps whose discarded weight exceeded the ceiling.
    pub flagged_steps: usize,
}

impl TruncationReport {
    pub fn flagged(&self) -> bool {
        self.flagged_steps > 0
    }
}

#[derive(Debug, Clone)]
pub struct TebdEvolver {
    plan: TrotterPlan,
    state: MpsMixedState,
    time: f64,
    steps: u64,
    report: TruncationReport,
}

enum Sweep {
    Right,
    Left,
}

impl TebdEvolver {
    pub fn new(plan: TrotterPlan, state: MpsMixedState) -> Result<Self> {
        if state.n_sites() != plan.n_sites {
            return Err(ChainError::DimensionMismatch { expected: plan.n_sites, got: state.n_sites() });
        }
        Ok(TebdEvolver { plan, state, time: 0.0, steps: 0, report: TruncationReport::default() })
    }

    pub(crate) fn restore(plan: TrotterPlan, state: MpsMixedState, time: f64, steps: u64, report: TruncationReport) -> Self {
        TebdEvolver { plan, state, time, steps, report }
    }

    pub fn plan(&self) -> &TrotterPlan {
        &self.plan
    }

    pub fn state(&self) -> &MpsMixedState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn report(&self) -> &TruncationReport {
        &self.report
    }

    /// One full composite step of length dt.
    pub fn step(&mut self) {
        let mut weight = 0.0;
        for k in 0..self.plan.sweeps.len() {
            weight += self.sweep(k);
        }
        self.steps += 1;
        self.time = self.steps as f64 * self.plan.dt;
        self.report.total_weight += weight;
        self.report.max_step_weight = self.report.max_step_weight.max(weight);
        if weight > self.plan.weight_ceiling {
            self.report.flagged_steps += 1;
            log::warn!("truncation discarded weight {weight:.3e} in step {} (t = {})", self.steps, self.time);
        }
    }

    pub fn advance(&mut self, steps: usize) {
        for _ in 0..steps {
            self.step();
        }
    }

    fn sweep(&mut self, k: usize) -> f64 {
        let n = self.plan.n_sites;
        let mut weight = 0.0;
        self.apply_sites(k);
        for j in (0..n - 1).step_by(2) {
            weight += self.apply_bond(j, Gate::Half(k), Sweep::Right);
        }
        let odd: Vec<usize> = (1..n - 1).step_by(2).collect();
        for &j in odd.iter().rev() {
            weight += self.apply_bond(j, Gate::Full(k), Sweep::Left);
        }
        for j in (0..n - 1).step_by(2) {
            weight += self.apply_bond(j, Gate::Half(k), Sweep::Right);
        }
        self.apply_sites(k);
        weight
    }

    fn apply_sites(&mut self, k: usize) {
        for (j, map) in self.plan.sweeps[k].site_half.iter().enumerate() {
            self.state.apply_local(j, map);
        }
        self.state.canonicalize();
    }

    fn apply_bond(&mut self, j: usize, gate: Gate, dir: Sweep) -> f64 {
        let g = match gate {
            Gate::Half(k) => &self.plan.sweeps[k].bond_half[j],
            Gate::Full(k) => &self.plan.sweeps[k].bond_full[j],
        };
        match dir {
            Sweep::Right => self.state.move_center(j),
            Sweep::Left => self.state.move_center(j + 1),
        }
        let mut theta = self.state.bond_block(j);
        let dl = theta.nrows() / PHYS;
        let dr = theta.ncols() / PHYS;
        let mut v = [ZERO; 16];
        for r in 0..dr {
            for l in 0..dl {
                for (idx, x) in v.iter_mut().enumerate() {
                    *x = theta[(l + dl * (idx / PHYS), idx % PHYS + PHYS * r)];
                }
                for t in 0..16 {
                    let mut acc = ZERO;
                    for (s, x) in v.iter().enumerate() {
                        acc += g[(t, s)] * x;
                    }
                    theta[(l + dl * (t / PHYS), t % PHYS + PHYS * r)] = acc;
                }
            }
        }
        let dec = linalg::svd(&theta);
        let sv = &dec.s;
        let norm2: f64 = sv.iter().map(|s| s * s).sum();
        let keep = sv.iter().filter(|&&s| s > self.plan.cutoff * sv[0]).count().clamp(1, self.plan.max_bond);
        let discarded: f64 = sv[keep..].iter().map(|s| s * s).sum();
        let u = dec.u.columns(0, keep).into_owned();
        let vt = dec.v_adjoint.rows(0, keep).into_owned();
        let s: Vec<C64> = sv[..keep].iter().map(|&x| C64::from(x)).collect();
        let (left, right, center) = match dir {
            Sweep::Right => {
                let mut rv = vt;
                for (i, mut row) in rv.row_iter_mut().enumerate() {
                    row *= s[i];
                }
                (SiteTensor::from_left_matrix(&u), SiteTensor::from_right_matrix(&rv), j + 1)
            }
            Sweep::Left => {
                let mut lu = u;
                for (i, mut col) in lu.column_iter_mut().enumerate() {
                    col *= s[i];
                }
                (SiteTensor::from_left_matrix(&lu), SiteTensor::from_right_matrix(&vt), j)
            }
        };
        self.state.set_bond(j, left, right, center);
        if norm2 > 0.0 {
            discarded / norm2
        } else {
            0.0
        }
    }
}

#[derive(Clone, Copy)]
enum Gate {
    Half(usize),
    Full(usize),
}
