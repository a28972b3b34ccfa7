//! Dense integration of the chain master equation
//!
//! ```text
//! dρ/dt = −i[H, ρ] + Σ_i G_i (2σ⁺ρσ⁻ − ρσ⁻σ⁺ − σ⁻σ⁺ρ)
//!                  + G̃_i (2σ⁻ρσ⁺ − ρσ⁺σ⁻ − σ⁺σ⁻ρ)
//!                  + g_i (2σᶻρσᶻ − 2ρ)
//! ```
//!
//! in the single-qubit eigenbasis, where σ⁺ = |0⟩⟨1| lowers the qubit energy.
//! ρ is kept as a dense matrix; the Hamiltonian is applied through its sparse
//! rows and the dissipator elementwise, so one right-hand side costs
//! O((nnz_row + N)·4^N) rather than a dense matrix product.

use log::{debug, warn};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::chain::{HermitianOperator, MixingAngles};
use crate::error::{ChainError, Result};
use crate::linalg::{self, CMatrix, ZERO};
use crate::state::DensityMatrix;

/// Phenomenological environment: decay rate Γ and thermal occupation n_T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub gamma: f64,
    pub n_thermal: f64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        NoiseSpec { gamma: 0.0, n_thermal: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !(self.n_thermal >= 0.0) {
            return Err(ChainError::InvalidParameter(format!(
                "noise needs gamma >= 0 and n_thermal >= 0, got {} and {}",
                self.gamma, self.n_thermal
            )));
        }
        Ok(())
    }
}

/// Per-site relaxation G_i, excitation G̃_i and dephasing g_i rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    pub g_relax: Vec<f64>,
    pub g_excite: Vec<f64>,
    pub g_dephase: Vec<f64>,
}

impl RateSet {
    pub fn zero(n: usize) -> Self {
        RateSet { g_relax: vec![0.0; n], g_excite: vec![0.0; n], g_dephase: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.g_relax.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g_relax.is_empty()
    }

    pub fn is_dissipative(&self) -> bool {
        self.g_relax.iter().chain(&self.g_excite).chain(&self.g_dephase).any(|&r| r > 0.0)
    }

    pub fn max_site_rate(&self) -> f64 {
        (0..self.len())
            .map(|i| self.g_relax[i] + self.g_excite[i] + self.g_dephase[i])
            .fold(0.0, f64::max)
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.g_relax.len() != n || self.g_excite.len() != n || self.g_dephase.len() != n {
            return Err(ChainError::DimensionMismatch { expected: n, got: self.g_relax.len() });
        }
        if self.g_relax.iter().chain(&self.g_excite).chain(&self.g_dephase).any(|r| !(*r >= 0.0)) {
            return Err(ChainError::InvalidParameter("rates must be non-negative".into()));
        }
        Ok(())
    }
}

/// G_i = sin²θ_i (1 + n_T) Γ, G̃_i = sin²θ_i n_T Γ, g_i = cos²θ_i Γ.
pub fn rates_from_angles(angles: &MixingAngles, noise: &NoiseSpec) -> RateSet {
    let n = angles.len();
    let mut rates = RateSet::zero(n);
    for i in 0..n {
        let (c, s) = (angles.cos(i), angles.sin(i));
        rates.g_relax[i] = s * s * (1.0 + noise.n_thermal) * noise.gamma;
        rates.g_excite[i] = s * s * noise.n_thermal * noise.gamma;
        rates.g_dephase[i] = c * c * noise.gamma;
    }
    rates
}

/// Bose–Einstein occupation 1/(exp(ω/T) − 1) for ω in E_C and T in Kelvin.
pub fn nbar_from_temperature(omega: f64, kelvin: f64, energy_unit_kelvin: f64) -> Result<f64> {
    if !(omega > 0.0) || !(kelvin > 0.0) || !(energy_unit_kelvin > 0.0) {
        return Err(ChainError::InvalidParameter(format!(
            "occupation needs positive omega, temperature and energy unit, got {omega}, {kelvin}, {energy_unit_kelvin}"
        )));
    }
    let x = omega * energy_unit_kelvin / kelvin;
    Ok(1.0 / x.exp_m1())
}

/// Inverse of [`nbar_from_temperature`], in Kelvin.
pub fn temperature_from_nbar(omega: f64, n_thermal: f64, energy_unit_kelvin: f64) -> Result<f64> {
    if !(omega > 0.0) || !(n_thermal > 0.0) {
        return Err(ChainError::InvalidParameter("temperature needs positive omega and n_thermal".into()));
    }
    Ok(omega * energy_unit_kelvin / (1.0 / n_thermal).ln_1p())
}

/// Precomputed generator of the master equation for one Hamiltonian and rate set.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    n_qubits: usize,
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    rates: RateSet,
    /// −Σ_i [G_i n_i(a) + G̃_i (1 − n_i(a))] per basis index.
    population_loss: Vec<f64>,
    /// −4 Σ_i g_i bit_i(a ⊕ b) indexed by a ⊕ b.
    dephasing_loss: Vec<f64>,
    norm_bound: f64,
}

impl LindbladGenerator {
    pub fn new(h: &HermitianOperator, rates: &RateSet) -> Result<Self> {
        let n = h.n_qubits();
        rates.validate(n)?;
        let dim = h.dim();
        let m = h.matrix();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in 0..dim {
            for c in 0..dim {
                let v = m[(r, c)];
                if v != ZERO {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        let population_loss = (0..dim)
            .map(|a| {
                -(0..n)
                    .map(|i| if linalg::bit(a, i, n) == 1 { rates.g_relax[i] } else { rates.g_excite[i] })
                    .sum::<f64>()
            })
            .collect();
        let dephasing_loss = (0..dim)
            .map(|x| -4.0 * (0..n).filter(|&i| linalg::bit(x, i, n) == 1).map(|i| rates.g_dephase[i]).sum::<f64>())
            .collect();
        Ok(LindbladGenerator {
            n_qubits: n,
            dim,
            row_ptr,
            cols,
            vals,
            rates: rates.clone(),
            population_loss,
            dephasing_loss,
            norm_bound: h.norm_bound(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rates(&self) -> &RateSet {
        &self.rates
    }

    /// Frequency scale used by the step-size guard: the per-site share of the
    /// Hamiltonian norm bound, or the largest single-site rate if that is larger.
    pub fn frequency_scale(&self) -> f64 {
        (self.norm_bound / self.n_qubits as f64).max(self.rates.max_site_rate())
    }

    /// out = L(ρ). Works for any square input, Hermitian or not.
    pub fn apply(&self, rho: &CMatrix, out: &mut CMatrix) {
        let dim = self.dim;
        debug_assert_eq!(rho.nrows(), dim);
        let src = rho.as_slice();
        let dst = out.as_mut_slice();
        // −i(Hρ − ρH), column by column (column-major storage).
        for c in 0..dim {
            let col = &src[c * dim..(c + 1) * dim];
            let out_col = &mut dst[c * dim..(c + 1) * dim];
            for r in 0..dim {
                let mut acc = ZERO;
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.vals[k] * col[self.cols[k]];
                }
                out_col[r] = acc;
            }
            // (ρH)[:, c] = Σ_k ρ[:, k] H[k, c] = Σ_k ρ[:, k] conj(H[c, k]).
            for k in self.row_ptr[c]..self.row_ptr[c + 1] {
                let h = self.vals[k].conj();
                let other = &src[self.cols[k] * dim..(self.cols[k] + 1) * dim];
                for (o, &x) in out_col.iter_mut().zip(other) {
                    *o -= x * h;
                }
            }
            let loss_c = self.population_loss[c];
            for (r, (o, &x)) in out_col.iter_mut().zip(col).enumerate() {
                let comm = *o;
                let coef = self.population_loss[r] + loss_c + self.dephasing_loss[r ^ c];
                *o = C64::new(comm.im, -comm.re) + x * coef;
            }
        }
        let n = self.n_qubits;
        for i in 0..n {
            let (relax, excite) = (2.0 * self.rates.g_relax[i], 2.0 * self.rates.g_excite[i]);
            if relax == 0.0 && excite == 0.0 {
                continue;
            }
            let m = linalg::site_mask(i, n);
            for c in 0..dim {
                let c_set = c & m != 0;
                let rate = if c_set { excite } else { relax };
                if rate == 0.0 {
                    continue;
                }
                let partner = c ^ m;
                let other = &src[partner * dim..(partner + 1) * dim];
                let out_col = &mut dst[c * dim..(c + 1) * dim];
                for r in 0..dim {
                    if (r & m != 0) == c_set {
                        out_col[r] += other[r ^ m] * rate;
                    }
                }
            }
        }
    }

    pub fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        self.apply(rho, &mut out);
        out
    }

    /// Dense superoperator acting on column-major vec(ρ), for small chains.
    pub fn superoperator(&self) -> CMatrix {
        let d2 = self.dim * self.dim;
        let mut out = CMatrix::zeros(d2, d2);
        let mut basis = CMatrix::zeros(self.dim, self.dim);
        let mut image = CMatrix::zeros(self.dim, self.dim);
        for k in 0..d2 {
            basis.as_mut_slice()[k] = linalg::ONE;
            self.apply(&basis, &mut image);
            out.column_mut(k).copy_from_slice(image.as_slice());
            basis.as_mut_slice()[k] = ZERO;
        }
        out
    }
}

/// dρ/dt for a single evaluation. Builds the generator on every call; use
/// [`LindbladGenerator`] directly inside loops.
pub fn lindblad_rhs(rho: &DensityMatrix, h: &HermitianOperator, rates: &RateSet) -> Result<CMatrix> {
    if rho.dim() != h.dim() {
        return Err(ChainError::DimensionMismatch { expected: h.dim(), got: rho.dim() });
    }
    Ok(LindbladGenerator::new(h, rates)?.rhs(rho.matrix()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub t_max: f64,
    pub dt: f64,
    pub sample_every: usize,
    /// Check the minimum eigenvalue at every n-th snapshot; 0 disables it.
    pub positivity_every: usize,
}

impl EvolveOptions {
    pub fn new(t_max: f64, dt: f64, sample_every: usize) -> Self {
        EvolveOptions { t_max, dt, sample_every, positivity_every: 1 }
    }
}

/// Trace and Hermiticity corrections applied at snapshot times.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub max_trace_drift: f64,
    pub cumulative_trace_correction: f64,
    pub max_hermiticity_drift: f64,
    pub min_eigenvalue: f64,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub drift: DriftReport,
}

/// Negative eigenvalues below this abort the integration.
pub const POSITIVITY_ABORT: f64 = -1e-6;
/// Trace corrections above this abort the integration.
pub const TRACE_CORRECTION_CEILING: f64 = 1e-6;

struct Rk4Workspace {
    k: CMatrix,
    stage: CMatrix,
    acc: CMatrix,
}

impl Rk4Workspace {
    fn new(dim: usize) -> Self {
        Rk4Workspace { k: CMatrix::zeros(dim, dim), stage: CMatrix::zeros(dim, dim), acc: CMatrix::zeros(dim, dim) }
    }

    fn step(&mut self, gen: &LindbladGenerator, rho: &mut CMatrix, dt: f64) {
        gen.apply(rho, &mut self.k);
        self.acc.copy_from(&self.k);
        self.stage.copy_from(rho);
        axpy(&mut self.stage, 0.5 * dt, &self.k);
        gen.apply(&self.stage, &mut self.k);
        axpy(&mut self.acc, 2.0, &self.k);
        self.stage.copy_from(rho);
        axpy(&mut self.stage, 0.5 * dt, &self.k);
        gen.apply(&self.stage, &mut self.k);
        axpy(&mut self.acc, 2.0, &self.k);
        self.stage.copy_from(rho);
        axpy(&mut self.stage, dt, &self.k);
        gen.apply(&self.stage, &mut self.k);
        self.acc += &self.k;
        axpy(rho, dt / 6.0, &self.acc);
    }
}

fn axpy(y: &mut CMatrix, a: f64, x: &CMatrix) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += xi * a;
    }
}

fn check_step(gen: &LindbladGenerator, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(ChainError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let limit = 0.1 / gen.frequency_scale().max(f64::MIN_POSITIVE);
    if dt > limit {
        return Err(ChainError::StepGuard { dt, limit });
    }
    Ok(())
}

/// Fixed-step RK4 integration that hands every snapshot to `observe`.
///
/// Snapshots are taken at t = 0 and every `sample_every` steps. At each
/// snapshot the running state is re-Hermitised and rescaled to unit trace; the
/// corrections are accumulated in the returned [`DriftReport`].
pub fn evolve_with<F>(rho0: &DensityMatrix, gen: &LindbladGenerator, opts: &EvolveOptions, mut observe: F) -> Result<DriftReport>
where
    F: FnMut(f64, &DensityMatrix) -> Result<()>,
{
    if rho0.dim() != gen.dim() {
        return Err(ChainError::DimensionMismatch { expected: gen.dim(), got: rho0.dim() });
    }
    check_step(gen, opts.dt)?;
    if opts.sample_every == 0 {
        return Err(ChainError::InvalidParameter("sample_every must be at least 1".into()));
    }
    let steps = (opts.t_max / opts.dt).round() as usize;
    let mut rho = rho0.clone();
    let mut ws = Rk4Workspace::new(gen.dim());
    let mut report = DriftReport { min_eigenvalue: f64::INFINITY, ..Default::default() };
    let mut snapshot = 0usize;
    for step in 0..=steps {
        if step % opts.sample_every == 0 {
            let t = step as f64 * opts.dt;
            let scale = linalg::max_abs(rho.matrix()).max(f64::MIN_POSITIVE);
            report.max_hermiticity_drift =
                report.max_hermiticity_drift.max(linalg::hermiticity_defect(rho.matrix()) / scale);
            let tr = rho.renormalize();
            let drift = (tr - linalg::ONE).norm();
            report.max_trace_drift = report.max_trace_drift.max(drift);
            report.cumulative_trace_correction += drift;
            if drift > TRACE_CORRECTION_CEILING {
                return Err(ChainError::TraceDrift { time: t, drift });
            }
            if opts.positivity_every > 0 && snapshot % opts.positivity_every == 0 {
                let min_ev = rho.min_eigenvalue();
                report.min_eigenvalue = report.min_eigenvalue.min(min_ev);
                if min_ev < POSITIVITY_ABORT {
                    return Err(ChainError::Positivity { time: t, min_eigenvalue: min_ev });
                }
            }
            debug!("t = {t:.3}: trace drift {drift:.2e}");
            observe(t, &rho)?;
            snapshot += 1;
        }
        if step < steps {
            ws.step(gen, rho.matrix_mut(), opts.dt);
        }
    }
    report.steps = steps;
    if report.min_eigenvalue == f64::INFINITY {
        report.min_eigenvalue = f64::NAN;
    }
    Ok(report)
}

/// Integrates and keeps every snapshot. Memory grows as 16·4^N bytes per
/// snapshot; prefer [`evolve_with`] for long runs of large chains.
pub fn evolve(rho0: &DensityMatrix, h: &HermitianOperator, rates: &RateSet, opts: &EvolveOptions) -> Result<Trajectory> {
    let gen = LindbladGenerator::new(h, rates)?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let drift = evolve_with(rho0, &gen, opts, |t, rho| {
        times.push(t);
        states.push(rho.clone());
        Ok(())
    })?;
    Ok(Trajectory { times, states, drift })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateOptions {
    /// Relative Frobenius residual ‖dρ/dt‖ / ‖ρ‖ at which the state counts as stationary.
    pub tol: f64,
    pub t_cap: f64,
    pub dt: f64,
    /// Residual is evaluated every this many steps.
    pub check_every: usize,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        SteadyStateOptions { tol: 1e-8, t_cap: 2.0e4, dt: 0.05, check_every: 20 }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub state: DensityMatrix,
    pub converged: bool,
    pub time: f64,
    pub residual: f64,
}

/// Integrates until the relative residual drops below `tol` or `t_cap` is hit.
/// An uncertified result is returned with `converged = false`.
pub fn steady_state(rho0: &DensityMatrix, h: &HermitianOperator, rates: &RateSet, opts: &SteadyStateOptions) -> Result<SteadyState> {
    if !rates.is_dissipative() {
        return Err(ChainError::InvalidParameter("steady state needs a non-zero dissipative rate".into()));
    }
    let gen = LindbladGenerator::new(h, rates)?;
    steady_state_with(rho0, &gen, opts)
}

pub fn steady_state_with(rho0: &DensityMatrix, gen: &LindbladGenerator, opts: &SteadyStateOptions) -> Result<SteadyState> {
    if rho0.dim() != gen.dim() {
        return Err(ChainError::DimensionMismatch { expected: gen.dim(), got: rho0.dim() });
    }
    check_step(gen, opts.dt)?;
    let check_every = opts.check_every.max(1);
    let mut rho = rho0.clone();
    let mut ws = Rk4Workspace::new(gen.dim());
    let mut deriv = CMatrix::zeros(gen.dim(), gen.dim());
    let max_steps = (opts.t_cap / opts.dt).ceil() as usize;
    let mut step = 0usize;
    loop {
        if step % check_every == 0 || step >= max_steps {
            rho.renormalize();
            gen.apply(rho.matrix(), &mut deriv);
            let residual = deriv.norm() / rho.matrix().norm();
            let time = step as f64 * opts.dt;
            if residual < opts.tol {
                return Ok(SteadyState { state: rho, converged: true, time, residual });
            }
            if step >= max_steps {
                warn!("steady state not certified by t = {time}: residual {residual:.3e}");
                return Ok(SteadyState { state: rho, converged: false, time, residual });
            }
        }
        ws.step(gen, rho.matrix_mut(), opts.dt);
        step += 1;
    }
}
