//! Single runs and seeded disorder ensembles.

use nalgebra::Matrix3;
use qchain_core::chain::{build_hamiltonian_eigen, mixing_angles, sample_disorder, ChainSpec, DisorderSpec};
use qchain_core::lindblad::{evolve_with, rates_from_angles, DriftReport, EvolveOptions, LindbladGenerator, RateSet};
use qchain_core::measures::{log_negativity, reduce, reduce_pure, ReducedState};
use qchain_core::mps::{MpsMixedState, TebdEvolver, TrotterPlan, TruncationReport};
use qchain_core::state::{
    eigenbasis_bell_head, eigenbasis_product, ground_state, thermal_state_kelvin, DensityMatrix, StateVector,
};
use qchain_core::witness::{bound_c1, bound_c2, bound_c2_frozen, bound_c2_optimized, correlation_matrix_of_pair};
use qchain_core::{HermitianOperator, UnitaryPropagator};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{InitialState, ObservablesConfig, ResolvedNoise, ScenarioConfig, SolverConfig};
use crate::error::{HarnessError, Result};
use crate::stats::{first_maximum, pointwise, FirstMaxStats};

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Disorder seed of ensemble member `index`.
pub fn member_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed.wrapping_add(index as u64))
}

/// Per-sample values of one tracked pair. Disabled observables are NaN.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairSeries {
    pub e_n: Vec<f64>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub c2_opt: Vec<f64>,
    pub c2_frozen: Vec<f64>,
}

impl PairSeries {
    fn fields(&self) -> [&[f64]; 5] {
        [&self.e_n, &self.c1, &self.c2, &self.c2_opt, &self.c2_frozen]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MemberDiagnostics {
    pub index: usize,
    pub disorder_seed: Option<u64>,
    pub drift: Option<DriftReport>,
    pub truncation: Option<TruncationReport>,
    /// Samples at which the optimized bound was refused for asymmetry.
    pub asymmetric_samples: usize,
    pub ground_degeneracy: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberResult {
    pub times: Vec<f64>,
    pub pairs: Vec<PairSeries>,
    pub blocks: Vec<Vec<f64>>,
    /// Optimal axes recorded at the frozen-axes reference time, per pair.
    pub frozen_axes: Vec<Option<Matrix3<f64>>>,
    pub diagnostics: MemberDiagnostics,
}

/// Chain after the quench together with the initial bond strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberChain {
    pub final_spec: ChainSpec,
    pub initial_spec: ChainSpec,
}

/// Chain of one ensemble member: the template with the quench applied and,
/// if configured, one disorder realisation drawn from `seed`.
///
/// Under disorder every initial bond keeps the ratio K_ini / K_fin of the
/// nominal quench.
pub fn member_chain(cfg: &ScenarioConfig, seed: Option<u64>) -> Result<MemberChain> {
    let mut nominal = cfg.chain.to_spec()?;
    if let Some(k_fin) = cfg.quench.and_then(|q| q.k_fin) {
        nominal = nominal.with_uniform_coupling(k_fin);
    }
    let final_spec = match (&cfg.disorder, seed) {
        (Some(d), Some(seed)) => sample_disorder(&nominal, &DisorderSpec::new(d.fraction, d.targets.clone(), seed)?),
        _ => nominal.clone(),
    };
    let mut initial_spec = final_spec.clone();
    if let Some(q) = cfg.quench {
        for (k, (&nom, &fin)) in initial_spec.coupling.iter_mut().zip(nominal.coupling.iter().zip(&final_spec.coupling)) {
            *k = if nom == 0.0 { q.k_ini } else { q.k_ini * fin / nom };
        }
    }
    Ok(MemberChain { final_spec, initial_spec })
}

enum Initial {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

fn initial_state(cfg: &ScenarioConfig, chain: &MemberChain, diag: &mut MemberDiagnostics) -> Result<Initial> {
    let n = chain.final_spec.n_qubits;
    Ok(match cfg.initial_state {
        InitialState::ProductEigen => Initial::Pure(eigenbasis_product(n)?),
        InitialState::BellHeadEigen => Initial::Pure(eigenbasis_bell_head(n)?),
        InitialState::GroundOfKIni => {
            let g = ground_state(&build_hamiltonian_eigen(&chain.initial_spec)?)?;
            diag.ground_degeneracy = Some(g.degeneracy);
            Initial::Pure(g.state)
        }
        InitialState::ThermalOfKIni => {
            let mk = cfg.initial_temperature_mk.or(cfg.noise.temperature_mk).expect("validated");
            let h = build_hamiltonian_eigen(&chain.initial_spec)?;
            Initial::Mixed(thermal_state_kelvin(&h, mk * 1e-3, chain.initial_spec.energy_unit_kelvin)?)
        }
    })
}

/// Sample times shared by every solver: multiples of `dt · sample_every`.
pub fn sample_times(cfg: &ScenarioConfig) -> Vec<f64> {
    let steps = (cfg.t_max / cfg.dt).round() as usize;
    (0..=steps).step_by(cfg.sample_every).map(|s| s as f64 * cfg.dt).collect()
}

struct Recorder<'a> {
    obs: &'a ObservablesConfig,
    pairs: Vec<(usize, usize)>,
    blocks: Vec<([usize; 2], [usize; 2])>,
    out: MemberResult,
}

impl<'a> Recorder<'a> {
    fn new(cfg: &'a ScenarioConfig, diagnostics: MemberDiagnostics) -> Self {
        let obs = &cfg.observables;
        let pairs: Vec<(usize, usize)> = obs.pairs.iter().map(|p| (p[0] - 1, p[1] - 1)).collect();
        let blocks = obs.blocks.iter().map(|b| ([b[0] - 1, b[1] - 1], [b[2] - 1, b[3] - 1])).collect();
        let out = MemberResult {
            times: Vec::new(),
            pairs: vec![PairSeries::default(); pairs.len()],
            blocks: vec![Vec::new(); obs.blocks.len()],
            frozen_axes: vec![None; pairs.len()],
            diagnostics,
        };
        Recorder { obs, pairs, blocks, out }
    }

    fn sites_needed(&self) -> bool {
        !self.pairs.is_empty() || !self.blocks.is_empty()
    }

    fn record<F>(&mut self, t: f64, reduced: F) -> qchain_core::Result<()>
    where
        F: Fn(&[usize]) -> qchain_core::Result<ReducedState>,
    {
        self.out.times.push(t);
        let frozen_ref = self.obs.frozen_axes.map(|f| f.reference_time);
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            let rs = reduced(&[i, j])?;
            let series = &mut self.out.pairs[k];
            let e_n = if self.obs.e_n { log_negativity(&rs, &[i.min(j)])? } else { f64::NAN };
            series.e_n.push(e_n);
            if !self.obs.needs_correlations() {
                for v in [&mut series.c1, &mut series.c2, &mut series.c2_opt, &mut series.c2_frozen] {
                    v.push(f64::NAN);
                }
                continue;
            }
            let x = correlation_matrix_of_pair(&rs, i > j)?;
            series.c1.push(if self.obs.c1 { bound_c1(&x) } else { f64::NAN });
            series.c2.push(if self.obs.c2 { bound_c2(&x) } else { f64::NAN });
            let opt = bound_c2_optimized(&x).ok();
            if opt.is_none() {
                self.out.diagnostics.asymmetric_samples += 1;
            }
            series.c2_opt.push(match opt {
                Some(o) if self.obs.c2_opt => o.value,
                _ => f64::NAN,
            });
            let frozen = match frozen_ref {
                Some(t_ref) if t >= t_ref - 1e-9 => {
                    let axes = &mut self.out.frozen_axes[k];
                    if axes.is_none() {
                        *axes = opt.map(|o| o.axes);
                    }
                    axes.as_ref().map_or(f64::NAN, |a| bound_c2_frozen(&x, a))
                }
                _ => f64::NAN,
            };
            series.c2_frozen.push(frozen);
        }
        for (k, (a, b)) in self.blocks.iter().enumerate() {
            let all = [a[0], a[1], b[0], b[1]];
            let rs = reduced(&all)?;
            self.out.blocks[k].push(log_negativity(&rs, a)?);
        }
        Ok(())
    }
}

fn rates_for(spec: &ChainSpec, noise: &ResolvedNoise) -> Result<RateSet> {
    Ok(rates_from_angles(&mixing_angles(spec)?, &noise.spec()))
}

fn run_dense(
    cfg: &ScenarioConfig,
    h: &HermitianOperator,
    rates: &RateSet,
    init: Initial,
    rec: &mut Recorder<'_>,
) -> Result<()> {
    let times = sample_times(cfg);
    let n = h.n_qubits();
    if !rates.is_dissipative() {
        let prop = UnitaryPropagator::new(h);
        match init {
            Initial::Pure(psi) => {
                let ev = prop.pure(&psi)?;
                for &t in &times {
                    let psi_t = ev.at(t);
                    rec.record(t, |s| reduce_pure(&psi_t, s))?;
                }
            }
            Initial::Mixed(rho) => {
                let ev = prop.mixed(&rho)?;
                for &t in &times {
                    let rho_t = ev.at(t);
                    rec.record(t, |s| reduce(&rho_t, s))?;
                }
            }
        }
        return Ok(());
    }
    let rho0 = match init {
        Initial::Pure(psi) => psi.to_density(),
        Initial::Mixed(rho) => rho,
    };
    debug_assert_eq!(rho0.n_qubits(), n);
    let gen = LindbladGenerator::new(h, rates)?;
    let opts = EvolveOptions::new(cfg.t_max, cfg.dt, cfg.sample_every);
    let drift = evolve_with(&rho0, &gen, &opts, |t, rho| {
        rec.record(t, |s| reduce(rho, s))
    })?;
    rec.out.diagnostics.drift = Some(drift);
    Ok(())
}

fn mps_initial(init: Initial, cfg: &ScenarioConfig, n: usize) -> Result<MpsMixedState> {
    let ket0 = || eigenbasis_product(1).map(|s| s.to_density());
    Ok(match (cfg.initial_state, init) {
        (InitialState::ProductEigen, _) => MpsMixedState::from_product(&vec![ket0()?; n])?,
        (InitialState::BellHeadEigen, _) => {
            let head = MpsMixedState::from_dense(&eigenbasis_bell_head(2)?.to_density())?;
            if n == 2 {
                head
            } else {
                head.concat(MpsMixedState::from_product(&vec![ket0()?; n - 2])?)
            }
        }
        (_, Initial::Pure(psi)) => MpsMixedState::from_dense(&psi.to_density())?,
        (_, Initial::Mixed(rho)) => MpsMixedState::from_dense(&rho)?,
    })
}

fn run_mps(
    cfg: &ScenarioConfig,
    spec: &ChainSpec,
    rates: &RateSet,
    init: Initial,
    bond_dim: usize,
    dt: f64,
    rec: &mut Recorder<'_>,
) -> Result<()> {
    let interval = cfg.dt * cfg.sample_every as f64;
    let sub = (interval / dt).round() as usize;
    if sub == 0 || (sub as f64 * dt - interval).abs() > 1e-9 * interval {
        return Err(HarnessError::Config(format!(
            "sample interval {interval} is not a whole number of mps steps of {dt}"
        )));
    }
    let plan = TrotterPlan::new(spec, rates, dt, bond_dim)?;
    let state = mps_initial(init, cfg, spec.n_qubits)?;
    let mut ev = TebdEvolver::new(plan, state)?;
    for (k, &t) in sample_times(cfg).iter().enumerate() {
        if k > 0 {
            ev.advance(sub);
        }
        let state = ev.state();
        rec.record(t, |s| state.reduced(s))?;
    }
    let report = ev.report().clone();
    if report.flagged() {
        log::warn!(
            "truncation weight exceeded the per-step ceiling in {} steps (total {:.3e})",
            report.flagged_steps,
            report.total_weight
        );
    }
    rec.out.diagnostics.truncation = Some(report);
    Ok(())
}

/// Simulates ensemble member `index` (or the single run when there is no
/// disorder).
pub fn simulate_member(cfg: &ScenarioConfig, index: usize) -> Result<MemberResult> {
    let disorder_seed = cfg.disorder.as_ref().map(|_| member_seed(cfg.seed, index));
    let chain = member_chain(cfg, disorder_seed)?;
    let mut diag = MemberDiagnostics { index, disorder_seed, ..Default::default() };
    let noise = cfg.noise.resolve(&cfg.chain.to_spec()?)?;
    let rates = rates_for(&chain.final_spec, &noise)?;
    let init = initial_state(cfg, &chain, &mut diag)?;
    let mut rec = Recorder::new(cfg, diag);
    if !rec.sites_needed() {
        return Ok(rec.out);
    }
    match cfg.solver {
        SolverConfig::Exact => {
            let h = build_hamiltonian_eigen(&chain.final_spec)?;
            run_dense(cfg, &h, &rates, init, &mut rec)?;
        }
        SolverConfig::Mps { bond_dim, dt } => run_mps(cfg, &chain.final_spec, &rates, init, bond_dim, dt, &mut rec)?,
    }
    Ok(rec.out)
}

/// Hamiltonian, rates and initial density matrix of one member, for driving
/// the dense evolver directly.
#[derive(Debug, Clone)]
pub struct DenseSetup {
    pub hamiltonian: HermitianOperator,
    pub rates: RateSet,
    pub rho0: DensityMatrix,
    /// Whether the initial state is pure.
    pub pure: bool,
}

/// Builds the dense problem of member `index` with the chain length replaced
/// by `n_qubits` when given. Disorder, quench and noise follow `cfg`.
pub fn dense_setup(cfg: &ScenarioConfig, index: usize, n_qubits: Option<usize>) -> Result<DenseSetup> {
    let mut cfg = cfg.clone();
    if let Some(n) = n_qubits {
        cfg.chain.n_qubits = n;
        cfg.solver = SolverConfig::Exact;
        cfg.observables.pairs.clear();
        cfg.observables.blocks.clear();
    }
    cfg.validate()?;
    let disorder_seed = cfg.disorder.as_ref().map(|_| member_seed(cfg.seed, index));
    let chain = member_chain(&cfg, disorder_seed)?;
    let noise = cfg.noise.resolve(&cfg.chain.to_spec()?)?;
    let rates = rates_for(&chain.final_spec, &noise)?;
    let mut diag = MemberDiagnostics::default();
    let (rho0, pure) = match initial_state(&cfg, &chain, &mut diag)? {
        Initial::Pure(psi) => (psi.to_density(), true),
        Initial::Mixed(rho) => (rho, false),
    };
    Ok(DenseSetup { hamiltonian: build_hamiltonian_eigen(&chain.final_spec)?, rates, rho0, pure })
}

/// Ensemble-aggregated values of one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    /// 1-based sites as configured.
    pub sites: [usize; 2],
    pub mean: PairSeries,
    pub std: PairSeries,
    pub first_max: FirstMaxStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockStats {
    pub sites: [usize; 4],
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub first_max: FirstMaxStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub times: Vec<f64>,
    pub members: usize,
    pub noise: ResolvedNoise,
    pub pairs: Vec<PairStats>,
    pub blocks: Vec<BlockStats>,
    /// Frozen optimal axes of the first member, per pair.
    pub frozen_axes: Vec<Option<Matrix3<f64>>>,
    pub diagnostics: Vec<MemberDiagnostics>,
    pub flags: Vec<String>,
}

impl RunResult {
    pub fn pair(&self, i: usize, j: usize) -> Option<&PairStats> {
        self.pairs.iter().find(|p| p.sites == [i, j])
    }

    pub fn is_ensemble(&self) -> bool {
        self.members > 1
    }
}

fn aggregate_series(members: &[MemberResult], k: usize) -> (PairSeries, PairSeries) {
    let mut mean = PairSeries::default();
    let mut std = PairSeries::default();
    for f in 0..5 {
        let cols: Vec<&[f64]> = members.iter().map(|m| m.pairs[k].fields()[f]).collect();
        let (m, s) = pointwise(&cols);
        let (dm, ds) = match f {
            0 => (&mut mean.e_n, &mut std.e_n),
            1 => (&mut mean.c1, &mut std.c1),
            2 => (&mut mean.c2, &mut std.c2),
            3 => (&mut mean.c2_opt, &mut std.c2_opt),
            _ => (&mut mean.c2_frozen, &mut std.c2_frozen),
        };
        *dm = m;
        *ds = s;
    }
    (mean, std)
}

fn collect_flags(cfg: &ScenarioConfig, diags: &[MemberDiagnostics]) -> Vec<String> {
    let mut flags = Vec::new();
    let truncated = diags.iter().filter(|d| d.truncation.as_ref().is_some_and(|t| t.flagged())).count();
    if truncated > 0 {
        flags.push(format!("mps_truncation_ceiling_exceeded: {truncated} member(s)"));
    }
    let asym: usize = diags.iter().map(|d| d.asymmetric_samples).sum();
    if asym > 0 && cfg.observables.c2_opt {
        flags.push(format!("c2_opt_refused_asymmetric: {asym} sample(s)"));
    }
    let degenerate = diags.iter().filter(|d| d.ground_degeneracy.is_some_and(|g| g > 1)).count();
    if degenerate > 0 {
        flags.push(format!("degenerate_ground_state: {degenerate} member(s)"));
    }
    flags
}

/// Runs every ensemble member on the current rayon pool and aggregates them
/// in member order.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunResult> {
    cfg.validate()?;
    let noise = cfg.noise.resolve(&cfg.chain.to_spec()?)?;
    let members: Vec<MemberResult> =
        (0..cfg.ensemble_size()).into_par_iter().map(|k| simulate_member(cfg, k)).collect::<Result<_>>()?;
    let first = &members[0];
    let times = first.times.clone();
    let pairs = cfg
        .observables
        .pairs
        .iter()
        .enumerate()
        .map(|(k, &sites)| {
            let (mean, std) = aggregate_series(&members, k);
            let peaks = members.iter().map(|m| first_maximum(&m.times, &m.pairs[k].e_n)).collect();
            PairStats { sites, mean, std, first_max: FirstMaxStats::from_peaks(peaks) }
        })
        .collect();
    let blocks = cfg
        .observables
        .blocks
        .iter()
        .enumerate()
        .map(|(k, &sites)| {
            let cols: Vec<&[f64]> = members.iter().map(|m| m.blocks[k].as_slice()).collect();
            let (mean, std) = pointwise(&cols);
            let peaks = members.iter().map(|m| first_maximum(&m.times, &m.blocks[k])).collect();
            BlockStats { sites, mean, std, first_max: FirstMaxStats::from_peaks(peaks) }
        })
        .collect();
    let diagnostics: Vec<MemberDiagnostics> = members.iter().map(|m| m.diagnostics.clone()).collect();
    let flags = collect_flags(cfg, &diagnostics);
    Ok(RunResult {
        times,
        members: members.len(),
        noise,
        pairs,
        blocks,
        frozen_axes: first.frozen_axes.clone(),
        diagnostics,
        flags,
    })
}

/// ⟨G|ρ(T)|G⟩ between the ground state and the Gibbs state of the same
/// Hamiltonian, for temperatures in mK.
pub fn thermal_fidelity_curve(spec: &ChainSpec, temperatures_mk: &[f64]) -> Result<Vec<f64>> {
    let h = build_hamiltonian_eigen(spec)?;
    let g = ground_state(&h)?;
    temperatures_mk
        .iter()
        .map(|&mk| {
            let rho = thermal_state_kelvin(&h, mk * 1e-3, spec.energy_unit_kelvin)?;
            Ok(qchain_core::state::fidelity(&g.state, &rho)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{DisorderConfig, QuenchConfig};
    use qchain_core::chain::DisorderTarget;

    fn base() -> ScenarioConfig {
        ScenarioConfig::from_json(
            r#"{
            "schema_version": 1,
            "chain": {"n_qubits": 4, "delta": 0.1, "coupling": 0.025},
            "initial_state": "bell_head_eigen",
            "t_max": 20.0, "dt": 0.05, "sample_every": 10,
            "observables": {"pairs": [[1, 2], [2, 3]], "c1": true, "c2": true, "c2_opt": true}
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn seeds_are_spread() {
        assert_ne!(member_seed(0, 0), member_seed(0, 1));
        assert_eq!(member_seed(5, 3), member_seed(5, 3));
        assert_eq!(splitmix64(0), 0xe220_a839_7b1d_cdaf);
    }

    #[test]
    fn sample_grid() {
        let t = sample_times(&base());
        assert_eq!(t.len(), 41);
        assert_eq!(t[1], 0.5);
        assert_eq!(*t.last().unwrap(), 20.0);
    }

    #[test]
    fn bell_head_starts_maximally_entangled() {
        let r = simulate_member(&base(), 0).unwrap();
        assert_eq!(r.times.len(), 41);
        assert!((r.pairs[0].e_n[0] - 1.0).abs() < 1e-12);
        assert!((r.pairs[0].c2_opt[0] - 1.0).abs() < 1e-12);
        assert_eq!(r.pairs[1].e_n[0], 0.0);
    }

    #[test]
    fn unitary_and_rk4_paths_agree_at_tiny_noise() {
        let ideal = simulate_member(&base(), 0).unwrap();
        let mut cfg = base();
        cfg.noise.gamma = 1e-12;
        let noisy = simulate_member(&cfg, 0).unwrap();
        assert!(noisy.diagnostics.drift.is_some());
        for (a, b) in ideal.pairs[0].e_n.iter().zip(&noisy.pairs[0].e_n) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn quench_scales_initial_bonds() {
        let mut cfg = base();
        cfg.quench = Some(QuenchConfig { k_ini: 0.001, k_fin: Some(0.02) });
        cfg.disorder = Some(DisorderConfig { fraction: 0.1, targets: vec![DisorderTarget::Coupling], ensemble_size: 3 });
        let c = member_chain(&cfg, Some(11)).unwrap();
        for (ki, kf) in c.initial_spec.coupling.iter().zip(&c.final_spec.coupling) {
            assert!((ki / kf - 0.05).abs() < 1e-12);
        }
        assert!(c.final_spec.coupling.iter().any(|k| (k - 0.02).abs() > 1e-6));
    }

    #[test]
    fn ensemble_is_order_independent() {
        let mut cfg = base();
        cfg.disorder = Some(DisorderConfig {
            fraction: 0.05,
            targets: vec![DisorderTarget::Delta, DisorderTarget::Coupling],
            ensemble_size: 4,
        });
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool3 = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = pool1.install(|| run_scenario(&cfg)).unwrap();
        let b = pool3.install(|| run_scenario(&cfg)).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        assert_eq!(a.members, 4);
        assert!(a.pairs[1].std.e_n.iter().skip(1).any(|s| *s > 0.0));
    }

    #[test]
    fn frozen_axes_match_optimum_at_reference() {
        let mut cfg = base();
        cfg.initial_state = InitialState::ProductEigen;
        cfg.noise.gamma = 0.01;
        cfg.observables.pairs = vec![[2, 3]];
        cfg.observables.frozen_axes = Some(crate::config::FrozenAxesConfig { reference_time: 5.0 });
        let r = simulate_member(&cfg, 0).unwrap();
        assert_eq!(r.diagnostics.asymmetric_samples, 0);
        let k = r.times.iter().position(|t| *t == 5.0).unwrap();
        let p = &r.pairs[0];
        assert!(p.c2_frozen[k - 1].is_nan());
        assert!((p.c2_frozen[k] - p.c2_opt[k]).abs() < 1e-12);
        assert!(p.c2_frozen.iter().zip(&p.c2_opt).skip(k).all(|(f, o)| *f <= o + 1e-12));
    }

    #[test]
    fn mps_solver_matches_exact_for_short_run() {
        let mut cfg = base();
        cfg.noise.gamma = 0.01;
        let dense = simulate_member(&cfg, 0).unwrap();
        cfg.solver = SolverConfig::Mps { bond_dim: 16, dt: 0.25 };
        let mps = simulate_member(&cfg, 0).unwrap();
        for (a, b) in dense.pairs[1].e_n.iter().zip(&mps.pairs[1].e_n) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn thermal_fidelity_tends_to_one() {
        let spec = ChainSpec::standard(3);
        let f = thermal_fidelity_curve(&spec, &[1.0, 20.0, 1000.0]).unwrap();
        assert!(f[0] > 1.0 - 1e-12);
        assert!(f[1] < f[0] && f[2] < f[1]);
        assert!((f[2] - 1.0 / 8.0).abs() < 0.05);
    }
}
