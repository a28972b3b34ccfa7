//! Steady-state entanglement over a Γ × K/Δ grid.

use qchain_core::chain::{build_hamiltonian_eigen, mixing_angles, ChainSpec};
use qchain_core::lindblad::{
    evolve_with, rates_from_angles, steady_state_with, EvolveOptions, LindbladGenerator, NoiseSpec, SteadyStateOptions,
};
use qchain_core::measures::{pair_log_negativity, reduce_pure};
use qchain_core::state::eigenbasis_product;
use qchain_core::UnitaryPropagator;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ScanConfig;
use crate::error::Result;
use crate::output::{build_id, fmt_f64, line_chart, Manifest, RunDir, MANIFEST};
use crate::stats::{first_maximum, Peak};

/// Steady values at or below this count as separable, and smaller changes
/// along a row do not break monotonicity.
pub const CLASSIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyPoint {
    pub e_n: f64,
    pub converged: bool,
    pub time: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub gamma: f64,
    /// `None` at Γ = 0, where no unique steady state exists.
    pub steady: Option<SteadyPoint>,
    pub transient_first_max: Option<Peak>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowClass {
    Zero,
    MonotoneDecreasing,
    NonMonotone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub k_over_delta: f64,
    pub points: Vec<ScanPoint>,
    pub class: RowClass,
    /// Smallest Γ with a positive steady value after a run of zeros.
    pub onset_gamma: Option<f64>,
    /// Whether the first transient maximum decreases (within tolerance) with Γ.
    pub transient_monotone: bool,
    pub unconverged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
}

/// Classifies a sequence of steady values ordered by increasing Γ.
pub fn classify(values: &[f64]) -> RowClass {
    if values.iter().all(|v| *v <= CLASSIFY_TOL) {
        RowClass::Zero
    } else if values.windows(2).all(|w| w[1] <= w[0] + CLASSIFY_TOL) {
        RowClass::MonotoneDecreasing
    } else {
        RowClass::NonMonotone
    }
}

fn onset(gammas: &[f64], values: &[f64]) -> Option<f64> {
    let first_positive = values.iter().position(|v| *v > CLASSIFY_TOL)?;
    (first_positive > 0).then(|| gammas[first_positive])
}

fn scan_point(cfg: &ScanConfig, spec: &ChainSpec, gamma: f64) -> Result<ScanPoint> {
    let (i, j) = (cfg.pair[0] - 1, cfg.pair[1] - 1);
    let h = build_hamiltonian_eigen(spec)?;
    let rates = rates_from_angles(&mixing_angles(spec)?, &NoiseSpec { gamma, n_thermal: cfg.n_thermal });
    let psi0 = eigenbasis_product(spec.n_qubits)?;
    let tr = &cfg.transient;
    let mut times = Vec::new();
    let mut e_n = Vec::new();
    if gamma == 0.0 {
        let prop = UnitaryPropagator::new(&h);
        let ev = prop.pure(&psi0)?;
        let steps = (tr.t_max / tr.dt).round() as usize;
        for s in (0..=steps).step_by(tr.sample_every) {
            let t = s as f64 * tr.dt;
            let rs = reduce_pure(&ev.at(t), &[i, j])?;
            times.push(t);
            e_n.push(qchain_core::measures::log_negativity(&rs, &[i.min(j)])?);
        }
        let transient_first_max = first_maximum(&times, &e_n);
        return Ok(ScanPoint { gamma, steady: None, transient_first_max });
    }
    let gen = LindbladGenerator::new(&h, &rates)?;
    let rho0 = psi0.to_density();
    evolve_with(&rho0, &gen, &EvolveOptions::new(tr.t_max, tr.dt, tr.sample_every), |t, rho| {
        times.push(t);
        e_n.push(pair_log_negativity(rho, i, j)?);
        Ok(())
    })?;
    let transient_first_max = first_maximum(&times, &e_n);
    let opts = SteadyStateOptions { tol: cfg.steady.tol, t_cap: cfg.steady.t_cap, dt: cfg.steady.dt, check_every: 20 };
    let ss = steady_state_with(&rho0, &gen, &opts)?;
    let steady = SteadyPoint {
        e_n: pair_log_negativity(&ss.state, i, j)?,
        converged: ss.converged,
        time: ss.time,
        residual: ss.residual,
    };
    Ok(ScanPoint { gamma, steady: Some(steady), transient_first_max })
}

/// Evaluates every grid point on the current rayon pool.
pub fn steady_state_scan(cfg: &ScanConfig) -> Result<ScanResult> {
    cfg.validate()?;
    let grid: Vec<(usize, f64)> = (0..cfg.k_over_delta.len())
        .flat_map(|r| cfg.gammas.iter().map(move |&g| (r, g)))
        .collect();
    let points: Vec<ScanPoint> = grid
        .par_iter()
        .map(|&(r, gamma)| {
            let spec = ChainSpec::homogeneous(cfg.n_qubits, cfg.epsilon, cfg.delta, cfg.k_over_delta[r] * cfg.delta);
            scan_point(cfg, &spec, gamma)
        })
        .collect::<Result<_>>()?;
    let rows = cfg
        .k_over_delta
        .iter()
        .zip(points.chunks(cfg.gammas.len()))
        .map(|(&k_over_delta, pts)| {
            let applicable: Vec<(f64, SteadyPoint)> = pts.iter().filter_map(|p| p.steady.map(|s| (p.gamma, s))).collect();
            let gammas: Vec<f64> = applicable.iter().map(|a| a.0).collect();
            let values: Vec<f64> = applicable.iter().map(|a| a.1.e_n).collect();
            let peaks: Vec<f64> = pts.iter().map(|p| p.transient_first_max.map_or(0.0, |m| m.value)).collect();
            ScanRow {
                k_over_delta,
                points: pts.to_vec(),
                class: classify(&values),
                onset_gamma: onset(&gammas, &values),
                transient_monotone: peaks.windows(2).all(|w| w[1] <= w[0] + CLASSIFY_TOL),
                unconverged: applicable.iter().filter(|a| !a.1.converged).count(),
            }
        })
        .collect();
    Ok(ScanResult { rows })
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), fmt_f64)
}

/// Writes `scan.csv`, `rows.csv`, a chart of the steady values and the manifest.
pub fn emit_scan(dir: &std::path::Path, cfg: &ScanConfig, result: &ScanResult, threads: Option<usize>) -> Result<RunDir> {
    let mut run = RunDir::create(dir)?;
    let mut rows = Vec::new();
    for r in &result.rows {
        for p in &r.points {
            let s = p.steady;
            rows.push(vec![
                fmt_f64(r.k_over_delta),
                fmt_f64(p.gamma),
                s.map_or("not_applicable".into(), |s| fmt_f64(s.e_n)),
                s.map_or(String::new(), |s| s.converged.to_string()),
                opt(s.map(|s| s.residual)),
                opt(p.transient_first_max.map(|m| m.value)),
                opt(p.transient_first_max.map(|m| m.time)),
            ]);
        }
    }
    let header = ["k_over_delta", "gamma", "steady_e_n", "converged", "residual", "first_max_e_n", "first_max_time"];
    run.write_csv("scan.csv", &header, &rows)?;
    let class_rows: Vec<Vec<String>> = result
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.k_over_delta),
                serde_json::to_value(r.class).expect("class serialises").as_str().unwrap_or_default().to_string(),
                opt(r.onset_gamma),
                r.transient_monotone.to_string(),
                r.unconverged.to_string(),
            ]
        })
        .collect();
    run.write_csv("rows.csv", &["k_over_delta", "class", "onset_gamma", "transient_monotone", "unconverged"], &class_rows)?;
    let gammas: Vec<f64> = cfg.gammas.clone();
    let labels: Vec<String> = result.rows.iter().map(|r| format!("K/Δ = {}", r.k_over_delta)).collect();
    let values: Vec<Vec<f64>> = result
        .rows
        .iter()
        .map(|r| r.points.iter().map(|p| p.steady.map_or(f64::NAN, |s| s.e_n)).collect())
        .collect();
    let series: Vec<(&str, &[f64])> = labels.iter().map(|l| l.as_str()).zip(values.iter().map(|v| v.as_slice())).collect();
    let title = format!("steady E_N({}, {}) vs Γ", cfg.pair[0], cfg.pair[1]);
    run.write("steady_vs_gamma.svg", line_chart(&title, &gammas, &series).as_bytes())?;
    let mut flags = Vec::new();
    let unconverged: usize = result.rows.iter().map(|r| r.unconverged).sum();
    if unconverged > 0 {
        flags.push(format!("steady_state_uncertified: {unconverged} point(s)"));
    }
    let m = Manifest {
        status: "ok",
        build: build_id(),
        command: "scan".into(),
        config: serde_json::to_value(cfg).expect("config serialises"),
        config_sha256: cfg.hash(),
        seed: None,
        threads,
        noise: None,
        flags,
        outputs: run.checksums().clone(),
        error: None,
    };
    run.write_json(MANIFEST, &m)?;
    Ok(run)
}
