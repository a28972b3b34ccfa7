//! Scenario and scan configuration files (JSON, versioned by `schema_version`).
//!
//! Sites and pairs are 1-based in configuration files and outputs.

use std::path::Path;

use qchain_core::chain::{ChainSpec, DisorderTarget, MAX_DENSE_QUBITS};
use qchain_core::lindblad::{nbar_from_temperature, NoiseSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// A chain parameter given either once for every site/bond or per site/bond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Uniform(f64),
    PerSite(Vec<f64>),
}

impl Param {
    fn expand(&self, len: usize, name: &str) -> Result<Vec<f64>> {
        match self {
            Param::Uniform(v) => Ok(vec![*v; len]),
            Param::PerSite(v) if v.len() == len => Ok(v.clone()),
            Param::PerSite(v) => Err(HarnessError::Config(format!("{name} lists {} values, expected {len}", v.len()))),
        }
    }
}

fn default_energy_unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainTemplate {
    pub n_qubits: usize,
    #[serde(default = "zero_param")]
    pub epsilon: Param,
    pub delta: Param,
    #[serde(default = "zero_param")]
    pub coupling: Param,
    /// Value of the energy unit E_C in Kelvin.
    #[serde(default = "default_energy_unit")]
    pub energy_unit_kelvin: f64,
}

fn zero_param() -> Param {
    Param::Uniform(0.0)
}

impl ChainTemplate {
    pub fn to_spec(&self) -> Result<ChainSpec> {
        let n = self.n_qubits;
        if n == 0 {
            return Err(HarnessError::Config("n_qubits must be at least 1".into()));
        }
        let spec = ChainSpec {
            n_qubits: n,
            epsilon: self.epsilon.expand(n, "epsilon")?,
            delta: self.delta.expand(n, "delta")?,
            coupling: self.coupling.expand(n - 1, "coupling")?,
            energy_unit_kelvin: self.energy_unit_kelvin,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    ProductEigen,
    BellHeadEigen,
    GroundOfKIni,
    ThermalOfKIni,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchConfig {
    pub k_ini: f64,
    /// Final coupling on every bond; the chain template's coupling if absent.
    #[serde(default)]
    pub k_fin: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub n_thermal: Option<f64>,
    #[serde(default)]
    pub temperature_mk: Option<f64>,
}

/// Environment occupation with the temperature it corresponds to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedNoise {
    pub gamma: f64,
    pub n_thermal: f64,
    pub temperature_mk: Option<f64>,
}

impl ResolvedNoise {
    pub fn spec(&self) -> NoiseSpec {
        NoiseSpec { gamma: self.gamma, n_thermal: self.n_thermal }
    }
}

impl NoiseConfig {
    /// Converts a temperature to n_T with the level splitting ω of site 1.
    pub fn resolve(&self, chain: &ChainSpec) -> Result<ResolvedNoise> {
        let (n_thermal, temperature_mk) = match (self.n_thermal, self.temperature_mk) {
            (Some(_), Some(_)) => {
                return Err(HarnessError::Config("give noise.n_thermal or noise.temperature_mk, not both".into()))
            }
            (Some(n), None) => (n, None),
            (None, Some(mk)) => {
                let omega = chain.epsilon[0].hypot(chain.delta[0]);
                (nbar_from_temperature(omega, mk * 1e-3, chain.energy_unit_kelvin)?, Some(mk))
            }
            (None, None) => (0.0, None),
        };
        let out = ResolvedNoise { gamma: self.gamma, n_thermal, temperature_mk };
        out.spec().validate()?;
        Ok(out)
    }
}

fn default_ensemble() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderConfig {
    pub fraction: f64,
    pub targets: Vec<DisorderTarget>,
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
}

fn default_bond_dim() -> usize {
    60
}

fn default_mps_dt() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolverConfig {
    Exact,
    Mps {
        #[serde(default = "default_bond_dim")]
        bond_dim: usize,
        #[serde(default = "default_mps_dt")]
        dt: f64,
    },
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::Exact
    }
}

impl SolverConfig {
    pub fn default_mps() -> Self {
        SolverConfig::Mps { bond_dim: default_bond_dim(), dt: default_mps_dt() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrozenAxesConfig {
    /// Time at which the optimal axes of each pair are recorded and then held.
    pub reference_time: f64,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesConfig {
    #[serde(default)]
    pub pairs: Vec<[usize; 2]>,
    /// Two blocks of two sites each: [a1, a2, b1, b2].
    #[serde(default)]
    pub blocks: Vec<[usize; 4]>,
    #[serde(default = "yes")]
    pub e_n: bool,
    #[serde(default)]
    pub c1: bool,
    #[serde(default)]
    pub c2: bool,
    #[serde(default)]
    pub c2_opt: bool,
    #[serde(default)]
    pub frozen_axes: Option<FrozenAxesConfig>,
}

impl ObservablesConfig {
    pub fn needs_correlations(&self) -> bool {
        self.c1 || self.c2 || self.c2_opt || self.frozen_axes.is_some()
    }
}

fn default_dt() -> f64 {
    0.01
}

fn default_sample_every() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub chain: ChainTemplate,
    pub initial_state: InitialState,
    #[serde(default)]
    pub quench: Option<QuenchConfig>,
    /// Temperature of a thermal initial state; the noise temperature if absent.
    #[serde(default)]
    pub initial_temperature_mk: Option<f64>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub disorder: Option<DisorderConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub t_max: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    pub observables: ObservablesConfig,
    #[serde(default)]
    pub seed: u64,
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(HarnessError::Config(format!("schema_version {v} is not supported (expected {SCHEMA_VERSION})")));
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::Io { path: path.to_path_buf(), source: e })
}

impl ScenarioConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(s).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read(path)?).map_err(|e| e.context(path))
    }

    pub fn validate(&self) -> Result<()> {
        check_version(self.schema_version)?;
        let chain = self.chain.to_spec()?;
        let n = chain.n_qubits;
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(HarnessError::Config(format!("t_max must be positive, got {}", self.t_max)));
        }
        if !(self.dt > 0.0) || self.sample_every == 0 {
            return Err(HarnessError::Config("dt must be positive and sample_every at least 1".into()));
        }
        match self.solver {
            SolverConfig::Exact if n > MAX_DENSE_QUBITS => {
                return Err(HarnessError::Config(format!("exact solver supports at most {MAX_DENSE_QUBITS} qubits, got {n}")))
            }
            SolverConfig::Mps { bond_dim, dt } if bond_dim == 0 || !(dt > 0.0) || n < 2 => {
                return Err(HarnessError::Config("mps solver needs bond_dim ≥ 1, dt > 0 and at least two qubits".into()))
            }
            _ => {}
        }
        if let Some(q) = &self.quench {
            let k_fin = q.k_fin.unwrap_or(0.0);
            if !q.k_ini.is_finite() || !k_fin.is_finite() {
                return Err(HarnessError::Config("quench couplings must be finite".into()));
            }
        }
        if matches!(self.initial_state, InitialState::GroundOfKIni | InitialState::ThermalOfKIni) {
            if self.quench.is_none() {
                return Err(HarnessError::Config("ground/thermal initial states need a quench section with k_ini".into()));
            }
            if n > MAX_DENSE_QUBITS {
                return Err(HarnessError::Config("ground/thermal initial states need a dense diagonalisation".into()));
            }
        }
        if self.initial_state == InitialState::BellHeadEigen && n < 2 {
            return Err(HarnessError::Config("bell_head_eigen needs at least two qubits".into()));
        }
        if self.initial_state == InitialState::ThermalOfKIni && self.initial_temperature_mk.or(self.noise.temperature_mk).is_none() {
            return Err(HarnessError::Config("thermal_of_k_ini needs initial_temperature_mk or noise.temperature_mk".into()));
        }
        self.noise.resolve(&chain)?;
        if let Some(d) = &self.disorder {
            qchain_core::chain::DisorderSpec::new(d.fraction, d.targets.clone(), 0)?;
            if d.ensemble_size == 0 {
                return Err(HarnessError::Config("ensemble_size must be at least 1".into()));
            }
        }
        let site_ok = |s: usize| (1..=n).contains(&s);
        for p in &self.observables.pairs {
            if !site_ok(p[0]) || !site_ok(p[1]) || p[0] == p[1] {
                return Err(HarnessError::Config(format!("pair {p:?} invalid for {n} qubits")));
            }
        }
        for b in &self.observables.blocks {
            let mut sorted = *b;
            sorted.sort_unstable();
            if !b.iter().all(|&s| site_ok(s)) || sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(HarnessError::Config(format!("block {b:?} invalid for {n} qubits")));
            }
        }
        Ok(())
    }

    pub fn ensemble_size(&self) -> usize {
        self.disorder.as_ref().map_or(1, |d| d.ensemble_size)
    }

    /// SHA-256 of the canonical JSON serialisation.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serialises").as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransientConfig {
    pub t_max: f64,
    #[serde(default = "default_scan_dt")]
    pub dt: f64,
    #[serde(default = "default_scan_sample_every")]
    pub sample_every: usize,
}

fn default_scan_dt() -> f64 {
    0.05
}

fn default_scan_sample_every() -> usize {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyConfig {
    #[serde(default = "default_steady_tol")]
    pub tol: f64,
    #[serde(default = "default_t_cap")]
    pub t_cap: f64,
    #[serde(default = "default_scan_dt")]
    pub dt: f64,
}

fn default_steady_tol() -> f64 {
    1e-8
}

fn default_t_cap() -> f64 {
    2e4
}

impl Default for SteadyConfig {
    fn default() -> Self {
        SteadyConfig { tol: default_steady_tol(), t_cap: default_t_cap(), dt: default_scan_dt() }
    }
}

fn default_pair() -> [usize; 2] {
    [1, 2]
}

/// Steady-state E_N over a Γ × K/Δ grid at fixed n_T.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub n_qubits: usize,
    pub delta: f64,
    #[serde(default)]
    pub epsilon: f64,
    pub n_thermal: f64,
    pub gammas: Vec<f64>,
    pub k_over_delta: Vec<f64>,
    #[serde(default = "default_pair")]
    pub pair: [usize; 2],
    pub transient: TransientConfig,
    #[serde(default)]
    pub steady: SteadyConfig,
}

impl ScanConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ScanConfig = serde_json::from_str(s).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read(path)?).map_err(|e| e.context(path))
    }

    pub fn validate(&self) -> Result<()> {
        check_version(self.schema_version)?;
        let n = self.n_qubits;
        if !(2..=MAX_DENSE_QUBITS).contains(&n) {
            return Err(HarnessError::Config(format!("scan needs 2..={MAX_DENSE_QUBITS} qubits, got {n}")));
        }
        if !(self.delta > 0.0) || self.n_thermal < 0.0 {
            return Err(HarnessError::Config("scan needs delta > 0 and n_thermal ≥ 0".into()));
        }
        if self.gammas.is_empty() || self.k_over_delta.is_empty() {
            return Err(HarnessError::Config("scan grids must not be empty".into()));
        }
        if self.gammas.iter().any(|g| !(*g >= 0.0)) || self.gammas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Config("gammas must be non-negative and strictly increasing".into()));
        }
        let [i, j] = self.pair;
        if i == j || !(1..=n).contains(&i) || !(1..=n).contains(&j) {
            return Err(HarnessError::Config(format!("pair {:?} invalid for {n} qubits", self.pair)));
        }
        if !(self.transient.t_max > 0.0 && self.transient.dt > 0.0) || self.transient.sample_every == 0 {
            return Err(HarnessError::Config("transient needs t_max > 0, dt > 0, sample_every ≥ 1".into()));
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serialises").as_bytes())
    }
}
