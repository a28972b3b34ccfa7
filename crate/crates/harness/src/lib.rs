//! Scenario configuration, ensemble drivers and run-directory output for
//! the `qchain` command-line tool.

pub mod bounds;
pub mod config;
pub mod error;
pub mod output;
pub mod scan;
pub mod scenario;
pub mod stats;

pub use config::{ScanConfig, ScenarioConfig, SolverConfig};
pub use error::{HarnessError, Result};
pub use output::{emit_outputs, write_error_manifest};
pub use scan::{emit_scan, steady_state_scan, RowClass, ScanResult};
pub use scenario::{run_scenario, simulate_member, thermal_fidelity_curve, RunResult};
pub use stats::{first_maximum, FirstMaxStats, Peak};
