//! JSON checkpoints of a TEBD run. Floats are written in shortest round-trip
//! form and parsed exactly, so a resumed run continues bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tebd::{TebdEvolver, TrotterPlan, TruncationReport};
use super::{MpsMixedState, SiteTensor};
use crate::error::{ChainError, Result};

pub const CHECKPOINT_FORMAT: &str = "qchain-mps-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub n_sites: usize,
    pub max_bond: usize,
    pub dt: f64,
    pub order: u8,
    pub steps: u64,
    pub time: f64,
    pub center: usize,
    pub truncation: TruncationReport,
    pub tensors: Vec<SiteTensor>,
}

impl Checkpoint {
    pub fn capture(ev: &TebdEvolver) -> Self {
        let plan = ev.plan();
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            n_sites: plan.n_sites(),
            max_bond: plan.max_bond(),
            dt: plan.dt(),
            order: plan.order(),
            steps: ev.steps(),
            time: ev.time(),
            center: ev.state().center(),
            truncation: *ev.report(),
            tensors: ev.state().tensors().to_vec(),
        }
    }

    /// Rebuilds the evolver; `plan` must match the recorded N, D, dt and order.
    pub fn resume(self, plan: TrotterPlan) -> Result<TebdEvolver> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(ChainError::Checkpoint(format!("unsupported checkpoint {} v{}", self.format, self.version)));
        }
        if plan.n_sites() != self.n_sites
            || plan.max_bond() != self.max_bond
            || plan.dt().to_bits() != self.dt.to_bits()
            || plan.order() != self.order
        {
            return Err(ChainError::Checkpoint(format!(
                "plan (N={}, D={}, dt={}, order {}) differs from checkpoint (N={}, D={}, dt={}, order {})",
                plan.n_sites(),
                plan.max_bond(),
                plan.dt(),
                plan.order(),
                self.n_sites,
                self.max_bond,
                self.dt,
                self.order
            )));
        }
        let state = MpsMixedState::from_tensors(self.tensors, self.center)?;
        if state.n_sites() != self.n_sites {
            return Err(ChainError::Checkpoint("tensor count differs from n_sites".into()));
        }
        Ok(TebdEvolver::restore(plan, state, self.time, self.steps, self.truncation))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| ChainError::Checkpoint(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| ChainError::Checkpoint(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| ChainError::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| ChainError::Checkpoint(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }
}
