//! Plan files and parameter digests.
//!
//! A plan file is a JSON document:
//!
//! ```json
//! {
//!   "initial_state": { ... },
//!   "levels": [ { "horizon": 2, "actions": [[ax, ay, ...], [ax, ay, ...]] } ],
//!   "final_state": { ... },
//!   "final_cost": 0.00042,
//!   "seed": 42,
//!   "params_digest": "…"
//! }
//! ```
//!
//! Each action is the flat action vector of one step (for a flock,
//! `[a1x, a1y, a2x, a2y, ...]`). Floats are written in shortest round-trip
//! decimal, so parsing a file back yields the exact doubles.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::mdp::{Plan, PlanLevel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanFile<S> {
    pub initial_state: S,
    pub levels: Vec<PlanLevel>,
    pub final_state: S,
    pub final_cost: f64,
    pub seed: u64,
    pub params_digest: String,
}

impl<S: Clone> PlanFile<S> {
    pub fn new(plan: Plan<S>, seed: u64, params_digest: String) -> Self {
        PlanFile {
            initial_state: plan.initial_state,
            levels: plan.levels,
            final_state: plan.final_state,
            final_cost: plan.final_cost,
            seed,
            params_digest,
        }
    }

    pub fn plan(&self) -> Plan<S> {
        Plan {
            initial_state: self.initial_state.clone(),
            levels: self.levels.clone(),
            final_state: self.final_state.clone(),
            final_cost: self.final_cost,
        }
    }
}

impl<S: Serialize + DeserializeOwned> PlanFile<S> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Hex SHA-256 of the compact JSON encoding of `params`.
///
/// Field order is fixed by the struct definitions, so equal parameter sets
/// always hash equally.
pub fn params_digest<T: Serialize + ?Sized>(params: &T) -> Result<String> {
    let bytes = serde_json::to_vec(params)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}
