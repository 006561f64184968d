//! Run configuration: defaults, then a JSON file of flat dotted keys, then
//! command-line overrides, each layer replacing the one before.

use std::path::Path;
use std::time::Duration;

use ares::engine::AresParams;
use ares::eval::EvalParams;
use ares::flock::FlockParams;
use serde::Serialize;
use serde_json::{Map, Value};

/// Everything a subcommand can be configured with.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub birds: usize,
    pub flock: FlockParams,
    pub ares: AresParams,
    pub epsilon: f64,
    pub delta: f64,
    pub samples: Option<u64>,
    /// Per-experiment wall-clock budget in seconds; 0 disables it.
    pub budget_s: f64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let eval = EvalParams::default();
        RunConfig {
            birds: eval.birds,
            flock: eval.flock,
            ares: eval.ares,
            epsilon: eval.epsilon,
            delta: eval.delta,
            samples: eval.samples,
            budget_s: eval.budget.map_or(0.0, |b| b.as_secs_f64()),
            seed: eval.seed,
            workers: 1,
        }
    }
}

/// Every key accepted in a config file or by `--set`.
#[cfg(test)]
const KEYS: &[&str] = &[
    "birds",
    "seed",
    "workers",
    "flock.v_max",
    "flock.rho",
    "flock.d_min",
    "flock.theta",
    "flock.wingspan",
    "flock.upwash_lateral_offset",
    "flock.upwash_lateral_width",
    "flock.upwash_longitudinal_width",
    "flock.downwash_weight",
    "ares.phi",
    "ares.m",
    "ares.n",
    "ares.h_max",
    "ares.p_start",
    "ares.p_inc",
    "ares.p_max",
    "pso.inertia_min",
    "pso.inertia_max",
    "pso.self_adjustment",
    "pso.social_adjustment",
    "pso.max_iterations",
    "pso.stall_iterations",
    "pso.min_neighborhood_fraction",
    "eval.epsilon",
    "eval.delta",
    "eval.samples",
    "eval.budget_s",
];

fn float(key: &str, v: &Value) -> Result<f64, String> {
    v.as_f64().ok_or_else(|| format!("{key}: expected a number, got {v}"))
}

fn uint(key: &str, v: &Value) -> Result<u64, String> {
    v.as_u64().ok_or_else(|| format!("{key}: expected a non-negative integer, got {v}"))
}

fn size(key: &str, v: &Value) -> Result<usize, String> {
    usize::try_from(uint(key, v)?).map_err(|_| format!("{key}: value too large"))
}

impl RunConfig {
    /// Sets one dotted key.
    pub fn set(&mut self, key: &str, v: &Value) -> Result<(), String> {
        let (f, a) = (&mut self.flock, &mut self.ares);
        match key {
            "birds" => self.birds = size(key, v)?,
            "seed" => self.seed = uint(key, v)?,
            "workers" => self.workers = size(key, v)?,
            "flock.v_max" => f.v_max = float(key, v)?,
            "flock.rho" => f.rho = float(key, v)?,
            "flock.d_min" => f.d_min = float(key, v)?,
            "flock.theta" => f.theta = float(key, v)?,
            "flock.wingspan" => f.wingspan = float(key, v)?,
            "flock.upwash_lateral_offset" => f.upwash_lateral_offset = float(key, v)?,
            "flock.upwash_lateral_width" => f.upwash_lateral_width = float(key, v)?,
            "flock.upwash_longitudinal_width" => f.upwash_longitudinal_width = float(key, v)?,
            "flock.downwash_weight" => f.downwash_weight = float(key, v)?,
            "ares.phi" => a.phi = float(key, v)?,
            "ares.m" => a.m = size(key, v)?,
            "ares.n" => a.n = size(key, v)?,
            "ares.h_max" => a.h_max = size(key, v)?,
            "ares.p_start" => a.p_start = size(key, v)?,
            "ares.p_inc" => a.p_inc = size(key, v)?,
            "ares.p_max" => a.p_max = size(key, v)?,
            "pso.inertia_min" => a.pso.inertia_min = float(key, v)?,
            "pso.inertia_max" => a.pso.inertia_max = float(key, v)?,
            "pso.self_adjustment" => a.pso.self_adjustment = float(key, v)?,
            "pso.social_adjustment" => a.pso.social_adjustment = float(key, v)?,
            "pso.max_iterations" => a.pso.max_iterations = size(key, v)?,
            "pso.stall_iterations" => a.pso.stall_iterations = size(key, v)?,
            "pso.min_neighborhood_fraction" => a.pso.min_neighborhood_fraction = float(key, v)?,
            "eval.epsilon" => self.epsilon = float(key, v)?,
            "eval.delta" => self.delta = float(key, v)?,
            "eval.samples" => self.samples = if v.is_null() { None } else { Some(uint(key, v)?) },
            "eval.budget_s" => self.budget_s = float(key, v)?,
            _ => return Err(format!("unknown config key `{key}`")),
        }
        Ok(())
    }

    pub fn apply_object(&mut self, obj: &Map<String, Value>) -> Result<(), String> {
        obj.iter().try_for_each(|(k, v)| self.set(k, v))
    }

    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let value: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let Value::Object(obj) = value else {
            return Err(format!("{}: expected a JSON object of dotted keys", path.display()));
        };
        let mut config = RunConfig::default();
        config.apply_object(&obj)?;
        Ok(config)
    }

    /// Applies a `key=value` override; the value is read as JSON.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<(), String> {
        let (key, raw) = assignment.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got `{assignment}`"))?;
        let value: Value = serde_json::from_str(raw).map_err(|e| format!("{key}: {e}"))?;
        self.set(key.trim(), &value)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.eval_params().validate().map_err(|e| e.to_string())?;
        if !(self.budget_s.is_finite() && self.budget_s >= 0.0) {
            return Err(format!("eval.budget_s must be a non-negative number of seconds, got {}", self.budget_s));
        }
        Ok(())
    }

    pub fn eval_params(&self) -> EvalParams {
        EvalParams {
            epsilon: self.epsilon,
            delta: self.delta,
            samples: self.samples,
            birds: self.birds,
            flock: self.flock.clone(),
            ares: self.ares.clone(),
            budget: (self.budget_s > 0.0).then(|| Duration::from_secs_f64(self.budget_s)),
            workers: self.workers,
            seed: self.seed,
        }
    }

    /// Digest of the parameters that determine a plan's dynamics and cost.
    pub fn digest(&self) -> Result<String, String> {
        #[derive(Serialize)]
        struct Physics<'a> {
            birds: usize,
            flock: &'a FlockParams,
            ares: &'a AresParams,
        }
        ares::io::params_digest(&Physics { birds: self.birds, flock: &self.flock, ares: &self.ares })
            .map_err(|e| e.to_string())
    }
}
