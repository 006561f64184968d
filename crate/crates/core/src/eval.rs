//! Monte-Carlo evaluation of the planner on random initial flocks.
//!
//! Each experiment draws a random flock, runs ARES on it and records a
//! Bernoulli success indicator `Z = [J <= phi]`. The number of experiments
//! comes from the additive Chernoff-Hoeffding bound
//! `N = ⌈4 ln(2/δ) / ε²⌉`, which makes the sample mean of `Z` an
//! (ε, δ)-approximation of the success probability.

use std::fmt;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{ares_plan_until, AresParams};
use crate::error::{Error, Result};
use crate::flock::{random_initial, FlockMdp, FlockParams};
use crate::par;
use crate::rng::experiment_seed;

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::invalid(format!("{name} must lie in (0, 1), got {x}")));
    }
    Ok(())
}

/// `⌈4 ln(2/δ) / ε²⌉`.
pub fn required_samples(epsilon: f64, delta: f64) -> Result<u64> {
    check_unit("epsilon", epsilon)?;
    check_unit("delta", delta)?;
    Ok((4.0 * (2.0 / delta).ln() / (epsilon * epsilon)).ceil() as u64)
}

/// The absolute error `N` samples buy at confidence `1 - δ`; the inverse
/// of [`required_samples`].
pub fn achievable_epsilon(samples: u64, delta: f64) -> Result<f64> {
    check_unit("delta", delta)?;
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    Ok((4.0 * (2.0 / delta).ln() / samples as f64).sqrt())
}

/// 1 iff `cost <= phi`.
pub fn success_indicator(cost: f64, phi: f64) -> u8 {
    u8::from(cost <= phi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalParams {
    pub epsilon: f64,
    pub delta: f64,
    /// Runs exactly this many experiments instead of the bound's `N`.
    pub samples: Option<u64>,
    pub birds: usize,
    pub flock: FlockParams,
    pub ares: AresParams,
    /// Wall-clock budget per experiment; `None` runs every plan to completion.
    pub budget: Option<Duration>,
    pub workers: usize,
    pub seed: u64,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            epsilon: 0.05,
            delta: 0.01,
            samples: None,
            birds: 7,
            flock: FlockParams::default(),
            ares: AresParams::default(),
            budget: Some(Duration::from_secs(120)),
            workers: 1,
            seed: 0,
        }
    }
}

impl EvalParams {
    pub fn validate(&self) -> Result<()> {
        check_unit("eval.epsilon", self.epsilon)?;
        check_unit("eval.delta", self.delta)?;
        if self.birds == 0 {
            return Err(Error::invalid("eval.birds must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::invalid("workers must be at least 1"));
        }
        self.flock.validate()?;
        self.ares.validate()
    }

    /// Number of experiments a run performs.
    pub fn sample_count(&self) -> Result<u64> {
        match self.samples {
            Some(n) => Ok(n),
            None => required_samples(self.epsilon, self.delta),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub index: u64,
    pub seed: u64,
    pub z: u8,
    pub cost: f64,
    pub time_s: f64,
    pub levels: usize,
    pub actions: usize,
    pub mean_h: f64,
    pub budget_exhausted: bool,
    /// Set when the experiment could not run at all (e.g. no valid spawn).
    pub error: Option<String>,
}

fn run_one(params: &EvalParams, mdp: &FlockMdp, index: u64) -> ExperimentRecord {
    let seed = experiment_seed(params.seed, index);
    let failed = |msg: String| ExperimentRecord {
        index,
        seed,
        z: 0,
        cost: f64::NAN,
        time_s: 0.0,
        levels: 0,
        actions: 0,
        mean_h: 0.0,
        budget_exhausted: false,
        error: Some(msg),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = match random_initial(&mut rng, params.birds, &params.flock) {
        Ok(c) => c,
        Err(e) => return failed(e.to_string()),
    };
    let began = Instant::now();
    let deadline = params.budget.map(|b| began + b);
    match ares_plan_until(mdp, &start, &params.ares, seed, deadline) {
        Ok(out) => ExperimentRecord {
            index,
            seed,
            z: success_indicator(out.final_cost, params.ares.phi),
            cost: out.final_cost,
            time_s: began.elapsed().as_secs_f64(),
            levels: out.levels.len(),
            actions: out.total_actions,
            mean_h: out.mean_horizon(),
            budget_exhausted: out.budget_exhausted,
            error: None,
        },
        Err(e) => failed(e.to_string()),
    }
}

/// Runs the batch on a pool of `params.workers` threads. Records come back
/// in index order and, budgets aside, do not depend on the worker count.
pub fn run_experiments(params: &EvalParams) -> Result<Vec<ExperimentRecord>> {
    params.validate()?;
    let n = params.sample_count()?;
    let mdp = FlockMdp::new(params.birds, params.flock.clone())?;
    Ok(par::with_workers(params.workers, || par::map_indexed(n as usize, |i| run_one(params, &mdp, i as u64))))
}

/// How the `time_s` column is written.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Timing {
    Include,
    /// Leaves the column empty, so files from different runs of the same
    /// batch compare byte for byte.
    Redact,
}

pub const RECORD_HEADER: [&str; 8] = ["index", "seed", "Z", "cost", "time_s", "levels", "actions", "mean_h"];

pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], out: W, timing: Timing) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        let time = match timing {
            Timing::Include => r.time_s.to_string(),
            Timing::Redact => String::new(),
        };
        w.write_record([
            r.index.to_string(),
            r.seed.to_string(),
            r.z.to_string(),
            r.cost.to_string(),
            time,
            r.levels.to_string(),
            r.actions.to_string(),
            r.mean_h.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub min: f64,
    pub max: f64,
    pub avg: f64,
    /// Sample standard deviation; absent below two values.
    pub std: Option<f64>,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let avg = values.iter().sum::<f64>() / n;
        let std =
            (values.len() >= 2).then(|| (values.iter().map(|v| (v - avg).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
        Some(Stats {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            avg,
            std,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    pub count: usize,
    pub cost: Option<Stats>,
    pub time_s: Option<Stats>,
    pub plan_length: Option<Stats>,
    pub mean_horizon: Option<Stats>,
}

impl Cohort {
    fn of<'a>(records: impl Iterator<Item = &'a ExperimentRecord>) -> Cohort {
        let rs: Vec<&ExperimentRecord> = records.collect();
        let col = |f: fn(&ExperimentRecord) -> f64| Stats::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
        Cohort {
            count: rs.len(),
            cost: col(|r| r.cost),
            time_s: col(|r| r.time_s),
            plan_length: col(|r| r.levels as f64),
            mean_horizon: col(|r| r.mean_h),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub experiments: usize,
    pub successes: usize,
    /// Sample mean of Z; absent for an empty batch.
    pub success_rate: Option<f64>,
    pub epsilon: f64,
    pub delta: f64,
    /// Sample size the bound asks for at (epsilon, delta).
    pub required_samples: u64,
    /// Error the batch actually run achieves at delta.
    pub achieved_epsilon: Option<f64>,
    /// Error obtained if every committed level of every plan is counted as
    /// an independent sample.
    pub per_state_epsilon: Option<f64>,
    pub budget_exhausted: usize,
    pub errors: usize,
    pub successful: Cohort,
    pub total: Cohort,
}

/// Cohort statistics of a batch. Records that never ran (spawn failure)
/// count towards the totals and the failure count but carry no metrics.
pub fn summarize(records: &[ExperimentRecord], epsilon: f64, delta: f64) -> Result<SummaryTable> {
    let required = required_samples(epsilon, delta)?;
    let ran: Vec<&ExperimentRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let successes = records.iter().filter(|r| r.z == 1).count();
    let n = records.len();
    let states: usize = ran.iter().map(|r| r.levels).sum();
    Ok(SummaryTable {
        experiments: n,
        successes,
        success_rate: (n > 0).then(|| successes as f64 / n as f64),
        epsilon,
        delta,
        required_samples: required,
        achieved_epsilon: (n > 0).then(|| achievable_epsilon(n as u64, delta)).transpose()?,
        per_state_epsilon: (states > 0).then(|| achievable_epsilon(states as u64, delta)).transpose()?,
        budget_exhausted: records.iter().filter(|r| r.budget_exhausted).count(),
        errors: n - ran.len(),
        successful: Cohort::of(ran.iter().copied().filter(|r| r.z == 1)),
        total: Cohort::of(ran.iter().copied()),
    })
}

fn cells(s: &Option<Stats>) -> [String; 4] {
    match s {
        None => ["-".into(), "-".into(), "-".into(), "-".into()],
        Some(s) => [
            format!("{:.4e}", s.min),
            format!("{:.4e}", s.max),
            format!("{:.4e}", s.avg),
            s.std.map_or("-".into(), |v| format!("{v:.4e}")),
        ],
    }
}

impl fmt::Display for SummaryTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16}{:^48}{:^48}", "", "SUCCESSFUL", "TOTAL")?;
        writeln!(f, "{:<16}{:^48}{:^48}", "No. Experiments", self.successful.count, self.total.count)?;
        write!(f, "{:<16}", "")?;
        for _ in 0..2 {
            for h in ["Min", "Max", "Avg", "Std"] {
                write!(f, "{h:>12}")?;
            }
        }
        writeln!(f)?;
        type Column = fn(&Cohort) -> &Option<Stats>;
        let rows: [(&str, Column); 4] = [
            ("Cost, J", |c| &c.cost),
            ("Time, s", |c| &c.time_s),
            ("Plan length", |c| &c.plan_length),
            ("RPH, h", |c| &c.mean_horizon),
        ];
        for (name, get) in rows {
            write!(f, "{name:<16}")?;
            for cell in cells(get(&self.successful)).iter().chain(&cells(get(&self.total))) {
                write!(f, "{cell:>12}")?;
            }
            writeln!(f)?;
        }
        match self.success_rate {
            Some(rate) => writeln!(
                f,
                "success rate {:.2}% ({} / {}), epsilon {} at delta {}; bound asks for N = {}",
                100.0 * rate,
                self.successes,
                self.experiments,
                self.achieved_epsilon.map_or("-".into(), |e| format!("{e:.4}")),
                self.delta,
                self.required_samples
            )?,
            None => writeln!(f, "no experiments run; bound asks for N = {}", self.required_samples)?,
        }
        if self.budget_exhausted > 0 || self.errors > 0 {
            writeln!(f, "budget exhausted: {}, errors: {}", self.budget_exhausted, self.errors)?;
        }
        Ok(())
    }
}
