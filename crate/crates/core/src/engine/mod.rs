//! The ARES planning loop.
//!
//! `n` clones of the MDP start at the initial state. At every level each
//! clone runs its own PSO over an `h`-step horizon. The level advances when
//! the best clone's cost drops below the previous level by more than that
//! clone's dynamic threshold; every clone then commits its best actions and
//! the worse half is replaced by copies of the better half. When no clone
//! advances, the horizon grows up to `h_max`, then the swarm grows by
//! `p_inc` particles up to `p_max`. Exhausting that schedule ends the run.
//!
//! Planning stops at the first level whose value is at most `phi`, or fails
//! once `m` levels have been attempted.

mod level;
mod resample;
mod simulate;

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{extract_plan, Mdp, Plan, TrajectoryNode};
use crate::pso::PsoParams;
use crate::rng::{clone_seed_stream, RESAMPLE_STREAM};

pub use level::{dynamic_threshold, next_level_check, Schedule};
pub use resample::{resample, successful_set};
pub use simulate::{simulate, Continuation, StreamKey};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AresParams {
    /// Success threshold on the cost.
    pub phi: f64,
    /// Maximum number of levels.
    pub m: usize,
    /// Number of clones.
    pub n: usize,
    pub h_max: usize,
    pub p_start: usize,
    pub p_inc: usize,
    pub p_max: usize,
    /// Optimiser settings; `particles` is overridden by the schedule.
    pub pso: PsoParams,
}

impl Default for AresParams {
    fn default() -> Self {
        AresParams { phi: 1e-3, m: 20, n: 20, h_max: 5, p_start: 10, p_inc: 5, p_max: 40, pso: PsoParams::default() }
    }
}

impl AresParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi.is_finite() && self.phi > 0.0) {
            return Err(Error::invalid(format!("ares.phi must be positive, got {}", self.phi)));
        }
        if self.m == 0 || self.n == 0 || self.h_max == 0 {
            return Err(Error::invalid("ares.m, ares.n and ares.h_max must be at least 1"));
        }
        if self.p_start < 2 || self.p_start > self.p_max {
            return Err(Error::invalid("ares particle schedule needs 2 <= p_start <= p_max"));
        }
        if self.p_inc == 0 {
            return Err(Error::invalid("ares.p_inc must be at least 1"));
        }
        PsoParams { particles: self.p_start, ..self.pso.clone() }.validate()
    }
}

/// One of the `n` MDP copies.
#[derive(Debug)]
pub struct CloneState<S> {
    pub id: usize,
    /// History head; holds the current state and its cost.
    pub node: Arc<TrajectoryNode<S>>,
    /// Cost when the current level was entered.
    pub prev_cost: f64,
}

// Derived `Clone` would require `S: Clone` only through the Arc, which it
// does not need.
impl<S> Clone for CloneState<S> {
    fn clone(&self) -> Self {
        CloneState { id: self.id, node: Arc::clone(&self.node), prev_cost: self.prev_cost }
    }
}

impl<S> CloneState<S> {
    pub fn state(&self) -> &S {
        self.node.state()
    }

    pub fn cost(&self) -> f64 {
        self.node.cost()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    /// Level value left behind, `ℓ_{i-1}`.
    pub previous: f64,
    /// New level value `ℓ_i`, the best clone cost.
    pub value: f64,
    /// Threshold of the best clone.
    pub delta: f64,
    pub horizon: usize,
    pub particles: usize,
    /// Clone costs after Simulate, by clone id.
    pub clone_costs: Vec<f64>,
    /// Time since planning started.
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct AresOutcome<S> {
    pub success: bool,
    /// Present iff `success`.
    pub plan: Option<Plan<S>>,
    pub levels: Vec<LevelRecord>,
    pub wall_time: Duration,
    /// State of the minimum-cost clone when the run ended.
    pub final_state: S,
    pub final_cost: f64,
    /// Actions on the best clone's history.
    pub total_actions: usize,
    /// Set when a deadline stopped the run before it could finish.
    pub budget_exhausted: bool,
}

impl<S> AresOutcome<S> {
    /// Mean horizon over committed levels; 0 when none were committed.
    pub fn mean_horizon(&self) -> f64 {
        if self.levels.is_empty() {
            0.0
        } else {
            self.levels.iter().map(|l| l.horizon as f64).sum::<f64>() / self.levels.len() as f64
        }
    }
}

/// Runs ARES from `s0`. All randomness derives from `seed`.
pub fn ares_plan<M: Mdp>(mdp: &M, s0: &M::State, params: &AresParams, seed: u64) -> Result<AresOutcome<M::State>> {
    ares_plan_until(mdp, s0, params, seed, None)
}

/// [`ares_plan`] with an optional wall-clock deadline, checked before every
/// Simulate call. Hitting it ends the run as a failure flagged
/// `budget_exhausted`.
pub fn ares_plan_until<M: Mdp>(
    mdp: &M,
    s0: &M::State,
    params: &AresParams,
    seed: u64,
    deadline: Option<Instant>,
) -> Result<AresOutcome<M::State>> {
    params.validate()?;
    let started = Instant::now();
    let initial_cost = mdp.cost(s0)?;
    if !initial_cost.is_finite() || initial_cost < 0.0 {
        return Err(Error::invalid(format!("initial cost must be finite and non-negative, got {initial_cost}")));
    }
    let root = TrajectoryNode::root(s0.clone(), initial_cost);
    let mut clones: Vec<CloneState<M::State>> =
        (0..params.n).map(|id| CloneState { id, node: Arc::clone(&root), prev_cost: initial_cost }).collect();

    let mut levels = Vec::new();
    let mut level_value = initial_cost;
    let mut schedule = Schedule::new(params.h_max, params.p_start, params.p_inc, params.p_max);
    let mut level = 1;
    let mut attempt = 0u64;
    let mut budget_exhausted = false;
    let mut reached = level_value <= params.phi;

    while !reached && level <= params.m {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            budget_exhausted = true;
            break;
        }
        let starts: Vec<&M::State> = clones.iter().map(|c| c.state()).collect();
        let key = StreamKey { seed, level: level as u64, attempt };
        let found = simulate(mdp, &starts, schedule.horizon, schedule.particles, &params.pso, key)?;
        let costs: Vec<f64> = found.iter().map(|c| c.cost).collect();
        let best = successful_set(&costs)[0];
        let delta = dynamic_threshold(clones[best].prev_cost, params.m, level)?;

        if next_level_check(level_value, costs[best], delta) {
            levels.push(LevelRecord {
                level,
                previous: level_value,
                value: costs[best],
                delta,
                horizon: schedule.horizon,
                particles: schedule.particles,
                clone_costs: costs.clone(),
                elapsed: started.elapsed(),
            });
            let advanced: Vec<CloneState<M::State>> = clones
                .iter()
                .zip(found)
                .map(|(c, cont)| CloneState {
                    id: c.id,
                    node: c.node.advance(cont.actions, cont.state, cont.cost, level),
                    prev_cost: cont.cost,
                })
                .collect();
            let mut rng = clone_seed_stream(seed, RESAMPLE_STREAM, level as u64, attempt);
            clones = resample(&advanced, &costs, &mut rng)?
                .into_iter()
                .enumerate()
                .map(|(id, c)| CloneState { id, ..c })
                .collect();
            level_value = costs[best];
            reached = level_value <= params.phi;
            level += 1;
            attempt = 0;
            schedule.reset();
        } else {
            attempt += 1;
            if !schedule.advance() {
                break;
            }
        }
    }

    let best =
        clones.iter().min_by(|a, b| a.cost().total_cmp(&b.cost()).then(a.id.cmp(&b.id))).expect("at least one clone");
    let plan = if reached { Some(extract_plan(&best.node)?) } else { None };
    Ok(AresOutcome {
        success: reached,
        plan,
        levels,
        wall_time: started.elapsed(),
        final_state: best.state().clone(),
        final_cost: best.cost(),
        total_actions: best.node.total_actions(),
        budget_exhausted,
    })
}

/// Writes the level log as `level,ell,delta1,h,p,best_cost,wall_ms` rows,
/// where `ell` is the level value being left and `best_cost` the new one.
pub fn write_level_log<W: Write>(levels: &[LevelRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["level", "ell", "delta1", "h", "p", "best_cost", "wall_ms"])?;
    for l in levels {
        w.write_record([
            l.level.to_string(),
            l.previous.to_string(),
            l.delta.to_string(),
            l.horizon.to_string(),
            l.particles.to_string(),
            l.value.to_string(),
            format!("{:.3}", l.elapsed.as_secs_f64() * 1e3),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::Integrator1d;

    fn integrator_params() -> AresParams {
        AresParams { phi: 1e-3, m: 20, n: 5, h_max: 3, ..Default::default() }
    }

    #[test]
    fn integrator_from_three() {
        let out = ares_plan(&Integrator1d, &3.0, &integrator_params(), 1).unwrap();
        assert!(out.success);
        let plan = out.plan.as_ref().unwrap();
        let (x, cost) = plan.replay(&Integrator1d).unwrap();
        assert!(x.abs() <= 1e-3);
        assert_eq!(cost, plan.final_cost);
        assert_eq!(cost, out.final_cost);
        assert!((3..=20 * 3).contains(&plan.total_actions()));
        assert_eq!(plan.levels.len(), out.levels.len());
        assert_eq!(out.total_actions, plan.total_actions());
    }

    #[test]
    fn already_below_threshold() {
        let out = ares_plan(&Integrator1d, &0.0005, &integrator_params(), 0).unwrap();
        assert!(out.success);
        assert!(out.levels.is_empty());
        assert_eq!(out.mean_horizon(), 0.0);
        assert!(out.plan.unwrap().levels.is_empty());
    }

    struct Stuck;
    impl Mdp for Stuck {
        type State = f64;
        fn action_dim(&self) -> usize {
            1
        }
        fn action_bounds(&self) -> Vec<(f64, f64)> {
            vec![(-1.0, 1.0)]
        }
        fn step(&self, s: &f64, a: &[f64]) -> Result<f64> {
            Ok(s + a[0])
        }
        fn cost(&self, _: &f64) -> Result<f64> {
            Ok(1.0)
        }
    }

    #[test]
    fn unreachable_threshold_fails_after_schedule() {
        let params = AresParams {
            phi: 0.5,
            m: 5,
            n: 3,
            h_max: 2,
            p_start: 4,
            p_inc: 2,
            p_max: 6,
            pso: PsoParams { max_iterations: 5, ..Default::default() },
        };
        let out = ares_plan(&Stuck, &0.0, &params, 3).unwrap();
        assert!(!out.success);
        assert!(out.plan.is_none());
        assert!(out.levels.is_empty());
        assert!(!out.budget_exhausted);
        assert_eq!(out.final_cost, 1.0);
    }

    #[test]
    fn expired_deadline_is_flagged() {
        let past = Instant::now();
        let out = ares_plan_until(&Integrator1d, &3.0, &integrator_params(), 0, Some(past)).unwrap();
        assert!(!out.success && out.budget_exhausted);
        assert_eq!(out.final_cost, 3.0);
    }

    #[test]
    fn same_seed_same_outcome() {
        let a = ares_plan(&Integrator1d, &3.0, &integrator_params(), 42).unwrap();
        let b = ares_plan(&Integrator1d, &3.0, &integrator_params(), 42).unwrap();
        assert_eq!(a.plan, b.plan);
        assert_eq!(a.final_cost.to_bits(), b.final_cost.to_bits());
    }

    #[test]
    fn level_log_rows() {
        let out = ares_plan(&Integrator1d, &3.0, &integrator_params(), 2).unwrap();
        let mut buf = Vec::new();
        write_level_log(&out.levels, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("level,ell,delta1,h,p,best_cost,wall_ms"));
        assert_eq!(lines.count(), out.levels.len());
    }

    #[test]
    fn invalid_params_rejected() {
        let bad = AresParams { p_start: 50, ..Default::default() };
        assert!(ares_plan(&Integrator1d, &3.0, &bad, 0).is_err());
        let bad = AresParams { phi: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
