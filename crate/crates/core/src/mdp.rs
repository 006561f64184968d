//! Deterministic MDP contract, rollouts and plan backtracking.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A deterministic Markov decision process with a state-only cost.
///
/// Actions are flat `f64` vectors of length [`Mdp::action_dim`]. `step` and
/// `cost` must be pure: the planner evaluates them from many threads and
/// relies on bit-identical results for identical inputs.
pub trait Mdp: Sync {
    type State: Clone + Send + Sync + fmt::Debug;

    fn action_dim(&self) -> usize;

    /// Box from which the optimiser draws each action coordinate.
    fn action_bounds(&self) -> Vec<(f64, f64)>;

    fn step(&self, state: &Self::State, action: &[f64]) -> Result<Self::State>;

    fn cost(&self, state: &Self::State) -> Result<f64>;

    /// The action `step` actually applies at `state`.
    ///
    /// MDPs with state-dependent action constraints project here; plans
    /// record the projected action so they read as feasible sequences.
    fn feasible_action(&self, _state: &Self::State, action: &[f64]) -> Vec<f64> {
        action.to_vec()
    }
}

fn check_dim(expected: usize, action: &[f64]) -> Result<()> {
    if action.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: action.len() });
    }
    Ok(())
}

/// Applies `actions` in order starting from `state`.
pub fn rollout<M, I, A>(mdp: &M, state: &M::State, actions: I) -> Result<M::State>
where
    M: Mdp + ?Sized,
    I: IntoIterator<Item = A>,
    A: AsRef<[f64]>,
{
    let dim = mdp.action_dim();
    let mut current = state.clone();
    for action in actions {
        let action = action.as_ref();
        check_dim(dim, action)?;
        current = mdp.step(&current, action)?;
    }
    Ok(current)
}

/// One node of a clone's trajectory history.
///
/// Nodes are immutable and linked to their predecessor through an `Arc`, so
/// copying a clone's history during resampling is a pointer copy.
#[derive(Debug)]
pub struct TrajectoryNode<S> {
    state: S,
    cost: f64,
    level: usize,
    incoming: Option<Incoming<S>>,
}

#[derive(Debug)]
struct Incoming<S> {
    predecessor: Arc<TrajectoryNode<S>>,
    block: Vec<Vec<f64>>,
}

impl<S> TrajectoryNode<S> {
    pub fn root(state: S, cost: f64) -> Arc<Self> {
        Arc::new(TrajectoryNode { state, cost, level: 0, incoming: None })
    }

    /// Appends a node reached from `self` by the action block `block`,
    /// committed at `level`.
    pub fn advance(self: &Arc<Self>, block: Vec<Vec<f64>>, state: S, cost: f64, level: usize) -> Arc<Self> {
        Arc::new(TrajectoryNode {
            state,
            cost,
            level,
            incoming: Some(Incoming { predecessor: Arc::clone(self), block }),
        })
    }

    pub fn state(&self) -> &S {
        &self.state
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn is_root(&self) -> bool {
        self.incoming.is_none()
    }

    pub fn predecessor(&self) -> Option<&Arc<TrajectoryNode<S>>> {
        self.incoming.as_ref().map(|inc| &inc.predecessor)
    }

    pub fn incoming_block(&self) -> Option<&[Vec<f64>]> {
        self.incoming.as_ref().map(|inc| inc.block.as_slice())
    }

    /// Number of actions on the path from the root to this node.
    pub fn total_actions(&self) -> usize {
        let mut total = 0;
        let mut node = self;
        while let Some(inc) = &node.incoming {
            total += inc.block.len();
            node = &inc.predecessor;
        }
        total
    }
}

/// Actions committed at one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanLevel {
    pub horizon: usize,
    pub actions: Vec<Vec<f64>>,
}

/// A backtracked action history from an initial state to a final state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plan<S> {
    pub initial_state: S,
    pub levels: Vec<PlanLevel>,
    pub final_state: S,
    pub final_cost: f64,
}

impl<S: Clone> Plan<S> {
    pub fn total_actions(&self) -> usize {
        self.levels.iter().map(|l| l.actions.len()).sum()
    }

    pub fn actions(&self) -> impl Iterator<Item = &[f64]> {
        self.levels.iter().flat_map(|l| l.actions.iter().map(Vec::as_slice))
    }

    /// Replays every action from the initial state and returns the reached
    /// state and its cost.
    pub fn replay<M>(&self, mdp: &M) -> Result<(S, f64)>
    where
        M: Mdp<State = S> + ?Sized,
    {
        let end = rollout(mdp, &self.initial_state, self.actions())?;
        let cost = mdp.cost(&end)?;
        Ok((end, cost))
    }

    /// States at every level boundary, starting with the initial state.
    pub fn level_states<M>(&self, mdp: &M) -> Result<Vec<S>>
    where
        M: Mdp<State = S> + ?Sized,
    {
        let mut states = vec![self.initial_state.clone()];
        for level in &self.levels {
            let next = rollout(mdp, states.last().expect("non-empty"), &level.actions)?;
            states.push(next);
        }
        Ok(states)
    }
}

/// Walks predecessor links back from `last` and returns the plan in
/// root-to-final order, one [`PlanLevel`] per committed block.
pub fn extract_plan<S: Clone>(last: &TrajectoryNode<S>) -> Result<Plan<S>> {
    let mut blocks = Vec::new();
    let mut node = last;
    while let Some(inc) = &node.incoming {
        let pred = &inc.predecessor;
        // Levels strictly increase along a history, so a repeated or rising
        // level means the chain was stitched together incorrectly.
        if pred.level >= node.level {
            return Err(Error::CorruptHistory(format!(
                "predecessor level {} is not below level {}",
                pred.level, node.level
            )));
        }
        if inc.block.is_empty() {
            return Err(Error::CorruptHistory(format!("empty action block at level {}", node.level)));
        }
        blocks.push(PlanLevel { horizon: inc.block.len(), actions: inc.block.clone() });
        node = pred;
    }
    blocks.reverse();
    Ok(Plan {
        initial_state: node.state.clone(),
        levels: blocks,
        final_state: last.state.clone(),
        final_cost: last.cost,
    })
}

/// The scalar integrator `x' = x + a` with `a ∈ [-1, 1]` and cost `|x|`.
///
/// Small enough to brute-force, so it serves as the reference problem for
/// the planner and optimiser tests.
#[derive(Clone, Copy, Debug, Default)]
pub struct Integrator1d;

impl Mdp for Integrator1d {
    type State = f64;

    fn action_dim(&self) -> usize {
        1
    }

    fn action_bounds(&self) -> Vec<(f64, f64)> {
        vec![(-1.0, 1.0)]
    }

    fn step(&self, state: &f64, action: &[f64]) -> Result<f64> {
        check_dim(1, action)?;
        Ok(state + action[0])
    }

    fn cost(&self, state: &f64) -> Result<f64> {
        Ok(state.abs())
    }
}
