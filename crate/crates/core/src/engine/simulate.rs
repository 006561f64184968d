use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::par;
use crate::pso::{self, PsoParams};
use crate::rng::clone_seed_stream;

/// Best `h`-step continuation found for one clone.
#[derive(Clone, Debug)]
pub struct Continuation<S> {
    /// Actions as applied by the MDP (after any feasibility projection).
    pub actions: Vec<Vec<f64>>,
    pub cost: f64,
    pub state: S,
}

/// Identifies the random stream of one Simulate call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub level: u64,
    pub attempt: u64,
}

/// Runs one PSO per start state over the `horizon`-step action space and
/// returns each clone's best continuation, in input order.
///
/// A particle is the concatenation of `horizon` actions. Nothing is
/// committed: callers decide whether the continuations become history.
pub fn simulate<M: Mdp>(
    mdp: &M,
    starts: &[&M::State],
    horizon: usize,
    particles: usize,
    pso_params: &PsoParams,
    key: StreamKey,
) -> Result<Vec<Continuation<M::State>>> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let params = PsoParams { particles, ..pso_params.clone() };
    params.validate()?;
    let dim = mdp.action_dim();
    let step_bounds = mdp.action_bounds();
    if step_bounds.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: step_bounds.len() });
    }
    let bounds: Vec<(f64, f64)> = step_bounds.iter().copied().cycle().take(dim * horizon).collect();

    let results = par::map_indexed(starts.len(), |k| {
        let start = starts[k];
        let objective = |x: &[f64]| -> f64 {
            let mut steps = x.chunks_exact(dim);
            let first = steps.next().expect("horizon is at least 1");
            let Ok(mut state) = mdp.step(start, first) else {
                return f64::NAN;
            };
            for a in steps {
                match mdp.step(&state, a) {
                    Ok(s) => state = s,
                    Err(_) => return f64::NAN,
                }
            }
            mdp.cost(&state).unwrap_or(f64::NAN)
        };
        let mut rng = clone_seed_stream(key.seed, k as u64, key.level, key.attempt);
        let best = pso::optimize(objective, &bounds, &params, &mut rng)
            .map_err(|e| Error::Clone { clone: k, source: Box::new(e) })?;
        let mut state = start.clone();
        let mut actions = Vec::with_capacity(horizon);
        for a in best.best_position.chunks_exact(dim) {
            actions.push(mdp.feasible_action(&state, a));
            state = mdp.step(&state, a)?;
        }
        let cost = mdp.cost(&state)?;
        Ok(Continuation { actions, cost, state })
    });
    results.into_iter().collect()
}
