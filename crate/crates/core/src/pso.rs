//! Particle swarm optimisation over a box.
//!
//! Each particle is attracted towards its own best position and towards the
//! best personal best within a random neighbourhood fixed at start-up. The
//! inertia weight starts high and decays while the swarm stalls.

use std::io::Write;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Global-best improvements at or below this count as a stall.
pub const STALL_TOLERANCE: f64 = 1e-9;

/// Multiplier applied to the inertia weight after a stalled iteration.
pub const INERTIA_DECAY: f64 = 0.97;

/// Swarms at least this large evaluate their particles through [`par`].
const PARALLEL_EVAL_PARTICLES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsoParams {
    pub particles: usize,
    pub inertia_min: f64,
    pub inertia_max: f64,
    pub self_adjustment: f64,
    pub social_adjustment: f64,
    pub max_iterations: usize,
    pub stall_iterations: usize,
    /// Lower bound on a neighbourhood's size as a fraction of the swarm.
    pub min_neighborhood_fraction: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            particles: 20,
            inertia_min: 0.1,
            inertia_max: 1.1,
            self_adjustment: 1.49,
            social_adjustment: 1.49,
            max_iterations: 200,
            stall_iterations: 20,
            min_neighborhood_fraction: 0.25,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        if self.particles < 2 {
            return Err(Error::invalid(format!("pso needs at least 2 particles, got {}", self.particles)));
        }
        if !(self.self_adjustment >= 0.0 && self.social_adjustment >= 0.0) {
            return Err(Error::invalid("pso adjustment weights must be non-negative"));
        }
        if !(self.inertia_min > 0.0 && self.inertia_min <= self.inertia_max && self.inertia_max.is_finite()) {
            return Err(Error::invalid("pso inertia range must satisfy 0 < min <= max"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("pso max_iterations must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.min_neighborhood_fraction) {
            return Err(Error::invalid("pso min_neighborhood_fraction must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_cost: f64,
    pub neighborhood: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Swarm {
    pub particles: Vec<Particle>,
    pub bounds: Vec<(f64, f64)>,
}

fn check_bounds(bounds: &[(f64, f64)]) -> Result<()> {
    if bounds.is_empty() {
        return Err(Error::invalid("search space needs at least one dimension"));
    }
    for (d, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("bound {d} = [{lo}, {hi}] must satisfy lo < hi")));
        }
    }
    Ok(())
}

/// Places `params.particles` particles uniformly in `bounds` with
/// velocities uniform in `±(hi - lo)`, and gives each a random neighbourhood.
///
/// Personal bests start at the initial positions with cost `+∞` until the
/// first evaluation.
pub fn init_swarm<R: Rng + ?Sized>(rng: &mut R, bounds: &[(f64, f64)], params: &PsoParams) -> Result<Swarm> {
    check_bounds(bounds)?;
    params.validate()?;
    let p = params.particles;
    let min_k = ((params.min_neighborhood_fraction * p as f64).ceil() as usize).clamp(2, p);
    let particles = (0..p)
        .map(|j| {
            let position: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect();
            let velocity = bounds
                .iter()
                .map(|&(lo, hi)| {
                    let w = hi - lo;
                    rng.gen_range(-w..=w)
                })
                .collect();
            // The particle itself plus k - 1 others drawn without replacement.
            let k = rng.gen_range(min_k..=p);
            let mut neighborhood: Vec<usize> =
                sample(rng, p - 1, k - 1).into_iter().map(|o| if o >= j { o + 1 } else { o }).collect();
            neighborhood.push(j);
            neighborhood.sort_unstable();
            Particle { best_position: position.clone(), position, velocity, best_cost: f64::INFINITY, neighborhood }
        })
        .collect();
    Ok(Swarm { particles, bounds: bounds.to_vec() })
}

/// One velocity-and-position update.
///
/// `v' = ω v + y1 u1 ⊗ (x_P - x) + y2 u2 ⊗ (x_G - x)` and `x' = x + v'`
/// clipped to the box; clipped coordinates have their velocity zeroed.
/// The personal best is left for the caller to refresh after evaluation.
pub fn update_particle(
    particle: &Particle,
    x_g: &[f64],
    u1: &[f64],
    u2: &[f64],
    inertia: f64,
    params: &PsoParams,
    bounds: &[(f64, f64)],
) -> Particle {
    let mut next = particle.clone();
    move_particle(&mut next, x_g, u1, u2, inertia, params, bounds);
    next
}

fn move_particle(
    p: &mut Particle,
    x_g: &[f64],
    u1: &[f64],
    u2: &[f64],
    inertia: f64,
    params: &PsoParams,
    bounds: &[(f64, f64)],
) {
    for d in 0..p.position.len() {
        let x = p.position[d];
        let v = inertia * p.velocity[d]
            + params.self_adjustment * u1[d] * (p.best_position[d] - x)
            + params.social_adjustment * u2[d] * (x_g[d] - x);
        let (lo, hi) = bounds[d];
        let moved = x + v;
        if moved < lo || moved > hi {
            p.position[d] = moved.clamp(lo, hi);
            p.velocity[d] = 0.0;
        } else {
            p.position[d] = moved;
            p.velocity[d] = v;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsoOutcome {
    pub best_position: Vec<f64>,
    pub best_cost: f64,
    pub iterations: usize,
    /// Global-best cost after initialisation and after every iteration.
    pub trace: Vec<f64>,
}

fn evaluate<F>(objective: &F, positions: &[&[f64]]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let costs = if positions.len() >= PARALLEL_EVAL_PARTICLES {
        par::map_slice(positions, |x| objective(x))
    } else {
        positions.iter().map(|x| objective(x)).collect()
    };
    for (x, &c) in positions.iter().zip(&costs) {
        if !c.is_finite() {
            return Err(Error::NonFiniteObjective { value: c, position: x.to_vec() });
        }
    }
    Ok(costs)
}

fn argmin(costs: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, c) in costs.enumerate() {
        if c < best.1 {
            best = (i, c);
        }
    }
    best.0
}

/// Minimises `objective` over `bounds`.
///
/// Runs until `max_iterations` updates, or until `stall_iterations`
/// consecutive updates improve the global best by no more than
/// [`STALL_TOLERANCE`]. Returns the best position ever evaluated.
pub fn optimize<F, R>(objective: F, bounds: &[(f64, f64)], params: &PsoParams, rng: &mut R) -> Result<PsoOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
    R: Rng + ?Sized,
{
    let mut swarm = init_swarm(rng, bounds, params)?;
    let dim = bounds.len();
    let positions: Vec<&[f64]> = swarm.particles.iter().map(|p| p.position.as_slice()).collect();
    let costs = evaluate(&objective, &positions)?;
    for (p, c) in swarm.particles.iter_mut().zip(costs) {
        p.best_cost = c;
    }
    let first = argmin(swarm.particles.iter().map(|p| p.best_cost));
    let mut best_position = swarm.particles[first].best_position.clone();
    let mut best_cost = swarm.particles[first].best_cost;
    let mut trace = vec![best_cost];

    let mut inertia = params.inertia_max;
    let mut stall = 0;
    let mut iterations = 0;
    let mut u1 = vec![0.0; dim];
    let mut u2 = vec![0.0; dim];
    let mut x_g = vec![0.0; dim];
    while iterations < params.max_iterations {
        iterations += 1;
        let social: Vec<usize> = swarm
            .particles
            .iter()
            .map(|p| {
                let local = argmin(p.neighborhood.iter().map(|&k| swarm.particles[k].best_cost));
                p.neighborhood[local]
            })
            .collect();
        // Personal bests only change after evaluation, so every particle
        // moves against the same snapshot of them.
        for (j, &g) in social.iter().enumerate() {
            u1.iter_mut().for_each(|u| *u = rng.gen::<f64>());
            u2.iter_mut().for_each(|u| *u = rng.gen::<f64>());
            x_g.copy_from_slice(&swarm.particles[g].best_position);
            move_particle(&mut swarm.particles[j], &x_g, &u1, &u2, inertia, params, bounds);
        }
        let positions: Vec<&[f64]> = swarm.particles.iter().map(|p| p.position.as_slice()).collect();
        let costs = evaluate(&objective, &positions)?;
        for (p, c) in swarm.particles.iter_mut().zip(costs) {
            if c < p.best_cost {
                p.best_cost = c;
                p.best_position.clone_from(&p.position);
            }
        }

        let leader = argmin(swarm.particles.iter().map(|p| p.best_cost));
        let candidate = swarm.particles[leader].best_cost;
        let improvement = best_cost - candidate;
        if candidate < best_cost {
            best_cost = candidate;
            best_position.clone_from(&swarm.particles[leader].best_position);
        }
        if improvement > STALL_TOLERANCE {
            stall = 0;
        } else {
            stall += 1;
            inertia = (inertia * INERTIA_DECAY).max(params.inertia_min);
        }
        trace.push(best_cost);
        if stall >= params.stall_iterations {
            break;
        }
    }
    Ok(PsoOutcome { best_position, best_cost, iterations, trace })
}

/// Writes `iteration,best_cost` rows.
pub fn write_trace_csv<W: Write>(trace: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "best_cost"])?;
    for (i, c) in trace.iter().enumerate() {
        w.write_record([i.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
