//! The bird-flock V-formation MDP.
//!
//! A flock of `b` birds moves in the plane. A global controller picks one
//! acceleration per bird per step; velocity updates first and the position
//! moves by the new velocity. The cost of a configuration is the
//! sum-of-squares distance of its clear-view, velocity-matching and upwash
//! metrics from their V-formation optima (see [`metrics`]).

mod generate;
pub mod metrics;
pub mod vec2;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::Mdp;
use vec2::Vec2;

pub use generate::{perfect_v, random_initial, SpawnBox, FEEL_UPWASH, SPAWN_ATTEMPTS};
pub use metrics::{clear_view, fitness, upwash_benefit, upwash_received, velocity_matching};

/// Physical and sensing parameters of the flock model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlockParams {
    /// Speed cap.
    pub v_max: f64,
    /// Acceleration-to-speed ratio: `|a_i| <= rho * |v_i|`.
    pub rho: f64,
    /// Minimum pairwise distance at spawn.
    pub d_min: f64,
    /// Full angle of each bird's forward view cone, radians.
    pub theta: f64,
    pub wingspan: f64,
    /// Lateral offset of the upwash peak from the generating bird's axis.
    pub upwash_lateral_offset: f64,
    pub upwash_lateral_width: f64,
    pub upwash_longitudinal_width: f64,
    /// Weight of the downwash trough directly behind a bird.
    pub downwash_weight: f64,
}

impl Default for FlockParams {
    fn default() -> Self {
        FlockParams {
            v_max: 2.0,
            rho: 0.5,
            d_min: 0.3,
            theta: 2.0 * PI / 3.0,
            wingspan: 1.0,
            upwash_lateral_offset: 1.0,
            upwash_lateral_width: 0.25,
            upwash_longitudinal_width: 1.0,
            downwash_weight: 1.0,
        }
    }
}

impl FlockParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("v_max", self.v_max),
            ("d_min", self.d_min),
            ("wingspan", self.wingspan),
            ("upwash_lateral_offset", self.upwash_lateral_offset),
            ("upwash_lateral_width", self.upwash_lateral_width),
            ("upwash_longitudinal_width", self.upwash_longitudinal_width),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(format!("flock.{name} must be positive, got {value}")));
            }
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::invalid(format!("flock.rho must lie in (0, 1), got {}", self.rho)));
        }
        if !(self.theta > 0.0 && self.theta < 2.0 * PI) {
            return Err(Error::invalid(format!("flock.theta must lie in (0, 2π), got {}", self.theta)));
        }
        if !(self.downwash_weight.is_finite() && self.downwash_weight >= 0.0) {
            return Err(Error::invalid("flock.downwash_weight must be non-negative"));
        }
        Ok(())
    }
}

/// Positions and velocities of every bird at one time step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ConfigRepr", try_from = "ConfigRepr")]
pub struct FlockConfig {
    x: Vec<Vec2>,
    v: Vec<Vec2>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigRepr {
    b: usize,
    x: Vec<[f64; 2]>,
    v: Vec<[f64; 2]>,
}

impl From<FlockConfig> for ConfigRepr {
    fn from(c: FlockConfig) -> Self {
        ConfigRepr {
            b: c.birds(),
            x: c.x.iter().map(|p| p.to_array()).collect(),
            v: c.v.iter().map(|p| p.to_array()).collect(),
        }
    }
}

impl TryFrom<ConfigRepr> for FlockConfig {
    type Error = Error;

    fn try_from(r: ConfigRepr) -> Result<Self> {
        if r.x.len() != r.b || r.v.len() != r.b {
            return Err(Error::invalid(format!(
                "flock declares b = {} but has {} positions and {} velocities",
                r.b,
                r.x.len(),
                r.v.len()
            )));
        }
        FlockConfig::new(r.x.into_iter().map(Vec2::from).collect(), r.v.into_iter().map(Vec2::from).collect())
    }
}

impl FlockConfig {
    pub fn new(x: Vec<Vec2>, v: Vec<Vec2>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::invalid("a flock needs at least one bird"));
        }
        if x.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: v.len() });
        }
        if x.iter().chain(&v).any(|p| !p.is_finite()) {
            return Err(Error::invalid("flock coordinates must be finite"));
        }
        Ok(FlockConfig { x, v })
    }

    /// Like [`FlockConfig::new`], additionally enforcing the speed cap.
    pub fn with_params(x: Vec<Vec2>, v: Vec<Vec2>, params: &FlockParams) -> Result<Self> {
        let c = FlockConfig::new(x, v)?;
        if let Some((i, s)) = c.v.iter().map(|v| v.norm()).enumerate().find(|(_, s)| *s > params.v_max) {
            return Err(Error::invalid(format!("bird {i} speed {s} exceeds v_max = {}", params.v_max)));
        }
        Ok(c)
    }

    pub fn birds(&self) -> usize {
        self.x.len()
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.x
    }

    pub fn velocities(&self) -> &[Vec2] {
        &self.v
    }

    /// Applies `f` to every position and `g` to every velocity.
    pub fn map(&self, f: impl Fn(Vec2) -> Vec2, g: impl Fn(Vec2) -> Vec2) -> FlockConfig {
        FlockConfig { x: self.x.iter().copied().map(&f).collect(), v: self.v.iter().copied().map(&g).collect() }
    }
}

/// One acceleration per bird.
#[derive(Clone, Debug, PartialEq)]
pub struct FlockAction(pub Vec<Vec2>);

impl FlockAction {
    pub fn zeros(birds: usize) -> Self {
        FlockAction(vec![Vec2::ZERO; birds])
    }

    /// Reads `[a1x, a1y, a2x, a2y, ...]`.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if !flat.len().is_multiple_of(2) {
            return Err(Error::invalid("flat flock action must have even length"));
        }
        Ok(FlockAction(flat.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect()))
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.0.iter().flat_map(|a| [a.x, a.y]).collect()
    }
}

/// Caps each acceleration at `rho * |v_i|` by radial rescaling.
pub fn project_action(raw: &FlockAction, c: &FlockConfig, params: &FlockParams) -> FlockAction {
    FlockAction(raw.0.iter().zip(&c.v).map(|(a, v)| a.clamp_norm(params.rho * v.norm())).collect())
}

/// One step of the flock dynamics; `a` must already be feasible.
///
/// The new velocity is `v + a` with its norm capped at `v_max`, and the
/// position advances by the new velocity.
pub fn flock_step(c: &FlockConfig, a: &FlockAction, params: &FlockParams) -> Result<FlockConfig> {
    if a.0.len() != c.birds() {
        return Err(Error::DimensionMismatch { expected: c.birds(), got: a.0.len() });
    }
    let mut next = c.clone();
    for ((x, v), acc) in next.x.iter_mut().zip(next.v.iter_mut()).zip(&a.0) {
        *v = (*v + *acc).clamp_norm(params.v_max);
        *x = *x + *v;
    }
    Ok(next)
}

/// Applies `seq` in order: the `h`-fold composition of [`flock_step`].
pub fn unfold(c: &FlockConfig, seq: &[FlockAction], params: &FlockParams) -> Result<FlockConfig> {
    let (first, rest) = seq.split_first().ok_or_else(|| Error::invalid("unfold needs at least one action"))?;
    rest.iter().try_fold(flock_step(c, first, params)?, |acc, a| flock_step(&acc, a, params))
}

/// The flock as an [`Mdp`]: actions are flattened accelerations, projected
/// onto the feasible disc of each bird before stepping.
#[derive(Clone, Debug)]
pub struct FlockMdp {
    params: FlockParams,
    birds: usize,
}

impl FlockMdp {
    pub fn new(birds: usize, params: FlockParams) -> Result<Self> {
        if birds == 0 {
            return Err(Error::invalid("a flock needs at least one bird"));
        }
        params.validate()?;
        Ok(FlockMdp { params, birds })
    }

    pub fn params(&self) -> &FlockParams {
        &self.params
    }

    pub fn birds(&self) -> usize {
        self.birds
    }

    fn check(&self, c: &FlockConfig, action: &[f64]) -> Result<()> {
        if c.birds() != self.birds {
            return Err(Error::DimensionMismatch { expected: self.birds, got: c.birds() });
        }
        if action.len() != 2 * self.birds {
            return Err(Error::DimensionMismatch { expected: 2 * self.birds, got: action.len() });
        }
        Ok(())
    }
}

impl Mdp for FlockMdp {
    type State = FlockConfig;

    fn action_dim(&self) -> usize {
        2 * self.birds
    }

    fn action_bounds(&self) -> Vec<(f64, f64)> {
        let r = self.params.rho * self.params.v_max;
        vec![(-r, r); 2 * self.birds]
    }

    fn step(&self, c: &FlockConfig, action: &[f64]) -> Result<FlockConfig> {
        self.check(c, action)?;
        let mut next = c.clone();
        let p = &self.params;
        for (i, (x, v)) in next.x.iter_mut().zip(next.v.iter_mut()).enumerate() {
            let a = Vec2::new(action[2 * i], action[2 * i + 1]).clamp_norm(p.rho * v.norm());
            *v = (*v + a).clamp_norm(p.v_max);
            *x = *x + *v;
        }
        Ok(next)
    }

    fn cost(&self, c: &FlockConfig) -> Result<f64> {
        fitness(c, &self.params)
    }

    fn feasible_action(&self, c: &FlockConfig, action: &[f64]) -> Vec<f64> {
        action
            .chunks_exact(2)
            .zip(&c.v)
            .flat_map(|(a, v)| {
                let a = Vec2::new(a[0], a[1]).clamp_norm(self.params.rho * v.norm());
                [a.x, a.y]
            })
            .collect()
    }
}
