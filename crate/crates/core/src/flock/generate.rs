use rand::Rng;

use super::metrics::{clear_view, upwash_received};
use super::vec2::Vec2;
use super::{FlockConfig, FlockParams};
use crate::error::{Error, Result};

/// Rejection-sampling budget for [`random_initial`].
pub const SPAWN_ATTEMPTS: usize = 100_000;

/// Upwash a bird must receive to count as feeling it at spawn.
pub const FEEL_UPWASH: f64 = 1e-3;

/// Sampling box for initial positions and velocities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpawnBox {
    pub position: (f64, f64),
    pub velocity: (f64, f64),
}

impl Default for SpawnBox {
    fn default() -> Self {
        SpawnBox { position: (0.0, 3.0), velocity: (0.25, 0.75) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Violation {
    Separation,
    Upwash,
}

impl Violation {
    fn describe(self, params: &FlockParams) -> String {
        match self {
            Violation::Separation => {
                format!("pairwise distance must exceed d_min = {}", params.d_min)
            }
            Violation::Upwash => {
                format!("all birds but at most one must receive upwash above {FEEL_UPWASH}")
            }
        }
    }
}

fn check(c: &FlockConfig, params: &FlockParams) -> Result<Option<Violation>> {
    let x = c.positions();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            if (x[i] - x[j]).norm() <= params.d_min {
                return Ok(Some(Violation::Separation));
            }
        }
    }
    let unaided = upwash_received(c, params)?.iter().filter(|&&ub| ub <= FEEL_UPWASH).count();
    Ok((unaided > 1).then_some(Violation::Upwash))
}

/// Draws a random initial flock: positions and velocities uniform in the
/// default [`SpawnBox`], pairwise separated by more than `d_min`, and with
/// all birds except at most one feeling upwash.
pub fn random_initial<R: Rng + ?Sized>(rng: &mut R, birds: usize, params: &FlockParams) -> Result<FlockConfig> {
    random_initial_in(rng, birds, params, SpawnBox::default())
}

pub fn random_initial_in<R: Rng + ?Sized>(
    rng: &mut R,
    birds: usize,
    params: &FlockParams,
    spawn: SpawnBox,
) -> Result<FlockConfig> {
    if birds == 0 {
        return Err(Error::invalid("a flock needs at least one bird"));
    }
    let mut last = Violation::Separation;
    for _ in 0..SPAWN_ATTEMPTS {
        let (plo, phi) = spawn.position;
        let (vlo, vhi) = spawn.velocity;
        let x = (0..birds).map(|_| Vec2::new(rng.gen_range(plo..=phi), rng.gen_range(plo..=phi))).collect();
        let v = (0..birds).map(|_| Vec2::new(rng.gen_range(vlo..=vhi), rng.gen_range(vlo..=vhi))).collect();
        let c = FlockConfig::new(x, v)?;
        match check(&c, params)? {
            None => return Ok(c),
            Some(v) => last = v,
        }
    }
    Err(Error::Generation { attempts: SPAWN_ATTEMPTS, constraint: last.describe(params) })
}

/// Builds a symmetric V: the leader at the apex, and each trailing bird
/// `upwash_lateral_offset` to the side of and `spacing` behind its front
/// neighbour, all flying along `heading` (radians) at a common speed.
///
/// `birds` must be 1 or odd. Fails when `spacing` is not positive or puts a
/// wing inside some bird's view cone.
pub fn perfect_v(birds: usize, params: &FlockParams, heading: f64, spacing: f64) -> Result<FlockConfig> {
    if birds == 0 || (birds > 1 && birds.is_multiple_of(2)) {
        return Err(Error::invalid(format!("a symmetric V needs 1 or an odd number of birds, got {birds}")));
    }
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::invalid(format!("V spacing must be positive, got {spacing}")));
    }
    let speed = params.v_max.min(1.0);
    let mut x = vec![Vec2::ZERO];
    for rank in 1..=(birds - 1) / 2 {
        let back = -(rank as f64) * spacing;
        let side = rank as f64 * params.upwash_lateral_offset;
        x.push(Vec2::new(back, side));
        x.push(Vec2::new(back, -side));
    }
    let x = x.into_iter().map(|p| p.rotate(heading)).collect();
    let v = vec![Vec2::from_angle(heading) * speed; birds];
    let c = FlockConfig::new(x, v)?;
    let cv = clear_view(&c, params)?;
    if cv > 0.0 {
        return Err(Error::invalid(format!("spacing {spacing} puts wings inside the view cone (clear view {cv})")));
    }
    Ok(c)
}
