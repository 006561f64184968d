//! Clear view, velocity matching, upwash benefit and the combined fitness.
//!
//! Geometry conventions:
//!
//! * Each bird's wings are a segment of length `wingspan`, centred on its
//!   position and perpendicular to its velocity.
//! * A bird looks along its velocity through a cone of full angle `theta`.
//!   Its blocked fraction is the angular measure of the union of other
//!   birds' wing segments inside the cone, divided by `theta`.
//! * Bird `j` generates an upwash field in its own frame. With `l` the
//!   distance behind `j` along its heading and `s` the lateral distance from
//!   its axis, the benefit to a bird at `(l, s)` is
//!   `G(l) * (exp(-(s - mu)^2 / 2σ_lat^2) - λ exp(-s^2 / 2σ_lat^2))`
//!   with `G(l) = exp(-l^2 / 2σ_long^2)` behind `j` and zero ahead of it.

use super::vec2::Vec2;
use super::{FlockConfig, FlockParams};
use crate::error::{Error, Result};
use std::f64::consts::PI;

fn headings(c: &FlockConfig) -> Result<Vec<Vec2>> {
    c.velocities()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let n = v.norm();
            if n == 0.0 {
                Err(Error::UndefinedHeading { bird: i })
            } else {
                Ok(*v * (1.0 / n))
            }
        })
        .collect()
}

/// Angle of `r` measured from `heading`, in `(-π, π]`.
fn relative_angle(heading: Vec2, r: Vec2) -> f64 {
    heading.cross(r).atan2(heading.dot(r))
}

fn push_clipped(out: &mut Vec<(f64, f64)>, lo: f64, hi: f64, half: f64) {
    let (a, b) = (lo.max(-half), hi.min(half));
    if b > a {
        out.push((a, b));
    }
}

fn union_length(intervals: &mut [(f64, f64)]) -> f64 {
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut current: Option<(f64, f64)> = None;
    for &(lo, hi) in intervals.iter() {
        match current {
            Some((clo, chi)) if lo <= chi => current = Some((clo, chi.max(hi))),
            Some((clo, chi)) => {
                total += chi - clo;
                current = Some((lo, hi));
            }
            None => current = Some((lo, hi)),
        }
    }
    if let Some((clo, chi)) = current {
        total += chi - clo;
    }
    total
}

/// Blocked fraction of bird `i`'s view cone. `intervals` is scratch space.
fn blocked_fraction(
    i: usize,
    pos: &[Vec2],
    dirs: &[Vec2],
    params: &FlockParams,
    intervals: &mut Vec<(f64, f64)>,
) -> f64 {
    let half = params.theta / 2.0;
    let half_wing = params.wingspan / 2.0;
    let (xi, hi) = (pos[i], dirs[i]);
    intervals.clear();
    for (j, (&xj, &hj)) in pos.iter().zip(dirs).enumerate() {
        if i == j {
            continue;
        }
        let wing = hj.perp() * half_wing;
        let (r1, r2) = (xj + wing - xi, xj - wing - xi);
        // A cone no wider than a half plane cannot see a segment lying
        // entirely beside or behind the bird.
        if half <= PI / 2.0 && hi.dot(r1) <= 0.0 && hi.dot(r2) <= 0.0 {
            continue;
        }
        let a1 = relative_angle(hi, r1);
        let a2 = relative_angle(hi, r2);
        let mut d = a2 - a1;
        if d > PI {
            d -= 2.0 * PI;
        } else if d <= -PI {
            d += 2.0 * PI;
        }
        let start = if d >= 0.0 { a1 } else { a2 };
        let end = start + d.abs();
        push_clipped(intervals, start, end, half);
        // Arcs that run past +π wrap around to the negative side.
        if end > PI {
            push_clipped(intervals, start - 2.0 * PI, end - 2.0 * PI, half);
        }
    }
    (union_length(intervals) / params.theta).min(1.0)
}

/// Per-bird blocked fraction of the view cone, each in `[0, 1]`.
pub fn blocked_fractions(c: &FlockConfig, params: &FlockParams) -> Result<Vec<f64>> {
    let dirs = headings(c)?;
    let pos = c.positions();
    let mut intervals = Vec::with_capacity(2 * pos.len());
    Ok((0..pos.len()).map(|i| blocked_fraction(i, pos, &dirs, params, &mut intervals)).collect())
}

/// Clear-view metric: the sum of blocked view-cone fractions, in `[0, b]`.
pub fn clear_view(c: &FlockConfig, params: &FlockParams) -> Result<f64> {
    Ok(blocked_fractions(c, params)?.iter().sum())
}

/// Velocity-matching metric: `Σ_{i<j} |v_i - v_j|` over unordered pairs.
pub fn velocity_matching(c: &FlockConfig) -> f64 {
    let v = c.velocities();
    let mut total = 0.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            total += (v[i] - v[j]).norm();
        }
    }
    total
}

/// Upwash that bird at offset `d = x_i - x_j` receives from bird `j` flying
/// along unit heading `heading_j`.
pub fn upwash_field(d: Vec2, heading_j: Vec2, params: &FlockParams) -> f64 {
    let behind = -d.dot(heading_j);
    if behind < 0.0 {
        return 0.0;
    }
    let lateral = d.dot(heading_j.perp()).abs();
    let two_lat = 2.0 * params.upwash_lateral_width * params.upwash_lateral_width;
    let two_long = 2.0 * params.upwash_longitudinal_width * params.upwash_longitudinal_width;
    let g = (-behind * behind / two_long).exp();
    let off = lateral - params.upwash_lateral_offset;
    g * ((-off * off / two_lat).exp() - params.downwash_weight * (-lateral * lateral / two_lat).exp())
}

fn received(i: usize, pos: &[Vec2], dirs: &[Vec2], params: &FlockParams) -> f64 {
    let sum: f64 = pos
        .iter()
        .zip(dirs)
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, (&xj, &hj))| upwash_field(pos[i] - xj, hj, params))
        .sum();
    sum.clamp(0.0, 1.0)
}

/// Upwash each bird receives, clamped to `[0, 1]`.
pub fn upwash_received(c: &FlockConfig, params: &FlockParams) -> Result<Vec<f64>> {
    let dirs = headings(c)?;
    let pos = c.positions();
    Ok((0..pos.len()).map(|i| received(i, pos, &dirs, params)).collect())
}

/// Upwash metric `Σ_i (1 - ub_i)`, in `[0, b]`; 1 in a V-formation where
/// only the leader flies unaided.
pub fn upwash_benefit(c: &FlockConfig, params: &FlockParams) -> Result<f64> {
    Ok(upwash_received(c, params)?.iter().map(|ub| 1.0 - ub).sum())
}

/// `J = CV² + VM² + (UB - 1)²`.
pub fn fitness(c: &FlockConfig, params: &FlockParams) -> Result<f64> {
    // Same sums as the public metrics, sharing headings and scratch space.
    let dirs = headings(c)?;
    let pos = c.positions();
    let mut intervals = Vec::with_capacity(2 * pos.len());
    let (mut cv, mut ub) = (0.0, 0.0);
    for i in 0..pos.len() {
        cv += blocked_fraction(i, pos, &dirs, params, &mut intervals);
        ub += 1.0 - received(i, pos, &dirs, params);
    }
    let vm = velocity_matching(c);
    Ok(cv * cv + vm * vm + (ub - 1.0) * (ub - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flock(x: &[(f64, f64)], v: &[(f64, f64)]) -> FlockConfig {
        FlockConfig::new(
            x.iter().map(|&(a, b)| Vec2::new(a, b)).collect(),
            v.iter().map(|&(a, b)| Vec2::new(a, b)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_bird_is_optimal() {
        let p = FlockParams::default();
        let c = flock(&[(0.0, 0.0)], &[(0.5, 0.5)]);
        assert_eq!(clear_view(&c, &p).unwrap(), 0.0);
        assert_eq!(velocity_matching(&c), 0.0);
        assert_eq!(upwash_benefit(&c, &p).unwrap(), 1.0);
        assert_eq!(fitness(&c, &p).unwrap(), 0.0);
    }

    #[test]
    fn side_by_side_far_apart_has_clear_view() {
        let p = FlockParams::default();
        let c = flock(&[(0.0, 0.0), (0.0, 5.0)], &[(1.0, 0.0), (1.0, 0.0)]);
        assert_eq!(clear_view(&c, &p).unwrap(), 0.0);
    }

    #[test]
    fn bird_directly_ahead_blocks_its_angular_width() {
        let p = FlockParams::default();
        for &d in &[1.0, 2.0, 3.5] {
            let c = flock(&[(0.0, 0.0), (d, 0.0)], &[(1.0, 0.0), (1.0, 0.0)]);
            let expected = 2.0 * (p.wingspan / (2.0 * d)).atan() / p.theta;
            assert!((clear_view(&c, &p).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn wide_segment_is_clipped_to_cone() {
        let p = FlockParams::default();
        // A bird very close ahead subtends almost π; only θ of it counts.
        let c = flock(&[(0.0, 0.0), (0.01, 0.0)], &[(1.0, 0.0), (1.0, 0.0)]);
        assert!((clear_view(&c, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_blockers_are_not_double_counted() {
        let p = FlockParams::default();
        let c = flock(&[(0.0, 0.0), (2.0, 0.0), (4.0, 0.0)], &[(1.0, 0.0); 3]);
        let near = 2.0 * (0.5f64 / 2.0).atan() / p.theta;
        let mid = near; // bird 1 sees bird 2 at the same distance
        assert!((clear_view(&c, &p).unwrap() - (near + mid)).abs() < 1e-12);
    }

    #[test]
    fn zero_velocity_is_rejected() {
        let p = FlockParams::default();
        let c = flock(&[(0.0, 0.0), (1.0, 1.0)], &[(1.0, 0.0), (0.0, 0.0)]);
        assert!(matches!(clear_view(&c, &p), Err(Error::UndefinedHeading { bird: 1 })));
        assert!(matches!(upwash_benefit(&c, &p), Err(Error::UndefinedHeading { bird: 1 })));
    }

    #[test]
    fn velocity_matching_examples() {
        let c = flock(&[(0.0, 0.0), (1.0, 0.0)], &[(1.0, 0.0), (0.0, 1.0)]);
        assert!((velocity_matching(&c) - 2f64.sqrt()).abs() < 1e-15);
        let c = flock(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)], &[(1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        assert_eq!(velocity_matching(&c), 2.0);
        let c = flock(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)], &[(0.3, 0.4); 3]);
        assert_eq!(velocity_matching(&c), 0.0);
    }

    #[test]
    fn directly_behind_is_downwash() {
        let p = FlockParams::default();
        let heading = Vec2::new(1.0, 0.0);
        for &l in &[0.1, 0.5, 1.0, 2.0] {
            assert!(upwash_field(Vec2::new(-l, 0.0), heading, &p) <= 0.0);
        }
        let c = flock(&[(0.0, 0.0), (-1.0, 0.0)], &[(1.0, 0.0), (1.0, 0.0)]);
        let ub = upwash_received(&c, &p).unwrap();
        assert_eq!(ub, vec![0.0, 0.0]);
        assert_eq!(upwash_benefit(&c, &p).unwrap(), 2.0);
    }

    #[test]
    fn field_at_peak_offset_one_width_behind() {
        let p = FlockParams::default();
        let heading = Vec2::new(1.0, 0.0);
        let at = |l: f64| upwash_field(Vec2::new(-l, p.upwash_lateral_offset), heading, &p);
        let mu = p.upwash_lateral_offset;
        let s2 = 2.0 * p.upwash_lateral_width.powi(2);
        let peak = 1.0 - p.downwash_weight * (-mu * mu / s2).exp();
        let got = at(p.upwash_longitudinal_width);
        assert!((got - (-0.5f64).exp() * peak).abs() < 1e-15);
        assert_eq!(upwash_field(Vec2::new(0.5, 1.0), heading, &p), 0.0, "ahead of j");
    }

    #[test]
    fn two_aligned_birds_out_of_range() {
        let p = FlockParams::default();
        let c = flock(&[(0.0, 0.0), (0.0, 10.0)], &[(1.0, 0.0), (1.0, 0.0)]);
        assert!((fitness(&c, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    fn arb_flock() -> impl Strategy<Value = FlockConfig> {
        (1usize..8).prop_flat_map(|b| {
            let pt = (-4.0f64..4.0, -4.0f64..4.0);
            let vel = (0.05f64..1.5, -1.5f64..1.5);
            (prop::collection::vec(pt, b), prop::collection::vec(vel, b)).prop_map(|(x, v)| flock(&x, &v))
        })
    }

    proptest! {
        #[test]
        fn metric_ranges(c in arb_flock()) {
            let p = FlockParams::default();
            let b = c.birds() as f64;
            let cv = clear_view(&c, &p).unwrap();
            let ub = upwash_benefit(&c, &p).unwrap();
            prop_assert!((0.0..=b).contains(&cv));
            prop_assert!((0.0..=b).contains(&ub));
            prop_assert!(velocity_matching(&c) >= 0.0);
            prop_assert!(fitness(&c, &p).unwrap() >= 0.0);
        }
    }
}
