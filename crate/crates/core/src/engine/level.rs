use crate::error::{Error, Result};

/// Required cost decrease for a clone at level `level` of `levels`, given
/// the cost `prev_cost` it had at the previous level:
/// `prev_cost / (levels - level + 1)`.
///
/// The remaining gap to zero is split evenly over the remaining levels, so
/// the last level asks for the whole remaining cost.
pub fn dynamic_threshold(prev_cost: f64, levels: usize, level: usize) -> Result<f64> {
    if level == 0 || level > levels {
        return Err(Error::invalid(format!("level {level} outside 1..={levels}")));
    }
    if prev_cost.is_nan() || prev_cost < 0.0 {
        return Err(Error::invalid(format!("previous cost must be non-negative, got {prev_cost}")));
    }
    Ok(prev_cost / (levels - level + 1) as f64)
}

/// True iff `best_cost` lies strictly more than `delta` below `previous`.
pub fn next_level_check(previous: f64, best_cost: f64, delta: f64) -> bool {
    previous - best_cost > delta
}

/// Horizon and swarm-size schedule tried at one level.
///
/// Starts at `(1, p_start)`, grows the horizon up to `h_max`, then resets the
/// horizon and adds `p_inc` particles, capped at `p_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub horizon: usize,
    pub particles: usize,
    h_max: usize,
    p_start: usize,
    p_inc: usize,
    p_max: usize,
}

impl Schedule {
    pub fn new(h_max: usize, p_start: usize, p_inc: usize, p_max: usize) -> Self {
        Schedule { horizon: 1, particles: p_start, h_max, p_start, p_inc, p_max }
    }

    pub fn reset(&mut self) {
        self.horizon = 1;
        self.particles = self.p_start;
    }

    /// Moves to the next `(h, p)` pair; false once the schedule is exhausted.
    pub fn advance(&mut self) -> bool {
        if self.horizon < self.h_max {
            self.horizon += 1;
            true
        } else if self.particles < self.p_max {
            self.horizon = 1;
            self.particles = (self.particles + self.p_inc).min(self.p_max);
            true
        } else {
            false
        }
    }
}
