use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::BehaviorDecision;
use crate::error::{Error, Result};
use crate::vehicle::wrap_angle;

/// Discrete speed x heading decision space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionGrid {
    pub speeds: Vec<f64>,
    pub headings: Vec<f64>,
}

impl DecisionGrid {
    /// Speeds `0, step, ..., max` and headings covering `(-pi, pi]` at `heading_step`.
    pub fn uniform(max_speed: f64, speed_step: f64, heading_step: f64) -> Result<Self> {
        if !(speed_step > 0.0 && heading_step > 0.0 && max_speed >= 0.0) {
            return Err(Error::InvalidArgument("grid steps must be positive".into()));
        }
        let ns = (max_speed / speed_step + 1e-9).floor() as usize;
        let nh = (2.0 * PI / heading_step).round() as usize;
        let speeds = (0..=ns).map(|k| k as f64 * speed_step).collect();
        let headings = (0..nh).map(|k| PI - (nh - 1 - k) as f64 * heading_step).collect();
        Ok(Self { speeds, headings })
    }

    /// The default helm grid: 0.05 m/s by 1 degree up to 2 m/s.
    pub fn standard() -> Self {
        Self::uniform(2.0, 0.05, 1f64.to_radians()).expect("valid grid")
    }

    pub fn len(&self) -> usize {
        self.speeds.len() * self.headings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Utility peaked at `(speed, heading)` and falling off linearly in each
/// dimension; the heading distance is the shortest rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakedUtility {
    pub speed: f64,
    pub heading: f64,
    /// Utility lost per m/s of speed mismatch.
    pub speed_slope: f64,
    /// Utility lost per radian of heading mismatch.
    pub heading_slope: f64,
}

impl PeakedUtility {
    pub fn around(decision: &BehaviorDecision) -> Self {
        Self {
            speed: decision.u_des,
            heading: decision.theta_des,
            speed_slope: 100.0,
            heading_slope: 100.0,
        }
    }

    pub fn eval(&self, speed: f64, heading: f64) -> f64 {
        200.0
            - self.speed_slope * (speed - self.speed).abs()
            - self.heading_slope * wrap_angle(heading - self.heading).abs()
    }
}

pub struct WeightedUtility<'a> {
    pub weight: f64,
    pub utility: &'a dyn Fn(f64, f64) -> f64,
}

/// Argmax of the weighted utility sum over the grid; ties go to the lowest
/// grid index (speed-major order).
pub fn arbiter(grid: &DecisionGrid, behaviors: &[WeightedUtility<'_>]) -> Result<BehaviorDecision> {
    if behaviors.is_empty() {
        return Err(Error::EmptyActiveSet);
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty decision grid".into()));
    }
    if behaviors.iter().any(|b| !(b.weight >= 0.0)) {
        return Err(Error::InvalidArgument("behavior weights must be non-negative".into()));
    }
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for &s in &grid.speeds {
        for &h in &grid.headings {
            let total: f64 = behaviors.iter().map(|b| b.weight * (b.utility)(s, h)).sum();
            if total > best.0 {
                best = (total, s, h);
            }
        }
    }
    Ok(BehaviorDecision::new(best.1, best.2))
}
