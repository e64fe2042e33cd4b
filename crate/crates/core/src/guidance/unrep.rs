use serde::{Deserialize, Serialize};

use super::BehaviorDecision;
use crate::vehicle::{wrap_angle, Pose, VehicleState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnrepGains {
    pub k_along: f64,
    pub k_cross: f64,
    /// Speed domain `(min, max)`.
    pub speed_range: (f64, f64),
}

impl Default for UnrepGains {
    fn default() -> Self {
        Self {
            k_along: 0.2,
            k_cross: 0.25,
            speed_range: (0.0, 2.0),
        }
    }
}

/// Station-keeping decision toward the point at `offset = (along, cross)` in
/// the guide's body frame. Returns the decision and `(inline, cross)` errors.
pub fn unrep_target(
    guide: &VehicleState,
    offset: (f64, f64),
    own: &Pose,
    own_speed: f64,
    gains: &UnrepGains,
) -> (BehaviorDecision, (f64, f64)) {
    let psi = guide.pose.theta;
    let (s, c) = psi.sin_cos();
    let tx = guide.pose.x + offset.0 * c - offset.1 * s;
    let ty = guide.pose.y + offset.0 * s + offset.1 * c;
    let (dx, dy) = (tx - own.x, ty - own.y);
    let inline = dx * c + dy * s;
    let cross = -dx * s + dy * c;
    let guide_speed = guide.vel.u;
    let u = (guide_speed + gains.k_along * inline).clamp(gains.speed_range.0, gains.speed_range.1);
    let theta = psi + (gains.k_cross * cross / own_speed.max(0.1)).atan();
    (BehaviorDecision::new(u, wrap_angle(theta)), (inline, cross))
}
