//! Outer-loop behaviors, the behavior arbiter and the helm filter.

mod arbiter;
mod helm;
mod l1;
mod path;
mod trackline;
mod unrep;

pub use arbiter::{arbiter, DecisionGrid, PeakedUtility, WeightedUtility};
pub use helm::{helm_filter_step, HelmFilterState};
pub use l1::{l1_reference_point, l1_yaw_rate, L1Point};
pub use path::{legrun_waypoints, LegRunPath, Path, PathProjection, PathSegment, ProgressEvent, TurnDirection};
pub use trackline::{trackline_pd, TracklineGains};
pub use unrep::{unrep_target, UnrepGains};

use serde::{Deserialize, Serialize};

use crate::vehicle::wrap_angle;

/// Desired speed and heading selected by the arbiter.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BehaviorDecision {
    pub u_des: f64,
    pub theta_des: f64,
    /// Yaw-rate feedforward from path curvature, zero for most behaviors.
    #[serde(default)]
    pub r_ff: f64,
}

impl BehaviorDecision {
    pub fn new(u_des: f64, theta_des: f64) -> Self {
        Self {
            u_des,
            theta_des: wrap_angle(theta_des),
            r_ff: 0.0,
        }
    }
}

/// Signed smallest rotation from `theta` to `theta_des`, positive clockwise.
pub fn delta_theta(theta: f64, theta_des: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let (sd, cd) = theta_des.sin_cos();
    // Unit vectors [sin, cos, 0]: dot and vertical cross component.
    let dot = (s * sd + c * cd).clamp(-1.0, 1.0);
    let z = s * cd - c * sd;
    let sign = if z > 0.0 { -1.0 } else { 1.0 };
    dot.acos() * sign
}

/// Azimuth of the vector from `a` to `b`, clockwise from north.
pub fn azimuth(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.1 - a.1).atan2(b.0 - a.0)
}
