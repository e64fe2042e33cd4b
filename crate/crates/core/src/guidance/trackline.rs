use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use super::{azimuth, BehaviorDecision};
use crate::error::{Error, Result};
use crate::vehicle::{wrap_angle, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracklineGains {
    pub k_p: f64,
    pub k_d: f64,
}

impl Default for TracklineGains {
    fn default() -> Self {
        Self { k_p: 0.5, k_d: 1.0 }
    }
}

/// Signed cross-track distance of `(x, y)` from the line through `p1` with
/// azimuth `az`, positive to starboard of the direction of travel.
pub(crate) fn cross_track(x: f64, y: f64, p1: (f64, f64), az: f64) -> f64 {
    -(x - p1.0) * az.sin() + (y - p1.1) * az.cos()
}

/// Cross-track PD steering toward the line from `p1` to `p2`.
pub fn trackline_pd(
    pose: &Pose,
    u_sog: f64,
    segment: ((f64, f64), (f64, f64)),
    gains: &TracklineGains,
    speed: f64,
) -> Result<BehaviorDecision> {
    let (p1, p2) = segment;
    if (p2.0 - p1.0).hypot(p2.1 - p1.1) < 1e-9 {
        return Err(Error::DegenerateGeometry("trackline segment has zero length".into()));
    }
    let az = azimuth(p1, p2);
    let e = cross_track(pose.x, pose.y, p1, az);
    let e_dot = u_sog * (pose.theta - az).sin();
    let correction = (gains.k_p * e + gains.k_d * e_dot).atan().clamp(-FRAC_PI_2, FRAC_PI_2);
    Ok(BehaviorDecision::new(speed, wrap_angle(az - correction)))
}
