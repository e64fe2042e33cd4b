use serde::{Deserialize, Serialize};

/// Default rudder command limit; a rudder command of this size shuts one side down.
pub const R_MAX: f64 = 50.0;

/// Unsaturated differential-thrust mixing of a thrust/rudder command pair.
///
/// Returns `(u_l, u_r)`. A positive rudder command speeds up the left
/// thruster and yaws the vehicle to starboard.
pub fn allocate_thrusters(u_thr: f64, u_rud: f64, r_max: f64) -> (f64, f64) {
    (u_thr * (1.0 + u_rud / r_max), u_thr * (1.0 - u_rud / r_max))
}

/// Per-thruster command pair after saturation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ThrusterCommand {
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThrusterMixer {
    pub r_max: f64,
    /// Lower and upper per-thruster command limits.
    pub limits: (f64, f64),
}

impl Default for ThrusterMixer {
    fn default() -> Self {
        Self {
            r_max: R_MAX,
            limits: (-100.0, 100.0),
        }
    }
}

impl ThrusterMixer {
    pub fn saturate(&self, value: f64) -> f64 {
        value.clamp(self.limits.0, self.limits.1)
    }

    pub fn allocate(&self, u_thr: f64, u_rud: f64) -> ThrusterCommand {
        let (l, r) = allocate_thrusters(u_thr, u_rud, self.r_max);
        ThrusterCommand {
            left: self.saturate(l),
            right: self.saturate(r),
        }
    }
}
