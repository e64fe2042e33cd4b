//! Conventional PID baseline on speed error and heading error.

use serde::{Deserialize, Serialize};

use super::lqr_pi::{RUDDER_LIMITS, THRUST_LIMITS};
use crate::guidance::delta_theta;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidLoopGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Clamp on the integral term contribution.
    pub i_limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub speed: PidLoopGains,
    pub heading: PidLoopGains,
}

impl Default for PidGains {
    /// Desk-tuned gains, deliberately conservative like a field-retuned legacy loop.
    fn default() -> Self {
        Self {
            speed: PidLoopGains {
                kp: 40.0,
                ki: 12.0,
                kd: 0.0,
                i_limit: 60.0,
            },
            heading: PidLoopGains {
                kp: 25.0,
                ki: 1.5,
                kd: 6.0,
                i_limit: 8.0,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PidState {
    pub speed_integral: f64,
    pub heading_integral: f64,
    pub prev_speed_error: Option<f64>,
    pub prev_heading_error: Option<f64>,
}

fn pid_loop(g: &PidLoopGains, error: f64, integral: f64, prev: Option<f64>, dt: f64) -> (f64, f64) {
    let limit = if g.ki > 0.0 { g.i_limit / g.ki } else { f64::INFINITY };
    let integral = (integral + error * dt).clamp(-limit, limit);
    let derivative = prev.map_or(0.0, |p| (error - p) / dt);
    (g.kp * error + g.ki * integral + g.kd * derivative, integral)
}

/// Returns `(u_thr, u_rud, state')`, both commands saturated.
pub fn pid_baseline_step(
    u_sog: f64,
    u_des: f64,
    theta: f64,
    theta_des: f64,
    gains: &PidGains,
    state: PidState,
    dt: f64,
) -> (f64, f64, PidState) {
    let e_u = u_des - u_sog;
    let e_h = delta_theta(theta, theta_des);
    let (u_thr, si) = pid_loop(&gains.speed, e_u, state.speed_integral, state.prev_speed_error, dt);
    let (u_rud, hi) = pid_loop(
        &gains.heading,
        e_h,
        state.heading_integral,
        state.prev_heading_error,
        dt,
    );
    (
        THRUST_LIMITS.apply(u_thr),
        RUDDER_LIMITS.apply(u_rud),
        PidState {
            speed_integral: si,
            heading_integral: hi,
            prev_speed_error: Some(e_u),
            prev_heading_error: Some(e_h),
        },
    )
}
