use serde::{Deserialize, Serialize};

use super::{delta_theta, BehaviorDecision};

/// First-order reference filters turning a decision into `(u_des, r_des)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelmFilterState {
    pub q1: f64,
    pub q2: f64,
    /// Speed filter time constant, seconds.
    pub tau_u: f64,
    /// Yaw-rate filter time constant, seconds.
    pub tau_r: f64,
    /// Heading-error to yaw-rate gain, 1/s.
    pub tau_theta: f64,
}

impl Default for HelmFilterState {
    fn default() -> Self {
        Self {
            q1: 0.0,
            q2: 0.0,
            tau_u: 1.0,
            tau_r: 0.1,
            tau_theta: 0.2,
        }
    }
}

impl HelmFilterState {
    /// Filter initialized at rest on `(u_des, r_des)`.
    pub fn settled(u_des: f64, r_des: f64) -> Self {
        let mut s = Self::default();
        s.q1 = s.tau_u * u_des;
        s.q2 = s.tau_r * r_des;
        s
    }

    pub fn outputs(&self) -> (f64, f64) {
        (self.q1 / self.tau_u, self.q2 / self.tau_r)
    }
}

/// One forward-Euler step. Returns `(u_des, r_des, state')`.
///
/// A nonzero `decision.r_ff` adds a steady yaw-rate offset to `r_des`.
pub fn helm_filter_step(
    state: HelmFilterState,
    decision: &BehaviorDecision,
    theta: f64,
    dt: f64,
) -> (f64, f64, HelmFilterState) {
    let dth = delta_theta(theta, decision.theta_des);
    let q1 = state.q1 + dt * (-state.q1 / state.tau_u + decision.u_des);
    let q2 = state.q2 + dt * (-state.q2 / state.tau_r + state.tau_theta * dth + decision.r_ff / state.tau_r);
    let next = HelmFilterState { q1, q2, ..state };
    let (u, r) = next.outputs();
    (u, r, next)
}
