//! Memoryless snapshots of the inner-loop controllers, used wherever the
//! closed loop is propagated forward without the controller's own state
//! evolving (estimation windows and reachability horizons).

use serde::{Deserialize, Serialize};

use super::lqr_pi::{IntegratorState, LqrPiGains, RUDDER_LIMITS, THRUST_LIMITS};
use super::pid::{pid_baseline_step, PidGains, PidState};
use crate::vehicle::VehicleState;

/// LQR-PI law with frozen integrators and an optional constant additive
/// command (a frozen adaptive term).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrozenServo {
    pub gains: LqrPiGains,
    pub integ: IntegratorState,
    pub bias_thr: f64,
    pub bias_rud: f64,
}

impl FrozenServo {
    pub fn raw_thrust(&self, u: f64) -> f64 {
        -(self.gains.k_u_p * u + self.gains.k_u_i * self.integ.e_u_i) + self.bias_thr
    }

    pub fn raw_rudder(&self, v: f64, r: f64) -> f64 {
        -(self.gains.k_v_p * v + self.gains.k_r_p * r + self.gains.k_r_i * self.integ.e_r_i)
            + self.bias_rud
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrozenPid {
    pub gains: PidGains,
    /// Loop state before the update, so the derivative and integral terms
    /// are recomputed from the propagated state.
    pub state: PidState,
    pub u_des: f64,
    pub theta_des: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClosedLoopPolicy {
    LqrPi(FrozenServo),
    FrozenMrac(FrozenServo),
    Pid(FrozenPid),
}

impl ClosedLoopPolicy {
    /// Policy with every gain zero: the actuators are commanded to rest.
    pub fn zero() -> Self {
        ClosedLoopPolicy::LqrPi(FrozenServo {
            gains: LqrPiGains {
                k_u_p: 0.0,
                k_u_i: 0.0,
                k_v_p: 0.0,
                k_r_p: 0.0,
                k_r_i: 0.0,
                k_u_aw: 0.0,
                k_r_aw: 0.0,
            },
            integ: IntegratorState::default(),
            bias_thr: 0.0,
            bias_rud: 0.0,
        })
    }

    /// Saturated `(u_thr, u_rud)` for the given state.
    pub fn command(&self, state: &VehicleState) -> (f64, f64) {
        match self {
            ClosedLoopPolicy::LqrPi(s) | ClosedLoopPolicy::FrozenMrac(s) => (
                THRUST_LIMITS.apply(s.raw_thrust(state.vel.u)),
                RUDDER_LIMITS.apply(s.raw_rudder(state.vel.v, state.vel.r)),
            ),
            ClosedLoopPolicy::Pid(p) => {
                let (thr, rud, _) = pid_baseline_step(
                    state.vel.u,
                    p.u_des,
                    state.pose.theta,
                    p.theta_des,
                    &p.gains,
                    p.state,
                    p.dt,
                );
                (thr, rud)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClosedLoopPolicy::LqrPi(_) => "lqr-pi",
            ClosedLoopPolicy::FrozenMrac(_) => "frozen-mrac",
            ClosedLoopPolicy::Pid(_) => "pid",
        }
    }
}
