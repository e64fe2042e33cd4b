//! Inner-loop controllers and thruster allocation.

mod allocation;
mod controller;
mod lqr_pi;
mod mrac;
mod pid;
mod policy;
mod rbf;
pub mod riccati;

pub use allocation::{allocate_thrusters, ThrusterCommand, ThrusterMixer, R_MAX};
pub use controller::{ControllerKind, InnerLoop, InnerLoopConfig, InnerLoopOutput, Measurement, Reference};
pub use lqr_pi::{
    lqr_pi_speed_step, lqr_pi_yaw_step, synthesize_gains, IntegratorState, LqrPiGains, Saturation,
    ServoDesign, RUDDER_LIMITS, THRUST_LIMITS,
};
pub use mrac::{advance_reference, mrac_step, AdaptationConfig, BASELINE_WEIGHT_MAX, BASELINE_WEIGHT_MIN, MracChannel, MracOutput, MracState};
pub use pid::{pid_baseline_step, PidGains, PidLoopGains, PidState};
pub use policy::{ClosedLoopPolicy, FrozenPid, FrozenServo};
pub use rbf::{rbf_eval, RbfRegressor};
pub use riccati::{solve_care_lqr, solve_lyapunov};
