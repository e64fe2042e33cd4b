//! Vehicle state, decoupled linearized dynamics and planar kinematics.
//!
//! The truth model composes the identified surge and sway/yaw-rate models
//! with exact nonlinear kinematics. The surge model is applied to the body
//! surge velocity; sway stays small enough that it tracks speed over
//! ground to well below sensor noise.

mod closed_loop;

pub use closed_loop::{closed_loop_step, ClosedLoopModel, PlantInputMap};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ensure_finite, Result};

/// Number of components in the planar vehicle state `(x, y, theta, u, v, r)`.
pub const STATE_DIM: usize = 6;

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    if !angle.is_finite() {
        return angle;
    }
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyVelocity {
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

impl BodyVelocity {
    pub fn new(u: f64, v: f64, r: f64) -> Self {
        Self { u, v, r }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    pub pose: Pose,
    pub vel: BodyVelocity,
}

impl VehicleState {
    pub fn new(pose: Pose, vel: BodyVelocity) -> Self {
        Self { pose, vel }
    }

    /// State as `[x, y, theta, u, v, r]`.
    pub fn to_array(&self) -> [f64; STATE_DIM] {
        [
            self.pose.x,
            self.pose.y,
            self.pose.theta,
            self.vel.u,
            self.vel.v,
            self.vel.r,
        ]
    }

    /// Inverse of [`VehicleState::to_array`]. The heading is taken verbatim.
    pub fn from_array(a: [f64; STATE_DIM]) -> Self {
        Self {
            pose: Pose {
                x: a[0],
                y: a[1],
                theta: a[2],
            },
            vel: BodyVelocity {
                u: a[3],
                v: a[4],
                r: a[5],
            },
        }
    }

    pub fn from_slice(s: &[f64]) -> Self {
        let mut a = [0.0; STATE_DIM];
        a.copy_from_slice(&s[..STATE_DIM]);
        Self::from_array(a)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }
}

/// First-order surge model `u' = a u + b lambda (u_thr + g(u))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSpeedModel {
    pub a_p1: f64,
    pub b_p1: f64,
    /// Control effectiveness; only the truth model departs from 1.
    #[serde(default = "one")]
    pub lambda_1: f64,
}

impl Default for LinearSpeedModel {
    /// Identified Heron surge model.
    fn default() -> Self {
        Self {
            a_p1: -24.0,
            b_p1: 0.618,
            lambda_1: 1.0,
        }
    }
}

impl LinearSpeedModel {
    /// Thrust command that holds `speed` in steady state.
    pub fn trim_thrust(&self, speed: f64) -> f64 {
        -self.a_p1 * speed / (self.b_p1 * self.lambda_1)
    }
}

/// Sway/yaw-rate model `[v r]' = A_p [v r] + B_p lambda (u_rud + g(r))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSwayYawModel {
    pub a_p: [[f64; 2]; 2],
    pub b_p: [f64; 2],
    #[serde(default = "one")]
    pub lambda_2: f64,
}

impl Default for LinearSwayYawModel {
    /// Identified Heron sway/yaw-rate model.
    fn default() -> Self {
        Self {
            a_p: [[-0.023, -0.0075], [0.0, -61.0]],
            b_p: [-0.0009, 0.90],
            lambda_2: 1.0,
        }
    }
}

fn one() -> f64 {
    1.0
}

/// Additive per-step state bias `w` in state order `(x, y, theta, u, v, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DisturbanceVector {
    pub w: [f64; STATE_DIM],
}

impl DisturbanceVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(w: [f64; STATE_DIM]) -> Self {
        Self { w }
    }
}

/// Forward-Euler step of the planar kinematics.
pub fn kinematics_step(pose: &Pose, vel: &BodyVelocity, dt: f64) -> Result<Pose> {
    for (value, what) in [
        (pose.x, "pose.x"),
        (pose.y, "pose.y"),
        (pose.theta, "pose.theta"),
        (vel.u, "vel.u"),
        (vel.v, "vel.v"),
        (vel.r, "vel.r"),
        (dt, "dt"),
    ] {
        ensure_finite(value, what)?;
    }
    let (s, c) = pose.theta.sin_cos();
    Ok(Pose {
        x: pose.x + dt * (vel.u * c - vel.v * s),
        y: pose.y + dt * (vel.u * s + vel.v * c),
        theta: wrap_angle(pose.theta + dt * vel.r),
    })
}

/// Forward-Euler step of the surge model with `matched_bias` realizing `g(u)`.
pub fn speed_dynamics_step(
    u_sog: f64,
    u_thr: f64,
    matched_bias: f64,
    model: &LinearSpeedModel,
    dt: f64,
) -> f64 {
    u_sog + dt * (model.a_p1 * u_sog + model.b_p1 * model.lambda_1 * (u_thr + matched_bias))
}

/// Forward-Euler step of the sway/yaw-rate model with `matched_bias` realizing `g(r)`.
pub fn sway_yaw_dynamics_step(
    v: f64,
    r: f64,
    u_rud: f64,
    matched_bias: f64,
    model: &LinearSwayYawModel,
    dt: f64,
) -> (f64, f64) {
    let input = model.lambda_2 * (u_rud + matched_bias);
    let a = &model.a_p;
    let dv = a[0][0] * v + a[0][1] * r + model.b_p[0] * input;
    let dr = a[1][0] * v + a[1][1] * r + model.b_p[1] * input;
    (v + dt * dv, r + dt * dr)
}

pub fn speed_over_ground(vel: &BodyVelocity) -> f64 {
    vel.u.hypot(vel.v)
}
