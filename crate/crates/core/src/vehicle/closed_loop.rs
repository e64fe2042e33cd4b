use serde::{Deserialize, Serialize};

use super::{
    kinematics_step, speed_dynamics_step, sway_yaw_dynamics_step, wrap_angle, BodyVelocity,
    DisturbanceVector, LinearSpeedModel, LinearSwayYawModel, VehicleState, STATE_DIM,
};
use crate::control::{ClosedLoopPolicy, ThrusterMixer};
use crate::error::{ensure_finite, Result};

/// Maps per-thruster commands back onto the surge and yaw channel inputs.
///
/// The common mode drives surge. The differential mode is rescaled so that
/// at the reference thrust a rudder command reproduces itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantInputMap {
    pub r_max: f64,
    pub thrust_ref: f64,
}

impl Default for PlantInputMap {
    fn default() -> Self {
        Self {
            r_max: crate::control::R_MAX,
            thrust_ref: LinearSpeedModel::default().trim_thrust(1.0),
        }
    }
}

impl PlantInputMap {
    /// `(u_thr_eff, u_rud_eff)` from the delivered thruster commands.
    pub fn to_channels(&self, left: f64, right: f64) -> (f64, f64) {
        (
            0.5 * (left + right),
            0.5 * (left - right) * self.r_max / self.thrust_ref,
        )
    }
}

/// Nominal discrete closed loop `x_{k+1} = f_cl(x_k; pi) + w_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopModel {
    pub speed: LinearSpeedModel,
    pub sway_yaw: LinearSwayYawModel,
    pub mixer: ThrusterMixer,
    pub plant_map: PlantInputMap,
    /// Largest forward-Euler integration step inside one call.
    pub max_substep: f64,
}

impl Default for ClosedLoopModel {
    fn default() -> Self {
        Self {
            speed: LinearSpeedModel::default(),
            sway_yaw: LinearSwayYawModel::default(),
            mixer: ThrusterMixer::default(),
            plant_map: PlantInputMap::default(),
            max_substep: 0.005,
        }
    }
}

impl ClosedLoopModel {
    pub fn substeps(&self, dt: f64) -> usize {
        ((dt / self.max_substep) - 1e-9).ceil().max(1.0) as usize
    }

    /// Channel inputs delivered for a controller command, before any fault.
    pub fn channel_inputs(&self, u_thr: f64, u_rud: f64) -> (f64, f64) {
        let c = self.mixer.allocate(u_thr, u_rud);
        self.plant_map.to_channels(c.left, c.right)
    }

    /// Integrates the nominal plant over `dt` with held channel inputs.
    pub fn propagate(&self, state: &VehicleState, thr: f64, rud: f64, dt: f64) -> Result<VehicleState> {
        let n = self.substeps(dt);
        let h = dt / n as f64;
        let mut s = *state;
        for _ in 0..n {
            let pose = kinematics_step(&s.pose, &s.vel, h)?;
            let u = speed_dynamics_step(s.vel.u, thr, 0.0, &self.speed, h);
            let (v, r) = sway_yaw_dynamics_step(s.vel.v, s.vel.r, rud, 0.0, &self.sway_yaw, h);
            s = VehicleState::new(pose, BodyVelocity::new(u, v, r));
        }
        Ok(s)
    }

    pub fn step(
        &self,
        state: &VehicleState,
        policy: &ClosedLoopPolicy,
        w: &DisturbanceVector,
        dt: f64,
    ) -> Result<VehicleState> {
        ensure_finite(dt, "dt")?;
        let (u_thr, u_rud) = policy.command(state);
        let (thr, rud) = self.channel_inputs(u_thr, u_rud);
        let next = self.propagate(state, thr, rud, dt)?;
        let mut a = next.to_array();
        for i in 0..STATE_DIM {
            a[i] += w.w[i];
        }
        a[2] = wrap_angle(a[2]);
        Ok(VehicleState::from_array(a))
    }
}

/// One closed-loop step of the nominal model with the default Heron parameters.
pub fn closed_loop_step(
    state: &VehicleState,
    policy: &ClosedLoopPolicy,
    w: &DisturbanceVector,
    dt: f64,
) -> Result<VehicleState> {
    ClosedLoopModel::default().step(state, policy, w, dt)
}
