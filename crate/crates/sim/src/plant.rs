//! Truth dynamics of one vehicle, including everything injected between the
//! controller output and the hull.

use serde::{Deserialize, Serialize};
use usv_core::control::{allocate_thrusters, ThrusterMixer};
use usv_core::disturbance::{apply_fault, FaultConfig};
use usv_core::vehicle::{
    kinematics_step, speed_dynamics_step, sway_yaw_dynamics_step, BodyVelocity, LinearSpeedModel,
    LinearSwayYawModel, PlantInputMap, Pose, VehicleState,
};
use usv_core::Result;

/// Loads acting on the truth plant during one tick.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlantLoads {
    pub fault: FaultConfig,
    /// Matched surge and yaw biases in command units (drogue, sail).
    pub surge_bias: f64,
    pub yaw_bias: f64,
    /// Water current `(north, east)`, m/s.
    pub current: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct TruthVehicle {
    pub state: VehicleState,
    pub speed: LinearSpeedModel,
    pub sway_yaw: LinearSwayYawModel,
    pub mixer: ThrusterMixer,
    pub plant_map: PlantInputMap,
    pub max_substep: f64,
}

impl TruthVehicle {
    pub fn new(state: VehicleState, lambda_speed: f64, lambda_yaw: f64) -> Self {
        Self {
            state,
            speed: LinearSpeedModel {
                lambda_1: lambda_speed,
                ..LinearSpeedModel::default()
            },
            sway_yaw: LinearSwayYawModel {
                lambda_2: lambda_yaw,
                ..LinearSwayYawModel::default()
            },
            mixer: ThrusterMixer::default(),
            plant_map: PlantInputMap::default(),
            max_substep: 0.005,
        }
    }

    /// Thruster commands actually delivered: mixing, then the fault, then
    /// the per-thruster limits.
    pub fn delivered(&self, u_thr: f64, u_rud: f64, fault: &FaultConfig) -> (f64, f64) {
        let (l, r) = allocate_thrusters(u_thr, u_rud, self.mixer.r_max);
        let (l, r) = apply_fault(l, r, fault);
        (self.mixer.saturate(l), self.mixer.saturate(r))
    }

    /// Advances the truth over `dt` with held commands. Returns the delivered
    /// thruster pair.
    pub fn step(&mut self, u_thr: f64, u_rud: f64, loads: &PlantLoads, dt: f64) -> Result<(f64, f64)> {
        let (left, right) = self.delivered(u_thr, u_rud, &loads.fault);
        let (thr, rud) = self.plant_map.to_channels(left, right);
        let n = ((dt / self.max_substep) - 1e-9).ceil().max(1.0) as usize;
        let h = dt / n as f64;
        let mut s = self.state;
        for _ in 0..n {
            let p = kinematics_step(&s.pose, &s.vel, h)?;
            let pose = Pose {
                x: p.x + h * loads.current.0,
                y: p.y + h * loads.current.1,
                theta: p.theta,
            };
            let u = speed_dynamics_step(s.vel.u, thr, loads.surge_bias, &self.speed, h);
            let (v, r) = sway_yaw_dynamics_step(s.vel.v, s.vel.r, rud, loads.yaw_bias, &self.sway_yaw, h);
            s = VehicleState::new(pose, BodyVelocity::new(u, v, r));
        }
        self.state = s;
        Ok((left, right))
    }

    /// Stops all motion in place.
    pub fn halt(&mut self) {
        self.state.vel = BodyVelocity::default();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use usv_core::control::{ClosedLoopPolicy, FrozenServo, IntegratorState, LqrPiGains};
    use usv_core::vehicle::{ClosedLoopModel, DisturbanceVector};

    #[test]
    fn nominal_truth_matches_closed_loop_model() {
        let s0 = VehicleState::new(Pose::new(1.0, 2.0, 0.3), BodyVelocity::new(0.9, 0.01, 0.02));
        let policy = ClosedLoopPolicy::LqrPi(FrozenServo {
            gains: LqrPiGains::default(),
            integ: IntegratorState { e_u_i: -4.2, e_r_i: 0.01 },
            bias_thr: 0.0,
            bias_rud: 0.0,
        });
        let model = ClosedLoopModel::default();
        let mut truth = TruthVehicle::new(s0, 1.0, 1.0);
        let mut expected = s0;
        for _ in 0..30 {
            let (thr, rud) = policy.command(&truth.state);
            // four base ticks make one controller period
            for _ in 0..4 {
                truth.step(thr, rud, &PlantLoads::default(), 0.025).unwrap();
            }
            expected = model.step(&expected, &policy, &DisturbanceVector::zero(), 0.1).unwrap();
            let (a, b) = (truth.state.to_array(), expected.to_array());
            for i in 0..6 {
                assert!((a[i] - b[i]).abs() < 1e-9, "component {i}: {} vs {}", a[i], b[i]);
            }
        }
    }

    #[test]
    fn left_fault_halves_left_thruster() {
        let t = TruthVehicle::new(VehicleState::default(), 1.0, 1.0);
        let fault = FaultConfig {
            thrust_factor_l: 0.5,
            ..FaultConfig::identity()
        };
        assert_eq!(t.delivered(50.0, 0.0, &fault), (25.0, 50.0));
    }

    #[test]
    fn saturation_follows_the_fault() {
        let t = TruthVehicle::new(VehicleState::default(), 1.0, 1.0);
        let fault = FaultConfig::identity().with_rotational_bias(30.0);
        // the bias lands on an already saturated left command
        assert_eq!(t.delivered(90.0, 10.0, &fault), (100.0, 42.0));
    }

    #[test]
    fn current_drifts_a_stopped_hull() {
        let mut t = TruthVehicle::new(VehicleState::default(), 1.0, 1.0);
        let loads = PlantLoads {
            current: (0.0, 0.2),
            ..PlantLoads::default()
        };
        for _ in 0..40 {
            t.step(0.0, 0.0, &loads, 0.025).unwrap();
        }
        assert!((t.state.pose.y - 0.2).abs() < 1e-12);
        assert_eq!(t.state.pose.x, 0.0);
    }

    #[test]
    fn matched_surge_bias_slows_the_hull() {
        let mut a = TruthVehicle::new(VehicleState::default(), 1.0, 1.0);
        let mut b = a.clone();
        let drogue = PlantLoads {
            surge_bias: -15.0,
            ..PlantLoads::default()
        };
        for _ in 0..200 {
            a.step(40.0, 0.0, &PlantLoads::default(), 0.025).unwrap();
            b.step(40.0, 0.0, &drogue, 0.025).unwrap();
        }
        let expect = |thr: f64| 0.618 * thr / 24.0;
        assert!((a.state.vel.u - expect(40.0)).abs() < 1e-6);
        assert!((b.state.vel.u - expect(25.0)).abs() < 1e-6);
    }
}
