//! Truth-plus-noise stand-ins for the GPS, IMU and navigation filter.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use usv_core::vehicle::{wrap_angle, VehicleState};

use crate::config::{Rates, SensorConfig};

/// Latest navigation solution, each channel held until its sensor updates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NavSolution {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

impl NavSolution {
    pub fn exact(s: &VehicleState) -> Self {
        Self {
            x: s.pose.x,
            y: s.pose.y,
            theta: s.pose.theta,
            u: s.vel.u,
            v: s.vel.v,
            r: s.vel.r,
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.x, self.y, self.theta, self.u, self.v, self.r]
    }

    pub fn to_state(&self) -> VehicleState {
        VehicleState::from_array(self.to_array())
    }
}

pub struct Sensors {
    rng: ChaCha8Rng,
    gps: Normal<f64>,
    heading: Normal<f64>,
    yaw_rate: Normal<f64>,
    velocity: Normal<f64>,
    gps_every: u64,
    imu_every: u64,
    nav_every: u64,
}

impl Sensors {
    /// One independent stream per vehicle, derived from the scenario seed.
    pub fn new(cfg: &SensorConfig, rates: &Rates, seed: u64, vehicle: usize) -> Self {
        let stream = seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(vehicle as u64 + 1));
        let normal = |sd: f64| Normal::new(0.0, sd).expect("validated sigma");
        Self {
            rng: ChaCha8Rng::seed_from_u64(stream),
            gps: normal(cfg.gps_sigma),
            heading: normal(cfg.heading_sigma_deg.to_radians()),
            yaw_rate: normal(cfg.yaw_rate_sigma_deg.to_radians()),
            velocity: normal(cfg.velocity_sigma),
            gps_every: rates.every(rates.gps),
            imu_every: rates.every(rates.imu),
            nav_every: rates.every(rates.nav),
        }
    }

    /// Updates the channels due at base tick `k`.
    pub fn sample(&mut self, k: u64, truth: &VehicleState, nav: &mut NavSolution) {
        if k % self.gps_every == 0 {
            nav.x = truth.pose.x + self.gps.sample(&mut self.rng);
            nav.y = truth.pose.y + self.gps.sample(&mut self.rng);
        }
        if k % self.imu_every == 0 {
            nav.theta = wrap_angle(truth.pose.theta + self.heading.sample(&mut self.rng));
            nav.r = truth.vel.r + self.yaw_rate.sample(&mut self.rng);
        }
        if k % self.nav_every == 0 {
            nav.u = truth.vel.u + self.velocity.sample(&mut self.rng);
            nav.v = truth.vel.v + self.velocity.sample(&mut self.rng);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use usv_core::vehicle::{BodyVelocity, Pose};

    fn truth() -> VehicleState {
        VehicleState::new(Pose::new(3.0, -2.0, 0.5), BodyVelocity::new(1.0, 0.1, 0.02))
    }

    #[test]
    fn noiseless_sensors_report_truth() {
        let mut s = Sensors::new(&SensorConfig::noiseless(), &Rates::default(), 7, 0);
        let mut nav = NavSolution::default();
        s.sample(0, &truth(), &mut nav);
        assert_eq!(nav, NavSolution::exact(&truth()));
    }

    #[test]
    fn channels_hold_between_updates() {
        let rates = Rates::default();
        let mut s = Sensors::new(&SensorConfig::default(), &rates, 7, 0);
        let mut nav = NavSolution::default();
        s.sample(0, &truth(), &mut nav);
        let first = nav;
        // tick 1: only the IMU (40 Hz) updates
        s.sample(1, &truth(), &mut nav);
        assert_eq!((nav.x, nav.y, nav.u, nav.v), (first.x, first.y, first.u, first.v));
        assert_ne!(nav.theta, first.theta);
    }

    #[test]
    fn streams_are_seeded_per_vehicle() {
        let rates = Rates::default();
        let run = |seed, vehicle| {
            let mut s = Sensors::new(&SensorConfig::default(), &rates, seed, vehicle);
            let mut nav = NavSolution::default();
            s.sample(0, &truth(), &mut nav);
            nav
        };
        assert_eq!(run(1, 0), run(1, 0));
        assert_ne!(run(1, 0), run(1, 1));
        assert_ne!(run(1, 0), run(2, 0));
    }

    #[test]
    fn gps_noise_has_configured_spread() {
        let rates = Rates::default();
        let mut s = Sensors::new(&SensorConfig::default(), &rates, 3, 0);
        let mut nav = NavSolution::default();
        let n = 20_000;
        let mut sum2 = 0.0;
        for k in 0..n {
            s.sample(k * rates.every(rates.gps), &truth(), &mut nav);
            sum2 += (nav.x - 3.0).powi(2);
        }
        let sd = (sum2 / n as f64).sqrt();
        // standard error of the sample sd is about sd / sqrt(2n)
        assert!((sd - 0.5).abs() < 3.0 * 0.5 / (2.0 * n as f64).sqrt(), "sd {sd}");
    }
}
