//! Scenario configuration, read from TOML. See `docs/scenario-schema.md`.

use serde::{Deserialize, Serialize};
use usv_core::control::{AdaptationConfig, ControllerKind, PidGains};
use usv_core::disturbance::{BankEffectConfig, FaultConfig, HullWashConfig};
use usv_core::guidance::{TracklineGains, TurnDirection, UnrepGains};
use usv_core::reach::UnsafeRegion;

use crate::error::{SimError, SimResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    /// Default controller; the command line may override it.
    #[serde(default)]
    pub controller: Option<ControllerKind>,
    /// Simulated time limit, seconds.
    pub duration: f64,
    /// Vehicle whose metrics stand for the run in suite tables.
    #[serde(default)]
    pub primary_vehicle: usize,
    #[serde(default)]
    pub rates: Rates,
    #[serde(default)]
    pub sensors: SensorConfig,
    #[serde(default)]
    pub control: ControlOverrides,
    pub vehicles: Vec<VehicleConfig>,
    #[serde(default)]
    pub disturbances: Vec<DisturbanceEvent>,
    #[serde(default)]
    pub hull_wash: Option<HullWashConfig>,
    #[serde(default)]
    pub canal: Option<CanalConfig>,
    #[serde(default)]
    pub estimator: Option<EstimatorConfig>,
    #[serde(default)]
    pub certify: Option<CertifyConfig>,
}

/// Process rates in Hz. Every rate must divide `base`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Rates {
    pub base: u32,
    pub gps: u32,
    pub imu: u32,
    pub nav: u32,
    pub helm: u32,
    pub controller: u32,
    pub estimator: u32,
    pub certify: u32,
    pub log: u32,
}

impl Default for Rates {
    fn default() -> Self {
        Self {
            base: 40,
            gps: 5,
            imu: 40,
            nav: 20,
            helm: 4,
            controller: 10,
            estimator: 10,
            certify: 10,
            log: 10,
        }
    }
}

impl Rates {
    pub fn base_dt(&self) -> f64 {
        1.0 / self.base as f64
    }

    /// Base ticks between two invocations of a process at `rate`.
    pub fn every(&self, rate: u32) -> u64 {
        (self.base / rate) as u64
    }

    fn validate(&self) -> SimResult<()> {
        if self.base == 0 {
            return Err(SimError::Config("base rate must be positive".into()));
        }
        for (name, r) in [
            ("gps", self.gps),
            ("imu", self.imu),
            ("nav", self.nav),
            ("helm", self.helm),
            ("controller", self.controller),
            ("estimator", self.estimator),
            ("certify", self.certify),
            ("log", self.log),
        ] {
            if r == 0 || r > self.base || self.base % r != 0 {
                return Err(SimError::Config(format!(
                    "{name} rate {r} Hz does not divide the {} Hz base tick",
                    self.base
                )));
            }
        }
        Ok(())
    }
}

/// Gaussian measurement noise, one standard deviation per channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorConfig {
    pub gps_sigma: f64,
    pub heading_sigma_deg: f64,
    pub yaw_rate_sigma_deg: f64,
    pub velocity_sigma: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            gps_sigma: 0.5,
            heading_sigma_deg: 1.0,
            yaw_rate_sigma_deg: 0.5,
            velocity_sigma: 0.02,
        }
    }
}

impl SensorConfig {
    pub fn noiseless() -> Self {
        Self {
            gps_sigma: 0.0,
            heading_sigma_deg: 0.0,
            yaw_rate_sigma_deg: 0.0,
            velocity_sigma: 0.0,
        }
    }
}

/// Optional replacements for the built-in controller tuning.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlOverrides {
    pub pid: Option<PidGains>,
    pub speed_adaptation: Option<AdaptationConfig>,
    pub yaw_adaptation: Option<AdaptationConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleConfig {
    pub name: String,
    pub start: StartState,
    /// Truth-only control effectiveness of the surge channel.
    #[serde(default = "one")]
    pub lambda_speed: f64,
    /// Truth-only control effectiveness of the yaw channel.
    #[serde(default = "one")]
    pub lambda_yaw: f64,
    pub mission: MissionConfig,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartState {
    pub x: f64,
    pub y: f64,
    pub heading_deg: f64,
    #[serde(default)]
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineGuidance {
    Pd,
    L1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MissionConfig {
    /// Straight legs between two vertices joined by Williamson turns.
    Legrun {
        vx1: [f64; 2],
        vx2: [f64; 2],
        turn_radii: Vec<f64>,
        #[serde(default = "starboard")]
        first_turn: TurnDirection,
        speed: f64,
        #[serde(default = "pd")]
        guidance: LineGuidance,
        #[serde(default)]
        gains: TracklineGains,
        #[serde(default = "default_l1")]
        l1: f64,
    },
    /// One straight trackline.
    Line {
        start: [f64; 2],
        end: [f64; 2],
        speed: f64,
        #[serde(default = "pd")]
        guidance: LineGuidance,
        #[serde(default)]
        gains: TracklineGains,
        #[serde(default = "default_l1")]
        l1: f64,
    },
    /// Station keeping alongside another vehicle.
    Unrep {
        guide: usize,
        /// `(along, cross)` in the guide's body frame, cross positive to starboard.
        offset: [f64; 2],
        /// Delay on the shared guide state, seconds.
        #[serde(default)]
        latency: f64,
        min_separation: f64,
        /// Station cross error that triggers an emergency abort.
        #[serde(default)]
        abort_cross_error: Option<f64>,
        /// Seconds allowed to reach station before the abort check is armed.
        #[serde(default)]
        acquire_time: f64,
        #[serde(default)]
        gains: UnrepGains,
    },
}

fn starboard() -> TurnDirection {
    TurnDirection::Starboard
}

fn pd() -> LineGuidance {
    LineGuidance::Pd
}

fn default_l1() -> f64 {
    6.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisturbanceKind {
    Fault,
    Drogue,
    Sail,
    Current,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Trigger {
    Start,
    /// Simulated time in seconds.
    Time { at: f64 },
    /// Arc length along the vehicle's own path.
    Station { at: f64 },
    /// A named progress event of the vehicle's path, e.g. `turn-1-complete`.
    Event { name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceEvent {
    pub name: String,
    pub kind: DisturbanceKind,
    /// Target vehicle index; all vehicles when absent.
    #[serde(default)]
    pub vehicle: Option<usize>,
    pub trigger: Trigger,
    #[serde(default)]
    pub fault: Option<FaultConfig>,
    #[serde(default)]
    pub surge_bias: f64,
    #[serde(default)]
    pub yaw_bias: f64,
    /// Water current `(north, east)` in m/s.
    #[serde(default)]
    pub current: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanalConfig {
    pub start: [f64; 2],
    pub end: [f64; 2],
    #[serde(default)]
    pub bank: BankEffectConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    pub window: usize,
    pub max_iterations: usize,
    /// Components that carry an estimated disturbance.
    pub mask: [bool; 6],
    /// Per-step drift bound as a fraction of the current estimate.
    pub drift_fraction: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            window: 20,
            max_iterations: 20,
            mask: [true; 6],
            drift_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertifyConfig {
    pub horizon: usize,
    pub gamma: f64,
    pub unsafe_region: UnsafeRegion,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            horizon: 20,
            gamma: 3.0,
            unsafe_region: UnsafeRegion::empty(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> SimResult<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn validate(&self) -> SimResult<()> {
        let bad = |m: String| Err(SimError::Config(m));
        self.rates.validate()?;
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if self.vehicles.is_empty() || self.vehicles.len() > 2 {
            return bad(format!("expected 1 or 2 vehicles, got {}", self.vehicles.len()));
        }
        if self.primary_vehicle >= self.vehicles.len() {
            return bad(format!("primary_vehicle {} out of range", self.primary_vehicle));
        }
        let s = &self.sensors;
        if [s.gps_sigma, s.heading_sigma_deg, s.yaw_rate_sigma_deg, s.velocity_sigma]
            .iter()
            .any(|v| !(*v >= 0.0) || !v.is_finite())
        {
            return bad("sensor standard deviations must be finite and non-negative".into());
        }
        let dt_base = self.rates.base_dt();
        for (i, v) in self.vehicles.iter().enumerate() {
            if !(v.lambda_speed > 0.0) || !(v.lambda_yaw > 0.0) {
                return bad(format!("vehicle {i}: control effectiveness must be positive"));
            }
            match &v.mission {
                MissionConfig::Legrun { speed, l1, .. } => {
                    if !(*speed > 0.0) || !(*l1 > 0.0) {
                        return bad(format!("vehicle {i}: speed and l1 must be positive"));
                    }
                }
                MissionConfig::Line { start, end, speed, l1, .. } => {
                    if (start[0] - end[0]).hypot(start[1] - end[1]) < 1e-6 {
                        return bad(format!("vehicle {i}: line endpoints coincide"));
                    }
                    if !(*speed > 0.0) || !(*l1 > 0.0) {
                        return bad(format!("vehicle {i}: speed and l1 must be positive"));
                    }
                }
                MissionConfig::Unrep { guide, latency, min_separation, .. } => {
                    if *guide == i || *guide >= self.vehicles.len() {
                        return bad(format!("vehicle {i}: guide index {guide} is invalid"));
                    }
                    if matches!(self.vehicles[*guide].mission, MissionConfig::Unrep { .. }) {
                        return bad(format!("vehicle {i}: the guide must follow a path"));
                    }
                    if !(*latency >= 0.0) {
                        return bad(format!("vehicle {i}: latency must be non-negative"));
                    }
                    let ticks = latency / dt_base;
                    if (ticks - ticks.round()).abs() > 1e-9 {
                        return bad(format!("vehicle {i}: latency must be a multiple of the base tick"));
                    }
                    if !(*min_separation >= 0.0) {
                        return bad(format!("vehicle {i}: min_separation must be non-negative"));
                    }
                }
            }
        }
        for d in &self.disturbances {
            if let Some(v) = d.vehicle {
                if v >= self.vehicles.len() {
                    return bad(format!("disturbance {:?} targets missing vehicle {v}", d.name));
                }
            }
            match d.kind {
                DisturbanceKind::Fault if d.fault.is_none() => {
                    return bad(format!("fault {:?} needs a [fault] table", d.name))
                }
                DisturbanceKind::Current if d.current.is_none() => {
                    return bad(format!("current {:?} needs a current vector", d.name))
                }
                _ => {}
            }
            if let Some(f) = &d.fault {
                let factors = [f.rudder_factor, f.thrust_factor_l, f.thrust_factor_r];
                if factors.iter().any(|x| !(*x >= 0.0)) {
                    return bad(format!("fault {:?}: factors must be non-negative", d.name));
                }
            }
            if let Trigger::Station { .. } | Trigger::Event { .. } = d.trigger {
                let targets: Vec<usize> = match d.vehicle {
                    Some(v) => vec![v],
                    None => (0..self.vehicles.len()).collect(),
                };
                if targets
                    .iter()
                    .any(|&v| matches!(self.vehicles[v].mission, MissionConfig::Unrep { .. }))
                {
                    return bad(format!(
                        "disturbance {:?}: progress triggers need a vehicle with a path",
                        d.name
                    ));
                }
            }
        }
        if let Some(c) = &self.canal {
            let b = &c.bank;
            if !(b.deadzone_width > 0.0 && b.deadzone_width < b.canal_width) || b.min_bias > b.max_bias {
                return bad("canal: need 0 < deadzone < width and min_bias <= max_bias".into());
            }
            if (c.start[0] - c.end[0]).hypot(c.start[1] - c.end[1]) < 1e-6 {
                return bad("canal: centerline endpoints coincide".into());
            }
        }
        if let Some(h) = &self.hull_wash {
            if !(h.range > 0.0) {
                return bad("hull_wash: range must be positive".into());
            }
        }
        if let Some(e) = &self.estimator {
            if e.window < 2 {
                return bad("estimator: window must be at least 2".into());
            }
            if self.rates.estimator != self.rates.controller {
                return bad("estimator rate must equal the controller rate".into());
            }
        }
        if let Some(c) = &self.certify {
            if self.estimator.is_none() {
                return bad("certify needs the estimator".into());
            }
            if self.rates.certify != self.rates.estimator {
                return bad("certify rate must equal the estimator rate".into());
            }
            if c.horizon == 0 || !(c.gamma > 0.0) {
                return bad("certify: horizon and gamma must be positive".into());
            }
        }
        Ok(())
    }
}
