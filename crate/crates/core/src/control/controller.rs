//! Stateful inner loop combining the three controller options behind one interface.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::lqr_pi::{speed_baseline, speed_law, yaw_baseline, yaw_law, ServoDesign};
use super::mrac::{mrac_step, AdaptationConfig, MracChannel, MracState};
use super::pid::{pid_baseline_step, PidGains, PidState};
use super::policy::{ClosedLoopPolicy, FrozenPid, FrozenServo};
use super::rbf::RbfRegressor;
use super::{IntegratorState, LqrPiGains, RUDDER_LIMITS, THRUST_LIMITS};
use crate::error::Result;
use crate::vehicle::{LinearSpeedModel, LinearSwayYawModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKind {
    Pid,
    LqrPi,
    Mrac,
}

impl ControllerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControllerKind::Pid => "pid",
            ControllerKind::LqrPi => "lqr-pi",
            ControllerKind::Mrac => "mrac",
        }
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pid" => Ok(ControllerKind::Pid),
            "lqr-pi" | "lqrpi" | "lqr_pi" => Ok(ControllerKind::LqrPi),
            "mrac" => Ok(ControllerKind::Mrac),
            other => Err(crate::Error::InvalidArgument(format!("unknown controller {other:?}"))),
        }
    }
}

impl std::fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerLoopConfig {
    pub kind: ControllerKind,
    pub gains: LqrPiGains,
    pub pid: PidGains,
    pub speed_adaptation: AdaptationConfig,
    pub yaw_adaptation: AdaptationConfig,
}

impl InnerLoopConfig {
    pub fn new(kind: ControllerKind) -> Self {
        Self {
            kind,
            gains: LqrPiGains::default(),
            pid: PidGains::default(),
            speed_adaptation: AdaptationConfig {
                gamma: 10.0,
                deadzone: 0.02,
                bound: 50.0,
            },
            yaw_adaptation: AdaptationConfig {
                gamma: 5.0,
                deadzone: 0.02,
                bound: 50.0,
            },
        }
    }
}

/// Navigation solution handed to the inner loop.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Measurement {
    pub u: f64,
    pub v: f64,
    pub r: f64,
    pub theta: f64,
}

/// References produced by the helm filter.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Reference {
    pub u_des: f64,
    pub r_des: f64,
    pub theta_des: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InnerLoopOutput {
    pub u_thr: f64,
    pub u_rud: f64,
    pub u_ad_thr: f64,
    pub u_ad_rud: f64,
    /// Reference-model tracking error norms, zero for non-adaptive loops.
    pub speed_error_norm: f64,
    pub yaw_error_norm: f64,
}

#[derive(Debug, Clone)]
struct Adaptive {
    channel: MracChannel,
    state: Option<MracState>,
}

impl Adaptive {
    fn step(&mut self, plant: DVector<f64>, y_cmd: f64, u_bl: f64, s: f64, dt: f64) -> (f64, f64) {
        let state = self
            .state
            .take()
            .unwrap_or_else(|| MracState::new(&self.channel, plant.clone()));
        let out = mrac_step(&self.channel, &state, &plant, y_cmd, u_bl, s, dt);
        self.state = Some(out.state);
        (out.u_ad, out.error_norm)
    }

    /// `1 - theta_0`: how strongly the total command follows the baseline.
    fn baseline_sensitivity(&self) -> f64 {
        self.theta().map_or(1.0, |t| 1.0 - t[0])
    }

    fn theta(&self) -> Option<&DVector<f64>> {
        self.state.as_ref().map(|s| &s.theta_hat)
    }
}

/// One vehicle's inner-loop controller with all of its state.
#[derive(Debug, Clone)]
pub struct InnerLoop {
    cfg: InnerLoopConfig,
    integ: IntegratorState,
    pid: PidState,
    speed_ad: Option<Adaptive>,
    yaw_ad: Option<Adaptive>,
    last: InnerLoopOutput,
    applied: Option<ClosedLoopPolicy>,
}

impl InnerLoop {
    pub fn new(
        cfg: InnerLoopConfig,
        speed: &LinearSpeedModel,
        sway_yaw: &LinearSwayYawModel,
    ) -> Result<Self> {
        let (speed_ad, yaw_ad) = if cfg.kind == ControllerKind::Mrac {
            let g = &cfg.gains;
            let s = MracChannel::new(
                &ServoDesign::speed(speed),
                DVector::from_vec(vec![g.k_u_i, g.k_u_p]),
                RbfRegressor::speed_default(),
                cfg.speed_adaptation,
            )?;
            let y = MracChannel::new(
                &ServoDesign::yaw(sway_yaw),
                DVector::from_vec(vec![g.k_r_i, g.k_v_p, g.k_r_p]),
                RbfRegressor::yaw_default(),
                cfg.yaw_adaptation,
            )?;
            (
                Some(Adaptive { channel: s, state: None }),
                Some(Adaptive { channel: y, state: None }),
            )
        } else {
            (None, None)
        };
        Ok(Self {
            cfg,
            integ: IntegratorState::default(),
            pid: PidState::default(),
            speed_ad,
            yaw_ad,
            last: InnerLoopOutput::default(),
            applied: None,
        })
    }

    pub fn kind(&self) -> ControllerKind {
        self.cfg.kind
    }

    pub fn config(&self) -> &InnerLoopConfig {
        &self.cfg
    }

    pub fn integrators(&self) -> IntegratorState {
        self.integ
    }

    pub fn last_output(&self) -> InnerLoopOutput {
        self.last
    }

    pub fn step(&mut self, m: &Measurement, reference: &Reference, dt: f64) -> InnerLoopOutput {
        let g = self.cfg.gains;
        let out = match self.cfg.kind {
            ControllerKind::Pid => {
                self.applied = Some(ClosedLoopPolicy::Pid(FrozenPid {
                    gains: self.cfg.pid,
                    state: self.pid,
                    u_des: reference.u_des,
                    theta_des: reference.theta_des,
                    dt,
                }));
                let (u_thr, u_rud, pid) = pid_baseline_step(
                    m.u,
                    reference.u_des,
                    m.theta,
                    reference.theta_des,
                    &self.cfg.pid,
                    self.pid,
                    dt,
                );
                self.pid = pid;
                InnerLoopOutput {
                    u_thr,
                    u_rud,
                    ..Default::default()
                }
            }
            ControllerKind::LqrPi | ControllerKind::Mrac => {
                let integ = self.integ;
                let (mut u_ad_thr, mut u_ad_rud) = (0.0, 0.0);
                let (mut en_s, mut en_y) = (0.0, 0.0);
                let (mut scale_s, mut scale_y) = (1.0, 1.0);
                if let Some(ad) = self.speed_ad.as_mut() {
                    let plant = DVector::from_vec(vec![integ.e_u_i, m.u]);
                    let u_bl = speed_baseline(m.u, &integ, &g);
                    (u_ad_thr, en_s) = ad.step(plant, reference.u_des, u_bl, m.u, dt);
                    scale_s = ad.baseline_sensitivity();
                }
                if let Some(ad) = self.yaw_ad.as_mut() {
                    let plant = DVector::from_vec(vec![integ.e_r_i, m.v, m.r]);
                    let u_bl = yaw_baseline(m.v, m.r, &integ, &g);
                    (u_ad_rud, en_y) = ad.step(plant, reference.r_des, u_bl, m.r, dt);
                    scale_y = ad.baseline_sensitivity();
                }
                let (u_thr, i1) = speed_law(m.u, reference.u_des, integ, &g, THRUST_LIMITS, u_ad_thr, scale_s, dt);
                let (u_rud, i2) = yaw_law(m.v, m.r, reference.r_des, integ, &g, RUDDER_LIMITS, u_ad_rud, scale_y, dt);
                let servo = FrozenServo {
                    gains: g,
                    integ,
                    bias_thr: u_ad_thr,
                    bias_rud: u_ad_rud,
                };
                self.applied = Some(if self.cfg.kind == ControllerKind::Mrac {
                    ClosedLoopPolicy::FrozenMrac(servo)
                } else {
                    ClosedLoopPolicy::LqrPi(servo)
                });
                self.integ = IntegratorState {
                    e_u_i: i1.e_u_i,
                    e_r_i: i2.e_r_i,
                };
                InnerLoopOutput {
                    u_thr,
                    u_rud,
                    u_ad_thr,
                    u_ad_rud,
                    speed_error_norm: en_s,
                    yaw_error_norm: en_y,
                }
            }
        };
        self.last = out;
        out
    }

    /// Policy that reproduces the most recent command from the measured
    /// state it was computed from.
    pub fn applied_policy(&self) -> Option<ClosedLoopPolicy> {
        self.applied
    }

    /// Memoryless snapshot of the current law for forward propagation, with
    /// the integrators frozen at their updated values.
    pub fn policy(&self, reference: &Reference, dt: f64) -> ClosedLoopPolicy {
        let servo = |bias_thr, bias_rud| FrozenServo {
            gains: self.cfg.gains,
            integ: self.integ,
            bias_thr,
            bias_rud,
        };
        match self.cfg.kind {
            ControllerKind::LqrPi => ClosedLoopPolicy::LqrPi(servo(0.0, 0.0)),
            ControllerKind::Mrac => {
                ClosedLoopPolicy::FrozenMrac(servo(self.last.u_ad_thr, self.last.u_ad_rud))
            }
            ControllerKind::Pid => ClosedLoopPolicy::Pid(FrozenPid {
                gains: self.cfg.pid,
                state: self.pid,
                u_des: reference.u_des,
                theta_des: reference.theta_des,
                dt,
            }),
        }
    }

    /// Adaptive weights of the speed and yaw channels, if adaptive.
    pub fn adaptive_weights(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let s = self.speed_ad.as_ref()?.theta()?;
        let y = self.yaw_ad.as_ref()?.theta()?;
        Some((s.iter().copied().collect(), y.iter().copied().collect()))
    }

    /// Whether every adaptive weight lies inside its projection bounds.
    pub fn weights_within_bounds(&self) -> bool {
        [&self.speed_ad, &self.yaw_ad].into_iter().flatten().all(|ad| {
            ad.theta()
                .is_none_or(|t| ad.channel.within_bounds(t))
        })
    }
}
