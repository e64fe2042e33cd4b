//! LQR-PI servomechanism for the surge and yaw-rate channels.
//!
//! The extended state stacks the output integrator in front of the plant
//! state: `[e_uI, u]` for speed and `[e_rI, v, r]` for yaw. Both laws are
//! applied as negative feedback `u = -K x`, with the integrator accumulating
//! `y - y_d` and back-calculation anti-windup.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::riccati::solve_care_lqr;
use crate::error::Result;
use crate::vehicle::{LinearSpeedModel, LinearSwayYawModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LqrPiGains {
    pub k_u_p: f64,
    pub k_u_i: f64,
    pub k_v_p: f64,
    pub k_r_p: f64,
    pub k_r_i: f64,
    pub k_u_aw: f64,
    pub k_r_aw: f64,
}

impl Default for LqrPiGains {
    /// Gains as published for the Heron (not re-synthesized).
    fn default() -> Self {
        Self {
            k_u_p: 0.36556,
            k_u_i: 8.6603,
            k_v_p: -0.33,
            k_r_p: 8.44,
            k_r_i: 100.0,
            k_u_aw: 0.1407,
            k_r_aw: 1.1667,
        }
    }
}

/// Actuator command range seen by one controller channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Saturation {
    pub min: f64,
    pub max: f64,
}

impl Saturation {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn apply(&self, v: f64) -> f64 {
        v.clamp(self.min, self.max)
    }
}

pub const THRUST_LIMITS: Saturation = Saturation::new(-100.0, 100.0);
pub const RUDDER_LIMITS: Saturation = Saturation::new(-50.0, 50.0);

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IntegratorState {
    pub e_u_i: f64,
    pub e_r_i: f64,
}

/// Extended-state design matrices `(A, B, Q, R)` of one servo channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ServoDesign {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub q: DMatrix<f64>,
    pub r: f64,
}

impl ServoDesign {
    /// Speed channel on `[e_uI, u]` with the published weights.
    pub fn speed(model: &LinearSpeedModel) -> Self {
        Self {
            a: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, model.a_p1]),
            b: DVector::from_vec(vec![0.0, model.b_p1]),
            q: DMatrix::from_diagonal(&DVector::from_vec(vec![150.0, 1.0])),
            r: 2.0,
        }
    }

    /// Yaw channel on `[e_rI, v, r]` with the published weights.
    pub fn yaw(model: &LinearSwayYawModel) -> Self {
        let ap = &model.a_p;
        Self {
            a: DMatrix::from_row_slice(
                3,
                3,
                &[
                    0.0, 0.0, 1.0, //
                    0.0, ap[0][0], ap[0][1], //
                    0.0, ap[1][0], ap[1][1],
                ],
            ),
            b: DVector::from_vec(vec![0.0, model.b_p[0], model.b_p[1]]),
            q: DMatrix::from_diagonal(&DVector::from_vec(vec![100.0, 10.0, 10.0])),
            r: 0.01,
        }
    }

    /// LQR gain row in extended-state order.
    pub fn gain(&self) -> Result<DVector<f64>> {
        Ok(solve_care_lqr(&self.a, &self.b, &self.q, self.r)?.0)
    }

    /// Reference-model matrix `A - B K`.
    pub fn reference_matrix(&self, k: &DVector<f64>) -> DMatrix<f64> {
        &self.a - &self.b * k.transpose()
    }

    /// Reference input matrix: the command enters only the integrator row.
    pub fn reference_input(&self) -> DVector<f64> {
        let mut b = DVector::zeros(self.a.nrows());
        b[0] = -1.0;
        b
    }
}

/// Re-synthesizes both channels from the plant models, keeping the
/// published anti-windup gains.
pub fn synthesize_gains(
    speed: &LinearSpeedModel,
    yaw: &LinearSwayYawModel,
) -> Result<LqrPiGains> {
    let ks = ServoDesign::speed(speed).gain()?;
    let ky = ServoDesign::yaw(yaw).gain()?;
    let published = LqrPiGains::default();
    Ok(LqrPiGains {
        k_u_i: ks[0],
        k_u_p: ks[1],
        k_r_i: ky[0],
        k_v_p: ky[1],
        k_r_p: ky[2],
        ..published
    })
}

/// Saturated surge thrust command and the updated integrator.
pub fn lqr_pi_speed_step(
    u_sog: f64,
    u_des: f64,
    integ: IntegratorState,
    gains: &LqrPiGains,
    limits: Saturation,
    dt: f64,
) -> (f64, IntegratorState) {
    speed_law(u_sog, u_des, integ, gains, limits, 0.0, 1.0, dt)
}

/// Saturated rudder command and the updated integrator.
pub fn lqr_pi_yaw_step(
    v: f64,
    r: f64,
    r_des: f64,
    integ: IntegratorState,
    gains: &LqrPiGains,
    limits: Saturation,
    dt: f64,
) -> (f64, IntegratorState) {
    yaw_law(v, r, r_des, integ, gains, limits, 0.0, 1.0, dt)
}

/// Baseline surge command before saturation.
pub fn speed_baseline(u_sog: f64, integ: &IntegratorState, gains: &LqrPiGains) -> f64 {
    -(gains.k_u_p * u_sog + gains.k_u_i * integ.e_u_i)
}

/// Baseline rudder command before saturation.
pub fn yaw_baseline(v: f64, r: f64, integ: &IntegratorState, gains: &LqrPiGains) -> f64 {
    -(gains.k_v_p * v + gains.k_r_p * r + gains.k_r_i * integ.e_r_i)
}

/// Integrator correction from `d e_I/dt = k_aw (raw - sat)` over one period.
///
/// While saturated, `raw` falls by `k_i` per unit of `e_I`, so the term is
/// integrated exactly; an Euler step would overshoot once `k_aw k_i dt > 2`
/// (the yaw channel at 10 Hz).
pub(crate) fn back_calculation(excess: f64, k_i: f64, k_aw: f64, dt: f64) -> f64 {
    let rate = k_aw * k_i;
    if rate > 0.0 {
        excess / k_i * -(-rate * dt).exp_m1()
    } else {
        dt * k_aw * excess
    }
}

/// Speed law with an additive term inside the saturation, so that
/// back-calculation sees the total command. `scale` is the sensitivity of
/// the total command to the baseline (one unless the additive term itself
/// scales the baseline).
#[allow(clippy::too_many_arguments)]
pub(crate) fn speed_law(
    u_sog: f64,
    u_des: f64,
    integ: IntegratorState,
    gains: &LqrPiGains,
    limits: Saturation,
    extra: f64,
    scale: f64,
    dt: f64,
) -> (f64, IntegratorState) {
    let raw = speed_baseline(u_sog, &integ, gains) + extra;
    let sat = limits.apply(raw);
    let aw = back_calculation(raw - sat, gains.k_u_i * scale, gains.k_u_aw, dt);
    let e_u_i = integ.e_u_i + dt * (u_sog - u_des) + aw;
    (sat, IntegratorState { e_u_i, ..integ })
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn yaw_law(
    v: f64,
    r: f64,
    r_des: f64,
    integ: IntegratorState,
    gains: &LqrPiGains,
    limits: Saturation,
    extra: f64,
    scale: f64,
    dt: f64,
) -> (f64, IntegratorState) {
    let raw = yaw_baseline(v, r, &integ, gains) + extra;
    let sat = limits.apply(raw);
    let aw = back_calculation(raw - sat, gains.k_r_i * scale, gains.k_r_aw, dt);
    let e_r_i = integ.e_r_i + dt * (r - r_des) + aw;
    (sat, IntegratorState { e_r_i, ..integ })
}
