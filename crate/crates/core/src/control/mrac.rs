//! Model reference adaptive augmentation of an LQR-PI servo channel.
//!
//! The adaptive term is `u_ad = -theta' phi` with `phi = [u_bl, 1, rbf(s)]`.
//! With the tracking error taken as plant minus reference, the weights move
//! along `+Gamma phi (e' P B)`; this is the sign that makes the usual
//! Lyapunov function non-increasing.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lqr_pi::ServoDesign;
use super::rbf::RbfRegressor;
use super::riccati::solve_lyapunov;
use crate::error::{Error, Result};

/// Upper projection bound of the baseline-scaling weight `theta_0`. Keeping
/// it below one means the adaptive term can never cancel or reverse the
/// baseline; 0.5 admits a plant up to twice as effective as modelled.
pub const BASELINE_WEIGHT_MAX: f64 = 0.5;

/// Lower projection bound of `theta_0`: `1 - 1/0.3`, a plant down to 30%
/// of its modelled effectiveness. Without it the baseline weight absorbs
/// constant matched disturbances that belong to the bias weight.
pub const BASELINE_WEIGHT_MIN: f64 = -2.5;

/// Tunable adaptation parameters of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptationConfig {
    /// Scalar adaptation rate; the gain matrix is `gamma * I`.
    pub gamma: f64,
    /// Linear deadzone on the tracking error norm.
    pub deadzone: f64,
    /// Symmetric rectangular projection bound for every weight.
    pub bound: f64,
}

/// Fixed design data of one adaptive channel.
#[derive(Debug, Clone, PartialEq)]
pub struct MracChannel {
    /// Plant extended-state matrix, used to propagate the reference model.
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub k: DVector<f64>,
    pub a_ref: DMatrix<f64>,
    pub b_ref: DVector<f64>,
    pub p: DMatrix<f64>,
    /// Precomputed `P B`.
    pub pb: DVector<f64>,
    pub gamma: DMatrix<f64>,
    pub deadzone: f64,
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
    pub regressor: RbfRegressor,
    /// Largest integration step used for the reference model.
    pub max_substep: f64,
}

impl MracChannel {
    /// Builds a channel around a servo design and baseline gain row `k`.
    pub fn new(
        design: &ServoDesign,
        k: DVector<f64>,
        regressor: RbfRegressor,
        cfg: AdaptationConfig,
    ) -> Result<Self> {
        if !(cfg.gamma > 0.0) || !(cfg.deadzone >= 0.0) || !(cfg.bound > 0.0) {
            return Err(Error::InvalidArgument(format!("bad adaptation config {cfg:?}")));
        }
        let n = design.a.nrows();
        let a_ref = design.reference_matrix(&k);
        let p = solve_lyapunov(&a_ref, &DMatrix::identity(n, n))?;
        let pb = &p * &design.b;
        let m = regressor.len() + 1;
        let mut upper = DVector::from_element(m, cfg.bound);
        upper[0] = cfg.bound.min(BASELINE_WEIGHT_MAX);
        let mut lower = DVector::from_element(m, -cfg.bound);
        lower[0] = (-cfg.bound).max(BASELINE_WEIGHT_MIN);
        Ok(Self {
            a: design.a.clone(),
            b: design.b.clone(),
            k,
            a_ref,
            b_ref: design.reference_input(),
            p,
            pb,
            gamma: DMatrix::identity(m, m) * cfg.gamma,
            deadzone: cfg.deadzone,
            lower,
            upper,
            regressor,
            max_substep: 0.005,
        })
    }

    /// Number of adaptive weights.
    pub fn weight_count(&self) -> usize {
        self.regressor.len() + 1
    }

    /// Extended regressor `[u_bl, 1, rbf(s)...]`.
    pub fn regressor_vector(&self, u_bl: f64, s: f64) -> DVector<f64> {
        let mut phi = DVector::zeros(self.weight_count());
        phi[0] = u_bl;
        for (slot, value) in phi.iter_mut().skip(1).zip(self.regressor.eval(s)) {
            *slot = value;
        }
        phi
    }

    pub fn within_bounds(&self, theta: &DVector<f64>) -> bool {
        theta
            .iter()
            .zip(self.lower.iter().zip(self.upper.iter()))
            .all(|(t, (lo, hi))| *t >= *lo && *t <= *hi)
    }
}

/// Adaptive weights and reference-model state of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct MracState {
    pub theta_hat: DVector<f64>,
    /// Reference extended state in the same order as the plant extended state.
    pub x_ref: DVector<f64>,
}

impl MracState {
    pub fn new(channel: &MracChannel, x0: DVector<f64>) -> Self {
        Self {
            theta_hat: DVector::zeros(channel.weight_count()),
            x_ref: x0,
        }
    }
}

/// Output of one adaptive step.
#[derive(Debug, Clone, PartialEq)]
pub struct MracOutput {
    pub u_ad: f64,
    pub error_norm: f64,
    pub state: MracState,
}

/// One control-period update.
///
/// `plant` is the measured extended state (integrator first), `s` the
/// regressor input, `y_cmd` the command fed to the reference model.
pub fn mrac_step(
    channel: &MracChannel,
    state: &MracState,
    plant: &DVector<f64>,
    y_cmd: f64,
    u_bl: f64,
    s: f64,
    dt: f64,
) -> MracOutput {
    let e = plant - &state.x_ref;
    let error_norm = e.norm();
    let phi = channel.regressor_vector(u_bl, s);

    let mut theta = state.theta_hat.clone();
    if error_norm > channel.deadzone {
        let scale = (error_norm - channel.deadzone) / error_norm;
        let epb = e.dot(&channel.pb) * scale;
        theta += &channel.gamma * &phi * (dt * epb);
        for i in 0..theta.len() {
            theta[i] = theta[i].clamp(channel.lower[i], channel.upper[i]);
        }
    }
    let u_ad = -theta.dot(&phi);

    MracOutput {
        u_ad,
        error_norm,
        state: MracState {
            theta_hat: theta,
            x_ref: advance_reference(channel, &state.x_ref, y_cmd, dt),
        },
    }
}

/// Propagates the reference model over one control period under the same
/// zero-order-hold baseline law the plant receives.
pub fn advance_reference(
    channel: &MracChannel,
    x_ref: &DVector<f64>,
    y_cmd: f64,
    dt: f64,
) -> DVector<f64> {
    let u_ref = -channel.k.dot(x_ref);
    let n = (dt / channel.max_substep).ceil().max(1.0) as usize;
    let h = dt / n as f64;
    let mut x = x_ref.clone();
    // The integrator row is a plain Euler sum of the output error.
    let integ = x[0] + dt * ((channel.a.row(0) * &x)[0] + channel.b_ref[0] * y_cmd);
    for _ in 0..n {
        let dx = &channel.a * &x + &channel.b * u_ref;
        x += dx * h;
    }
    x[0] = integ;
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vehicle::{LinearSpeedModel, LinearSwayYawModel};

    fn speed_channel() -> MracChannel {
        let design = ServoDesign::speed(&LinearSpeedModel::default());
        let k = design.gain().unwrap();
        MracChannel::new(
            &design,
            k,
            RbfRegressor::speed_default(),
            AdaptationConfig {
                gamma: 10.0,
                deadzone: 0.02,
                bound: 50.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn zero_error_leaves_weights_bit_identical() {
        let ch = speed_channel();
        let mut st = MracState::new(&ch, DVector::from_vec(vec![0.1, 0.9]));
        st.theta_hat.iter_mut().enumerate().for_each(|(i, t)| *t = 0.1 * i as f64);
        let plant = st.x_ref.clone();
        let out = mrac_step(&ch, &st, &plant, 1.0, 10.0, 0.9, 0.1);
        assert_eq!(out.state.theta_hat, st.theta_hat);
        let again = mrac_step(&ch, &st, &plant, 1.0, 10.0, 0.9, 0.1);
        assert_eq!(out.u_ad.to_bits(), again.u_ad.to_bits());
    }

    #[test]
    fn zero_weights_give_zero_command() {
        let ch = speed_channel();
        let st = MracState::new(&ch, DVector::zeros(2));
        let out = mrac_step(&ch, &st, &DVector::zeros(2), 0.0, 5.0, 1.0, 0.1);
        assert_eq!(out.u_ad, 0.0);
    }

    #[test]
    fn deadzone_freezes_small_errors() {
        let ch = speed_channel();
        let st = MracState::new(&ch, DVector::zeros(2));
        let plant = DVector::from_vec(vec![0.01, 0.01]);
        let out = mrac_step(&ch, &st, &plant, 0.0, 5.0, 1.0, 0.1);
        assert_eq!(out.state.theta_hat, st.theta_hat);
    }

    #[test]
    fn projection_holds_under_large_errors() {
        let ch = speed_channel();
        let mut st = MracState::new(&ch, DVector::zeros(2));
        for _ in 0..1000 {
            let plant = DVector::from_vec(vec![50.0, -40.0]);
            st = mrac_step(&ch, &st, &plant, 0.0, 80.0, 1.0, 0.1).state;
            st.x_ref = DVector::zeros(2);
            assert!(ch.within_bounds(&st.theta_hat));
        }
        assert!(st.theta_hat.iter().any(|t| t.abs() == 50.0));
    }

    #[test]
    fn reference_model_converges_to_command() {
        let design = ServoDesign::yaw(&LinearSwayYawModel::default());
        let k = design.gain().unwrap();
        let ch = MracChannel::new(
            &design,
            k,
            RbfRegressor::yaw_default(),
            AdaptationConfig {
                gamma: 5.0,
                deadzone: 0.02,
                bound: 50.0,
            },
        )
        .unwrap();
        let mut x = DVector::zeros(3);
        for _ in 0..3000 {
            x = advance_reference(&ch, &x, 0.1, 0.1);
        }
        assert!((x[2] - 0.1).abs() < 1e-6);
    }
}
