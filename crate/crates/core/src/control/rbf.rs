use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian radial basis functions on a scalar input, with a leading bias element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfRegressor {
    centers: Vec<f64>,
    width: f64,
}

impl RbfRegressor {
    pub fn new(centers: Vec<f64>, width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidArgument(format!("RBF width must be positive, got {width}")));
        }
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("RBF centers"));
        }
        if centers.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("RBF centers must be strictly increasing".into()));
        }
        Ok(Self { centers, width })
    }

    /// `count` evenly spaced centers on `[lo, hi]` with width half the spacing.
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidArgument("need at least two centers".into()));
        }
        let step = (hi - lo) / (count - 1) as f64;
        let centers = (0..count).map(|k| lo + step * k as f64).collect();
        Self::new(centers, 0.5 * step)
    }

    /// Surge regressor: 11 centers over 0.5..1.5 m/s.
    pub fn speed_default() -> Self {
        Self::uniform(0.5, 1.5, 11).expect("valid layout")
    }

    /// Yaw-rate regressor: 21 centers over -20..20 deg/s, in rad/s.
    pub fn yaw_default() -> Self {
        Self::uniform(-20f64.to_radians(), 20f64.to_radians(), 21).expect("valid layout")
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Length of the output vector including the bias element.
    pub fn len(&self) -> usize {
        self.centers.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn kernel(&self, s: f64, center: f64) -> f64 {
        let d = (s - center) / self.width;
        (-0.5 * d * d).exp()
    }

    pub fn eval(&self, s: f64) -> Vec<f64> {
        std::iter::once(1.0)
            .chain(self.centers.iter().map(|&c| self.kernel(s, c)))
            .collect()
    }
}

pub fn rbf_eval(reg: &RbfRegressor, s: f64) -> Vec<f64> {
    reg.eval(s)
}
