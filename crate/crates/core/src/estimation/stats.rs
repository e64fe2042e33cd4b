use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::MheSolution;

/// Bounds on how fast the disturbance mean and spread may drift per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftConfig {
    /// Drift bound as a fraction of the current estimate.
    pub fraction: f64,
    /// Per-component lower limit on the mean drift bound.
    pub mu_floor: Vec<f64>,
    /// Per-component lower limit on the spread drift bound.
    pub sigma_floor: Vec<f64>,
}

impl DriftConfig {
    pub fn vehicle() -> Self {
        Self {
            fraction: 0.1,
            mu_floor: vec![1e-3, 1e-3, 1e-4, 1e-3, 1e-4, 1e-4],
            sigma_floor: vec![1e-4, 1e-4, 1e-5, 1e-4, 1e-5, 1e-5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceEstimate {
    pub mu_hat: DVector<f64>,
    /// Diagonal of the sample covariance.
    pub w_hat_diag: DVector<f64>,
    pub delta_mu: DVector<f64>,
    pub delta_sigma: DVector<f64>,
}

/// Sample mean and diagonal sample covariance (`n - 1` normalization) of the
/// disturbance window, with drift bounds attached.
pub fn disturbance_stats(samples: &[DVector<f64>], drift: &DriftConfig) -> DisturbanceEstimate {
    let count = samples.len();
    assert!(count >= 2, "need at least two disturbance samples");
    let n = samples[0].len();
    let mut mean = DVector::zeros(n);
    for s in samples {
        mean += s;
    }
    mean /= count as f64;
    let mut var = DVector::zeros(n);
    for s in samples {
        let d = s - &mean;
        var += d.component_mul(&d);
    }
    var /= (count - 1) as f64;
    let floor = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let delta_mu = DVector::from_fn(n, |i, _| (drift.fraction * mean[i].abs()).max(floor(&drift.mu_floor, i)));
    let delta_sigma =
        DVector::from_fn(n, |i, _| (drift.fraction * var[i].sqrt()).max(floor(&drift.sigma_floor, i)));
    DisturbanceEstimate {
        mu_hat: mean,
        w_hat_diag: var,
        delta_mu,
        delta_sigma,
    }
}

impl MheSolution {
    pub fn disturbance_stats(&self, drift: &DriftConfig) -> DisturbanceEstimate {
        disturbance_stats(&self.w_hat, drift)
    }
}
