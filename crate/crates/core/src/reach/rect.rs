use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `center ± radii`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperRect {
    pub center: DVector<f64>,
    pub radii: DVector<f64>,
}

impl HyperRect {
    pub fn new(center: DVector<f64>, radii: DVector<f64>) -> Result<Self> {
        if center.len() != radii.len() {
            return Err(Error::InvalidArgument("center/radii length mismatch".into()));
        }
        if center.iter().chain(radii.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("hyper-rectangle"));
        }
        if radii.iter().any(|&r| r < 0.0) {
            return Err(Error::InvalidArgument("negative radius".into()));
        }
        Ok(Self { center, radii })
    }

    pub fn point(center: DVector<f64>) -> Self {
        let n = center.len();
        Self {
            center,
            radii: DVector::zeros(n),
        }
    }

    /// Box from per-component bounds. `lo > hi` is treated as the point at their midpoint.
    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Self {
        assert_eq!(lo.len(), hi.len());
        let mut center = DVector::zeros(lo.len());
        let mut radii = DVector::zeros(lo.len());
        for (i, (&l, &h)) in lo.iter().zip(hi).enumerate() {
            let c = 0.5 * (l + h);
            let mut r = (h - c).max(c - l).max(0.0);
            // Round the radius up until the stored box covers both bounds.
            while l <= h && (c - r > l || c + r < h) {
                r = r.next_up();
            }
            center[i] = c;
            radii[i] = r;
        }
        Self { center, radii }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn lo(&self, i: usize) -> f64 {
        self.center[i] - self.radii[i]
    }

    pub fn hi(&self, i: usize) -> f64 {
        self.center[i] + self.radii[i]
    }

    pub fn lower(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.lo(i)).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.hi(i)).collect()
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        z.len() == self.dim() && z.iter().enumerate().all(|(i, &v)| self.lo(i) <= v && v <= self.hi(i))
    }

    /// Components `range` as a lower-dimensional box.
    pub fn project(&self, range: std::ops::Range<usize>) -> HyperRect {
        HyperRect {
            center: self.center.rows(range.start, range.len()).into_owned(),
            radii: self.radii.rows(range.start, range.len()).into_owned(),
        }
    }

    pub fn max_radius(&self) -> f64 {
        self.radii.iter().copied().fold(0.0, f64::max)
    }
}

/// Radii `gamma * sqrt(cov_ii)` of the diagonal of `cov`.
pub fn concretize(cov_diag: &[f64], gamma: f64) -> Result<DVector<f64>> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    if let Some(v) = cov_diag.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("covariance diagonal entry {v} is not a finite non-negative value")));
    }
    Ok(DVector::from_iterator(cov_diag.len(), cov_diag.iter().map(|v| gamma * v.sqrt())))
}
