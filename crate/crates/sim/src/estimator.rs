//! Per-vehicle estimator loop: buffers measurements and applied policies,
//! solves the moving-horizon problem and carries the prior forward.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use usv_core::control::ClosedLoopPolicy;
use usv_core::estimation::{
    mhe_solve, prior_update, ClosedLoopWindow, DisturbanceEstimate, DriftConfig, MheConfig, MheError,
    MheSolution,
};
use usv_core::vehicle::ClosedLoopModel;

use crate::config::EstimatorConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub x_hat: DVector<f64>,
    /// `Q_{t|t}`.
    pub q_filtered: DMatrix<f64>,
    pub disturbance: DisturbanceEstimate,
    pub iterations: usize,
    pub objective: f64,
    pub converged: bool,
}

pub struct VehicleEstimator {
    cfg: MheConfig,
    drift: DriftConfig,
    model: ClosedLoopModel,
    dt: f64,
    ys: VecDeque<DVector<f64>>,
    policies: VecDeque<ClosedLoopPolicy>,
    prior: Option<(DVector<f64>, DMatrix<f64>)>,
    warm: Option<(DVector<f64>, Vec<DVector<f64>>)>,
}

impl VehicleEstimator {
    pub fn new(cfg: &EstimatorConfig, dt: f64) -> Self {
        let mut mhe = MheConfig::vehicle();
        mhe.window = cfg.window;
        mhe.max_iterations = cfg.max_iterations;
        mhe.mask = cfg.mask.to_vec();
        let mut drift = DriftConfig::vehicle();
        drift.fraction = cfg.drift_fraction;
        Self {
            cfg: mhe,
            drift,
            model: ClosedLoopModel::default(),
            dt,
            ys: VecDeque::new(),
            policies: VecDeque::new(),
            prior: None,
            warm: None,
        }
    }

    pub fn model(&self) -> &ClosedLoopModel {
        &self.model
    }

    fn measurement_cov(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.cfg.w_y))
    }

    /// Adds the measurement at this control tick and the policy applied from
    /// it. Solves once the window is full.
    pub fn push(&mut self, y: [f64; 6], applied: ClosedLoopPolicy) -> Result<Option<Estimate>, usv_core::Error> {
        let n = self.cfg.window;
        self.ys.push_back(DVector::from_column_slice(&y));
        self.policies.push_back(applied);
        while self.ys.len() > n + 1 {
            self.ys.pop_front();
            self.policies.pop_front();
        }
        if self.ys.len() < n + 1 {
            return Ok(None);
        }
        let ys: Vec<DVector<f64>> = self.ys.iter().cloned().collect();
        let policies: Vec<ClosedLoopPolicy> = self.policies.iter().copied().collect();
        let window = ClosedLoopWindow {
            model: &self.model,
            policies: &policies,
            dt: self.dt,
        };
        let r = self.measurement_cov();
        let (prior_mean, prior_cov) = self
            .prior
            .clone()
            .unwrap_or_else(|| (ys[n].clone(), &r * 4.0));
        let warm = self.warm.as_ref().map(|(x0, w)| (x0, w.as_slice()));
        let (sol, converged) = match mhe_solve(&window, &ys, &prior_mean, &prior_cov, &self.cfg, warm) {
            Ok(s) => (s, true),
            Err(MheError::NotConverged { best, .. }) => (*best, false),
            Err(MheError::Model(e)) => return Err(e),
        };
        let disturbance = sol.disturbance_stats(&self.drift);
        let w_cov = DMatrix::from_diagonal(&DVector::from_column_slice(&self.cfg.w));
        let upd = prior_update(
            &window,
            n,
            sol.terminal(),
            &disturbance.mu_hat,
            &prior_cov,
            &r,
            &w_cov,
        )?;
        self.warm = Some(shifted(&sol));
        self.prior = Some((upd.x_bar_next, upd.q_predicted));
        Ok(Some(Estimate {
            x_hat: sol.terminal().clone(),
            q_filtered: upd.q_filtered,
            disturbance,
            iterations: sol.iterations,
            objective: sol.objective,
            converged,
        }))
    }
}

/// Warm start for the next window: drop the oldest step, repeat the last
/// disturbance.
fn shifted(sol: &MheSolution) -> (DVector<f64>, Vec<DVector<f64>>) {
    let mut w: Vec<DVector<f64>> = sol.w_hat.iter().skip(1).cloned().collect();
    if let Some(last) = sol.w_hat.last() {
        w.push(last.clone());
    }
    (sol.x_hat[1].clone(), w)
}
