use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::control::ClosedLoopPolicy;
use crate::error::Error;
use crate::vehicle::{wrap_angle, ClosedLoopModel, DisturbanceVector, VehicleState};

/// Discrete dynamics over an estimation window, `x_{k+1} = f_k(x_k) + w_k`.
pub trait WindowDynamics {
    fn dim(&self) -> usize;

    /// Nominal transition out of window step `k`.
    fn step(&self, k: usize, x: &DVector<f64>) -> Result<DVector<f64>, Error>;

    /// Whether component `i` is an angle compared modulo `2 pi`.
    fn is_angle(&self, _i: usize) -> bool {
        false
    }
}

/// The nominal vehicle closed loop driven by a recorded policy trace.
pub struct ClosedLoopWindow<'a> {
    pub model: &'a ClosedLoopModel,
    pub policies: &'a [ClosedLoopPolicy],
    pub dt: f64,
}

impl WindowDynamics for ClosedLoopWindow<'_> {
    fn dim(&self) -> usize {
        6
    }

    fn step(&self, k: usize, x: &DVector<f64>) -> Result<DVector<f64>, Error> {
        let policy = self
            .policies
            .get(k)
            .ok_or_else(|| Error::InvalidArgument(format!("no policy for window step {k}")))?;
        let s = VehicleState::from_slice(x.as_slice());
        let next = self.model.step(&s, policy, &DisturbanceVector::zero(), self.dt)?;
        Ok(DVector::from_row_slice(&next.to_array()))
    }

    fn is_angle(&self, i: usize) -> bool {
        i == 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MheConfig {
    /// Number of transitions in the window; the window holds `window + 1` measurements.
    pub window: usize,
    /// Diagonal measurement covariance.
    pub w_y: Vec<f64>,
    /// Diagonal process covariance weighting the disturbance estimates.
    pub w: Vec<f64>,
    /// Components that carry an estimated disturbance; others are held at zero.
    pub mask: Vec<bool>,
    pub max_iterations: usize,
    /// Relative objective decrease below which the solver stops.
    pub tolerance: f64,
}

impl MheConfig {
    /// Defaults for the six-state vehicle at a 10 Hz estimation rate.
    pub fn vehicle() -> Self {
        Self {
            window: 20,
            w_y: vec![
                0.5f64.powi(2),
                0.5f64.powi(2),
                1f64.to_radians().powi(2),
                0.02f64.powi(2),
                0.02f64.powi(2),
                0.5f64.to_radians().powi(2),
            ],
            w: vec![
                0.05f64.powi(2),
                0.05f64.powi(2),
                0.02f64.powi(2),
                0.3f64.powi(2),
                0.05f64.powi(2),
                0.1f64.powi(2),
            ],
            mask: vec![true; 6],
            max_iterations: 20,
            tolerance: 1e-10,
        }
    }

    fn validate(&self, n: usize) -> Result<(), Error> {
        if self.window < 2 {
            return Err(Error::InvalidArgument("window must be at least 2".into()));
        }
        if self.w_y.len() != n || self.w.len() != n || self.mask.len() != n {
            return Err(Error::InvalidArgument(format!(
                "estimator covariances must have {n} entries"
            )));
        }
        if self.w_y.iter().chain(self.w.iter()).any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("covariances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MheSolution {
    /// State estimates `x_{t-N} .. x_t`.
    pub x_hat: Vec<DVector<f64>>,
    /// Disturbance estimates `w_{t-N} .. w_{t-1}`.
    pub w_hat: Vec<DVector<f64>>,
    pub objective: f64,
    pub initial_objective: f64,
    pub iterations: usize,
}

impl MheSolution {
    pub fn terminal(&self) -> &DVector<f64> {
        self.x_hat.last().expect("non-empty window")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MheError {
    #[error(transparent)]
    Model(#[from] Error),
    #[error("estimator did not converge after {iterations} iterations")]
    NotConverged {
        iterations: usize,
        best: Box<MheSolution>,
    },
}

struct Workspace<'a, M: WindowDynamics> {
    model: &'a M,
    y: &'a [DVector<f64>],
    prior_mean: &'a DVector<f64>,
    prior_sqrt_inv: DMatrix<f64>,
    sy: DVector<f64>,
    sw: DVector<f64>,
    active: Vec<usize>,
    n: usize,
    steps: usize,
}

impl<M: WindowDynamics> Workspace<'_, M> {
    fn nz(&self) -> usize {
        self.n + self.steps * self.active.len()
    }

    fn diff(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        let mut d = a - b;
        for i in 0..self.n {
            if self.model.is_angle(i) {
                d[i] = wrap_angle(d[i]);
            }
        }
        d
    }

    fn wrap(&self, x: &mut DVector<f64>) {
        for i in 0..self.n {
            if self.model.is_angle(i) {
                x[i] = wrap_angle(x[i]);
            }
        }
    }

    fn disturbance(&self, z: &DVector<f64>, k: usize) -> DVector<f64> {
        let m = self.active.len();
        let mut w = DVector::zeros(self.n);
        for (j, &i) in self.active.iter().enumerate() {
            w[i] = z[self.n + k * m + j];
        }
        w
    }

    fn rollout(&self, z: &DVector<f64>) -> Result<Vec<DVector<f64>>, Error> {
        let mut xs = Vec::with_capacity(self.steps + 1);
        let mut x = z.rows(0, self.n).into_owned();
        self.wrap(&mut x);
        xs.push(x.clone());
        for k in 0..self.steps {
            let mut next = self.model.step(k, &x)? + self.disturbance(z, k);
            self.wrap(&mut next);
            x = next;
            xs.push(x.clone());
        }
        Ok(xs)
    }

    fn residuals(&self, z: &DVector<f64>, xs: &[DVector<f64>]) -> DVector<f64> {
        let n = self.n;
        let m = self.active.len();
        let len = n * (self.steps + 1) + self.steps * m + n;
        let mut r = DVector::zeros(len);
        for (k, x) in xs.iter().enumerate() {
            let d = self.diff(&self.y[k], x);
            for i in 0..n {
                r[k * n + i] = d[i] / self.sy[i];
            }
        }
        let base = n * (self.steps + 1);
        for k in 0..self.steps {
            for (j, &i) in self.active.iter().enumerate() {
                r[base + k * m + j] = z[n + k * m + j] / self.sw[i];
            }
        }
        let pd = self.diff(xs.last().expect("window"), self.prior_mean);
        let pr = &self.prior_sqrt_inv * pd;
        r.rows_mut(base + self.steps * m, n).copy_from(&pr);
        r
    }

    fn state_jacobian(&self, k: usize, x: &DVector<f64>) -> Result<DMatrix<f64>, Error> {
        let n = self.n;
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let h = 1e-6 * x[j].abs().max(1.0);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let d = self.diff(&self.model.step(k, &xp)?, &self.model.step(k, &xm)?);
            jac.set_column(j, &(d / (2.0 * h)));
        }
        Ok(jac)
    }

    fn jacobian(&self, xs: &[DVector<f64>]) -> Result<DMatrix<f64>, Error> {
        let n = self.n;
        let m = self.active.len();
        let nz = self.nz();
        let rows = n * (self.steps + 1) + self.steps * m + n;
        let mut jac = DMatrix::zeros(rows, nz);
        let mut s = DMatrix::zeros(n, nz);
        s.view_mut((0, 0), (n, n)).fill_with_identity();
        for k in 0..=self.steps {
            for i in 0..n {
                let row = -s.row(i) / self.sy[i];
                jac.row_mut(k * n + i).copy_from(&row);
            }
            if k == self.steps {
                break;
            }
            let f = self.state_jacobian(k, &xs[k])?;
            let mut next = &f * &s;
            for (j, &i) in self.active.iter().enumerate() {
                next[(i, n + k * m + j)] += 1.0;
            }
            s = next;
        }
        let base = n * (self.steps + 1);
        for k in 0..self.steps {
            for (j, &i) in self.active.iter().enumerate() {
                jac[(base + k * m + j, n + k * m + j)] = 1.0 / self.sw[i];
            }
        }
        let prior_rows = &self.prior_sqrt_inv * &s;
        jac.view_mut((base + self.steps * m, 0), (n, nz)).copy_from(&prior_rows);
        Ok(jac)
    }
}

/// Solves the windowed least-squares problem
///
/// `min |x_t - x_bar|^2_{Q^-1} + sum_k |y_k - x_k|^2_{W_y^-1} + |w_k|^2_{W^-1}`
///
/// subject to `x_{k+1} = f_k(x_k) + w_k`, by damped Gauss-Newton over the
/// window-start state and the disturbance sequence. `y` holds `window + 1`
/// measurements ending at the current time; the prior applies to the
/// current (terminal) state. `init` warm-starts the solver.
pub fn mhe_solve<M: WindowDynamics>(
    model: &M,
    y: &[DVector<f64>],
    prior_mean: &DVector<f64>,
    prior_cov: &DMatrix<f64>,
    cfg: &MheConfig,
    init: Option<(&DVector<f64>, &[DVector<f64>])>,
) -> Result<MheSolution, MheError> {
    let n = model.dim();
    cfg.validate(n)?;
    if y.len() != cfg.window + 1 {
        return Err(Error::InvalidArgument(format!(
            "expected {} measurements, got {}",
            cfg.window + 1,
            y.len()
        ))
        .into());
    }
    if y.iter().any(|v| v.len() != n || v.iter().any(|c| !c.is_finite())) {
        return Err(Error::NonFinite("measurement window").into());
    }
    let chol = prior_cov
        .clone()
        .cholesky()
        .ok_or(Error::Singular("prior covariance"))?;
    let prior_sqrt_inv = chol
        .l()
        .try_inverse()
        .ok_or(Error::Singular("prior covariance"))?;
    let active: Vec<usize> = (0..n).filter(|&i| cfg.mask[i]).collect();
    let ws = Workspace {
        model,
        y,
        prior_mean,
        prior_sqrt_inv,
        sy: DVector::from_iterator(n, cfg.w_y.iter().map(|v| v.sqrt())),
        sw: DVector::from_iterator(n, cfg.w.iter().map(|v| v.sqrt())),
        active,
        n,
        steps: cfg.window,
    };
    let m = ws.active.len();

    let mut z = DVector::zeros(ws.nz());
    match init {
        Some((x0, w)) => {
            z.rows_mut(0, n).copy_from(x0);
            for (k, wk) in w.iter().take(cfg.window).enumerate() {
                for (j, &i) in ws.active.iter().enumerate() {
                    z[n + k * m + j] = wk[i];
                }
            }
        }
        None => z.rows_mut(0, n).copy_from(&y[0]),
    }

    let mut xs = ws.rollout(&z)?;
    let mut r = ws.residuals(&z, &xs);
    let mut cost = r.norm_squared();
    let initial = cost;
    let mut lambda = 1e-6;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let jac = ws.jacobian(&xs)?;
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let mut accepted = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * (jtj[(i, i)] + 1e-12);
            }
            let Some(ch) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = -ch.solve(&g);
            let cand = &z + &step;
            let cxs = ws.rollout(&cand)?;
            let cr = ws.residuals(&cand, &cxs);
            let ccost = cr.norm_squared();
            if ccost.is_finite() && ccost <= cost {
                let decrease = cost - ccost;
                z = cand;
                xs = cxs;
                r = cr;
                cost = ccost;
                lambda = (lambda * 0.1).max(1e-12);
                accepted = true;
                if decrease <= cfg.tolerance * cost.max(1e-30) || step.norm() <= 1e-12 * (1.0 + z.norm()) {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No descent direction left: already at a stationary point.
            converged = g.norm() <= 1e-6 * (1.0 + cost.sqrt());
            break;
        }
        if converged {
            break;
        }
    }

    let solution = MheSolution {
        w_hat: (0..cfg.window).map(|k| ws.disturbance(&z, k)).collect(),
        x_hat: xs,
        objective: cost,
        initial_objective: initial,
        iterations,
    };
    if converged {
        Ok(solution)
    } else {
        Err(MheError::NotConverged {
            iterations,
            best: Box::new(solution),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriorUpdate {
    pub x_bar_next: DVector<f64>,
    /// `Q_{t|t}`.
    pub q_filtered: DMatrix<f64>,
    /// `Q_{t+1|t}`.
    pub q_predicted: DMatrix<f64>,
    /// Jacobian of the transition at the terminal estimate.
    pub a: DMatrix<f64>,
}

/// Priors for the next solve:
/// `x_bar = f(x_t) + w`, `Q_{t|t} = (Q^-1 + R^-1)^-1`, `Q_{t+1|t} = A Q_{t|t} A' + W`.
///
/// `k` selects the transition of `model` to linearize; `w_next` is the
/// disturbance carried into the prediction.
pub fn prior_update<M: WindowDynamics>(
    model: &M,
    k: usize,
    x_t: &DVector<f64>,
    w_next: &DVector<f64>,
    q_prior: &DMatrix<f64>,
    r: &DMatrix<f64>,
    w: &DMatrix<f64>,
) -> Result<PriorUpdate, Error> {
    let n = model.dim();
    let q_inv = q_prior
        .clone()
        .try_inverse()
        .ok_or(Error::Singular("state covariance"))?;
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or(Error::Singular("measurement covariance"))?;
    let filtered = (q_inv + r_inv)
        .try_inverse()
        .ok_or(Error::Singular("filtered covariance"))?;
    let filtered = (&filtered + filtered.transpose()) * 0.5;
    let mut a = DMatrix::zeros(n, n);
    for j in 0..n {
        let h = 1e-6 * x_t[j].abs().max(1.0);
        let mut xp = x_t.clone();
        let mut xm = x_t.clone();
        xp[j] += h;
        xm[j] -= h;
        let mut d = model.step(k, &xp)? - model.step(k, &xm)?;
        for i in 0..n {
            if model.is_angle(i) {
                d[i] = wrap_angle(d[i]);
            }
        }
        a.set_column(j, &(d / (2.0 * h)));
    }
    let predicted = &a * &filtered * a.transpose() + w;
    let predicted = (&predicted + predicted.transpose()) * 0.5;
    let mut x_bar_next = model.step(k, x_t)? + w_next;
    for i in 0..n {
        if model.is_angle(i) {
            x_bar_next[i] = wrap_angle(x_bar_next[i]);
        }
    }
    Ok(PriorUpdate {
        x_bar_next,
        q_filtered: filtered,
        q_predicted: predicted,
        a,
    })
}
