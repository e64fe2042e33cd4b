use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::build::augmented_graph;
use super::geometry::{rect_intersects_region, UnsafeRegion};
use super::graph::CompGraph;
use super::rect::{concretize, HyperRect};
use super::relax::relax;
use crate::error::{Error, Result};
use crate::estimation::DisturbanceEstimate;
use crate::vehicle::STATE_DIM;

/// Estimator output needed to seed a certification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyInput {
    pub x_hat: DVector<f64>,
    /// State covariance; only its diagonal is used.
    pub q: DMatrix<f64>,
    pub disturbance: DisturbanceEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub safe: bool,
    /// Projected state boxes for steps `t+1 ..= t+horizon`.
    pub rsoa: Vec<HyperRect>,
    /// First step (1-based) whose box meets the unsafe region.
    pub first_violation: Option<usize>,
}

/// One relaxation of the augmented update; `rect` is 24-dimensional.
pub fn augmented_step(graph: &CompGraph, rect: &HyperRect, gamma: f64) -> Result<HyperRect> {
    let aug = augmented_graph(graph, gamma)?;
    step_with(&aug, rect)
}

fn step_with(aug: &CompGraph, rect: &HyperRect) -> Result<HyperRect> {
    if rect.dim() != aug.input_dim() {
        return Err(Error::InvalidArgument(format!("augmented rect must have {} components", aug.input_dim())));
    }
    Ok(relax(aug, rect).1)
}

/// Initial augmented box `B(z_t, eps)`.
pub(crate) fn initial_rect(input: &CertifyInput, gamma: f64) -> Result<HyperRect> {
    let n = STATE_DIM;
    let d = &input.disturbance;
    if input.x_hat.len() != n
        || input.q.nrows() != n
        || input.q.ncols() != n
        || d.mu_hat.len() != n
        || d.w_hat_diag.len() != n
        || d.delta_mu.len() != n
        || d.delta_sigma.len() != n
    {
        return Err(Error::InvalidArgument("certify inputs must be 6-dimensional".into()));
    }
    let q_diag: Vec<f64> = input.q.diagonal().iter().copied().collect();
    let eps_x = concretize(&q_diag, gamma)?;
    let eps_mu = concretize(d.w_hat_diag.as_slice(), gamma)?;
    let mut center = DVector::zeros(4 * n);
    let mut radii = DVector::zeros(4 * n);
    for i in 0..n {
        center[i] = input.x_hat[i];
        center[n + i] = d.mu_hat[i];
        radii[i] = eps_x[i];
        radii[n + i] = eps_mu[i];
        radii[2 * n + i] = d.delta_mu[i];
        radii[3 * n + i] = gamma * d.delta_sigma[i];
    }
    HyperRect::new(center, radii)
}

/// Propagates the estimator's uncertainty box over `horizon` steps and checks
/// every projected state box against `unsafe_region`.
pub fn certify(
    graph: &CompGraph,
    input: &CertifyInput,
    horizon: usize,
    gamma: f64,
    unsafe_region: &UnsafeRegion,
) -> Result<Certificate> {
    let aug = augmented_graph(graph, gamma)?;
    let mut rect = initial_rect(input, gamma)?;
    let mut rsoa = Vec::with_capacity(horizon);
    let mut first_violation = None;
    for i in 1..=horizon {
        rect = step_with(&aug, &rect)?;
        let state = rect.project(0..STATE_DIM);
        if rect_intersects_region(&state, unsafe_region)? && first_violation.is_none() {
            first_violation = Some(i);
        }
        rsoa.push(state);
    }
    Ok(Certificate {
        safe: first_violation.is_none(),
        rsoa,
        first_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{synthesize_gains, ClosedLoopPolicy, FrozenServo, IntegratorState};
    use crate::reach::{build_closed_loop_graph, ConvexPolygon};
    use crate::vehicle::{ClosedLoopModel, DisturbanceVector, VehicleState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cruise_policy() -> ClosedLoopPolicy {
        let model = ClosedLoopModel::default();
        let gains = synthesize_gains(&model.speed, &model.sway_yaw).unwrap();
        let trim = model.speed.trim_thrust(1.0);
        ClosedLoopPolicy::LqrPi(FrozenServo {
            gains,
            integ: IntegratorState {
                e_u_i: -(trim + gains.k_u_p) / gains.k_u_i,
                e_r_i: 0.0,
            },
            bias_thr: 0.0,
            bias_rud: 0.0,
        })
    }

    fn input(q: f64, w: f64, dmu: f64, dsig: f64, mu_u: f64) -> CertifyInput {
        let mut mu = DVector::zeros(6);
        mu[3] = mu_u;
        CertifyInput {
            x_hat: DVector::from_column_slice(&[0.0, 0.0, 0.05, 1.0, 0.0, 0.0]),
            q: DMatrix::from_diagonal_element(6, 6, q),
            disturbance: DisturbanceEstimate {
                mu_hat: mu,
                w_hat_diag: DVector::from_element(6, w),
                delta_mu: DVector::from_element(6, dmu),
                delta_sigma: DVector::from_element(6, dsig),
            },
        }
    }

    fn graph() -> CompGraph {
        build_closed_loop_graph(&cruise_policy(), &ClosedLoopModel::default(), 0.1).unwrap()
    }

    #[test]
    fn empty_region_is_safe() {
        let c = certify(&graph(), &input(1e-4, 1e-6, 1e-4, 1e-4, 0.0), 20, 3.0, &UnsafeRegion::empty()).unwrap();
        assert!(c.safe);
        assert_eq!(c.rsoa.len(), 20);
    }

    #[test]
    fn region_at_the_estimate_is_unsafe_immediately() {
        let region = UnsafeRegion::from_polygons(vec![ConvexPolygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap()]);
        let c = certify(&graph(), &input(1e-4, 1e-6, 1e-4, 1e-4, 0.0), 20, 3.0, &region).unwrap();
        assert!(!c.safe);
        assert_eq!(c.first_violation, Some(1));
    }

    #[test]
    fn obstacle_ahead_is_found_later() {
        let region = UnsafeRegion::from_polygons(vec![ConvexPolygon::rectangle(1.5, -1.0, 2.5, 1.0).unwrap()]);
        let c = certify(&graph(), &input(1e-4, 1e-6, 1e-4, 1e-4, 0.0), 20, 3.0, &region).unwrap();
        let k = c.first_violation.expect("obstacle 1.5 m ahead at 1 m/s within 2 s");
        assert!(k > 5 && k <= 20, "first violation at {k}");
    }

    #[test]
    fn zero_radius_point_propagation() {
        let g = graph();
        let inp = input(0.0, 0.0, 0.0, 0.0, 0.0);
        let c = certify(&g, &inp, 5, 3.0, &UnsafeRegion::empty()).unwrap();
        let model = ClosedLoopModel::default();
        let mut s = VehicleState::from_array([0.0, 0.0, 0.05, 1.0, 0.0, 0.0]);
        for rect in &c.rsoa {
            s = model.step(&s, &cruise_policy(), &DisturbanceVector::zero(), 0.1).unwrap();
            let a = s.to_array();
            for i in 0..6 {
                assert!(rect.radii[i] <= 1e-9);
                assert!((rect.center[i] - a[i]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn drift_rows_are_identities_and_mean_widens_additively() {
        let g = graph();
        let rect = initial_rect(&input(1e-4, 4e-4, 0.003, 0.002, 0.01), 3.0).unwrap();
        let next = augmented_step(&g, &rect, 3.0).unwrap();
        for i in 12..24 {
            assert!((next.lo(i) - rect.lo(i)).abs() < 1e-12 && (next.hi(i) - rect.hi(i)).abs() < 1e-12);
        }
        for i in 6..12 {
            // Interval arithmetic on mu' = mu + mu_drift + gamma sigma_drift.
            let expect = rect.radii[i] + rect.radii[i + 6] + 3.0 * rect.radii[i + 12];
            assert!((next.radii[i] - expect).abs() < 1e-12, "{} vs {}", next.radii[i], expect);
            assert!((next.center[i] - rect.center[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn widths_grow_with_gamma() {
        let g = graph();
        let inp = input(1e-3, 1e-4, 1e-3, 1e-3, 0.0);
        let a = certify(&g, &inp, 20, 1.0, &UnsafeRegion::empty()).unwrap();
        let b = certify(&g, &inp, 20, 3.0, &UnsafeRegion::empty()).unwrap();
        for (ra, rb) in a.rsoa.iter().zip(&b.rsoa) {
            for i in 0..6 {
                assert!(rb.radii[i] + 1e-12 >= ra.radii[i]);
            }
        }
    }

    #[test]
    fn certify_is_deterministic() {
        let g = graph();
        let inp = input(1e-3, 1e-4, 1e-3, 1e-3, -0.01);
        let a = certify(&g, &inp, 20, 3.0, &UnsafeRegion::empty()).unwrap();
        let b = certify(&g, &inp, 20, 3.0, &UnsafeRegion::empty()).unwrap();
        let bits = |c: &Certificate| -> Vec<u64> {
            c.rsoa.iter().flat_map(|r| r.center.iter().chain(r.radii.iter()).map(|v| v.to_bits()).collect::<Vec<_>>()).collect()
        };
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn monte_carlo_rollouts_stay_inside() {
        // Truth: x0 within eps_x, disturbance w_k = mu_k + noise truncated at
        // gamma sigma, with the mean drifting by at most delta_mu per step.
        let gamma = 3.0;
        let g = graph();
        let model = ClosedLoopModel::default();
        let policy = cruise_policy();
        let inp = input(4e-4, 1e-6, 2e-4, 1e-4, -0.004);
        let c = certify(&g, &inp, 20, gamma, &UnsafeRegion::empty()).unwrap();
        let d = &inp.disturbance;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10_000 {
            let mut x = [0.0; 6];
            for i in 0..6 {
                let e = gamma * inp.q[(i, i)].sqrt();
                x[i] = inp.x_hat[i] + rng.random_range(-e..=e);
            }
            let mut mu: Vec<f64> = (0..6)
                .map(|i| d.mu_hat[i] + gamma * d.w_hat_diag[i].sqrt() * rng.random_range(-1.0..=1.0))
                .collect();
            let drift: Vec<f64> = (0..6)
                .map(|i| d.delta_mu[i] * rng.random_range(-1.0..=1.0) + gamma * d.delta_sigma[i] * rng.random_range(-1.0..=1.0))
                .collect();
            let mut s = VehicleState::from_array(x);
            for (k, rect) in c.rsoa.iter().enumerate() {
                let w = DisturbanceVector::new([mu[0], mu[1], mu[2], mu[3], mu[4], mu[5]]);
                s = model.step(&s, &policy, &w, 0.1).unwrap();
                let a = s.to_array();
                for i in 0..6 {
                    assert!(rect.lo(i) <= a[i] && a[i] <= rect.hi(i), "step {k} comp {i}: {} not in [{}, {}]", a[i], rect.lo(i), rect.hi(i));
                }
                for i in 0..6 {
                    mu[i] += drift[i];
                }
            }
        }
    }
}
