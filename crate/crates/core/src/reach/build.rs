use super::graph::{CompGraph, GraphBuilder, NodeId};
use crate::control::ClosedLoopPolicy;
use crate::error::{Error, Result};
use crate::vehicle::{ClosedLoopModel, STATE_DIM};

/// Graph of the nominal closed-loop step `x -> f_cl(x; policy)` (no disturbance),
/// with the same substeps, saturations and allocation as
/// [`ClosedLoopModel::step`]. Heading is left unwrapped.
pub fn build_closed_loop_graph(policy: &ClosedLoopPolicy, model: &ClosedLoopModel, dt: f64) -> Result<CompGraph> {
    let servo = match policy {
        ClosedLoopPolicy::LqrPi(s) | ClosedLoopPolicy::FrozenMrac(s) => s,
        ClosedLoopPolicy::Pid(_) => return Err(Error::UnsupportedPolicy("pid")),
    };
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let mut b = GraphBuilder::new(STATE_DIM);
    let (x, y, th, u, v, r) = (0, 1, 2, 3, 4, 5);
    let g = &servo.gains;

    let thr_raw = b.affine(&[(u, -g.k_u_p)], -g.k_u_i * servo.integ.e_u_i + servo.bias_thr);
    let rud_raw = b.affine(&[(v, -g.k_v_p), (r, -g.k_r_p)], -g.k_r_i * servo.integ.e_r_i + servo.bias_rud);
    let (tl, th_lim) = (crate::control::THRUST_LIMITS.min, crate::control::THRUST_LIMITS.max);
    let (rl, rh) = (crate::control::RUDDER_LIMITS.min, crate::control::RUDDER_LIMITS.max);
    let thr = b.clamp(thr_raw, tl, th_lim);
    let rud = b.clamp(rud_raw, rl, rh);

    let mixer = &model.mixer;
    let prod = b.mul(thr, rud);
    let left_raw = b.affine(&[(thr, 1.0), (prod, 1.0 / mixer.r_max)], 0.0);
    let right_raw = b.affine(&[(thr, 1.0), (prod, -1.0 / mixer.r_max)], 0.0);
    let left = b.clamp(left_raw, mixer.limits.0, mixer.limits.1);
    let right = b.clamp(right_raw, mixer.limits.0, mixer.limits.1);
    let pm = &model.plant_map;
    let diff = 0.5 * pm.r_max / pm.thrust_ref;
    let thr_eff = b.affine(&[(left, 0.5), (right, 0.5)], 0.0);
    let rud_eff = b.affine(&[(left, diff), (right, -diff)], 0.0);

    let n = model.substeps(dt);
    let h = dt / n as f64;
    let sp = &model.speed;
    let sy = &model.sway_yaw;
    let gain_u = sp.b_p1 * sp.lambda_1;
    let a = &sy.a_p;
    let (gv, gr) = (sy.b_p[0] * sy.lambda_2, sy.b_p[1] * sy.lambda_2);
    let mut s: [NodeId; STATE_DIM] = [x, y, th, u, v, r];
    for _ in 0..n {
        let [x, y, th, u, v, r] = s;
        let sin = b.sin(th);
        let cos = b.cos(th);
        let uc = b.mul(u, cos);
        let vs = b.mul(v, sin);
        let us = b.mul(u, sin);
        let vc = b.mul(v, cos);
        let x1 = b.affine(&[(x, 1.0), (uc, h), (vs, -h)], 0.0);
        let y1 = b.affine(&[(y, 1.0), (us, h), (vc, h)], 0.0);
        let th1 = b.affine(&[(th, 1.0), (r, h)], 0.0);
        let u1 = b.affine(&[(u, 1.0 + h * sp.a_p1), (thr_eff, h * gain_u)], 0.0);
        let v1 = b.affine(&[(v, 1.0 + h * a[0][0]), (r, h * a[0][1]), (rud_eff, h * gv)], 0.0);
        let r1 = b.affine(&[(v, h * a[1][0]), (r, 1.0 + h * a[1][1]), (rud_eff, h * gr)], 0.0);
        s = [x1, y1, th1, u1, v1, r1];
    }
    b.finish(s.to_vec())
}

/// The 24-input augmented update over `[x, mu, mu_drift, sigma_drift]`:
/// `x' = f(x) + mu`, `mu' = mu + mu_drift + gamma * sigma_drift`, drifts constant.
pub fn augmented_graph(f_cl: &CompGraph, gamma: f64) -> Result<CompGraph> {
    if f_cl.input_dim() != STATE_DIM || f_cl.output_dim() != STATE_DIM {
        return Err(Error::InvalidArgument("closed-loop graph must map 6 states to 6 states".into()));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let n = STATE_DIM;
    let mut b = GraphBuilder::new(4 * n);
    let xs: Vec<NodeId> = (0..n).collect();
    let fx = b.embed(f_cl, &xs);
    let mut out = Vec::with_capacity(4 * n);
    for i in 0..n {
        out.push(b.affine(&[(fx[i], 1.0), (n + i, 1.0)], 0.0));
    }
    for i in 0..n {
        out.push(b.affine(&[(n + i, 1.0), (2 * n + i, 1.0), (3 * n + i, gamma)], 0.0));
    }
    out.extend(2 * n..4 * n);
    b.finish(out)
}
