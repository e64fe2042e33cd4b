use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::graph::{CompGraph, NodeKind};
use super::rect::HyperRect;

/// Affine function `coef . z + bias` of the graph input.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineBound {
    pub coef: Vec<f64>,
    pub bias: f64,
}

impl AffineBound {
    fn constant(n: usize, c: f64) -> Self {
        Self {
            coef: vec![0.0; n],
            bias: c,
        }
    }

    fn unit(n: usize, i: usize) -> Self {
        let mut coef = vec![0.0; n];
        coef[i] = 1.0;
        Self { coef, bias: 0.0 }
    }

    fn axpy(&mut self, a: f64, other: &AffineBound) {
        if a == 0.0 {
            return;
        }
        for (c, o) in self.coef.iter_mut().zip(&other.coef) {
            *c += a * o;
        }
        self.bias += a * other.bias;
    }

    /// Minimum over the box, and a magnitude used to absorb rounding.
    fn min_over(&self, lo: &[f64], hi: &[f64]) -> (f64, f64) {
        let mut v = self.bias;
        let mut mag = self.bias.abs();
        for ((c, l), h) in self.coef.iter().zip(lo).zip(hi) {
            let x = if *c >= 0.0 { *l } else { *h };
            v += c * x;
            mag += (c * x).abs();
        }
        (v, mag)
    }

    fn max_over(&self, lo: &[f64], hi: &[f64]) -> (f64, f64) {
        let mut v = self.bias;
        let mut mag = self.bias.abs();
        for ((c, l), h) in self.coef.iter().zip(lo).zip(hi) {
            let x = if *c >= 0.0 { *h } else { *l };
            v += c * x;
            mag += (c * x).abs();
        }
        (v, mag)
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.coef.iter().zip(z).fold(self.bias, |acc, (c, x)| acc + c * x)
    }
}

/// Elementwise `Psi z + alpha <= g(z) <= Phi z + beta` over the input box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearBounds {
    pub psi: DMatrix<f64>,
    pub alpha: DVector<f64>,
    pub phi: DMatrix<f64>,
    pub beta: DVector<f64>,
}

#[derive(Debug, Clone)]
struct NodeBound {
    lower: AffineBound,
    upper: AffineBound,
    lo: f64,
    hi: f64,
}

// Slack added to every concretized interval so the rounding of the bound
// arithmetic can never make a sampled evaluation escape.
const ROUND_REL: f64 = 1e-12;

/// Lower bound of `a * X` from the linear bounds of X.
fn scaled_lower(a: f64, x: &NodeBound) -> (f64, &AffineBound) {
    if a >= 0.0 {
        (a, &x.lower)
    } else {
        (a, &x.upper)
    }
}

fn scaled_upper(a: f64, x: &NodeBound) -> (f64, &AffineBound) {
    if a >= 0.0 {
        (a, &x.upper)
    } else {
        (a, &x.lower)
    }
}

/// `a*X + b*Y + c` as (lower, upper) affine bounds.
fn plane(n: usize, a: f64, x: &NodeBound, b: f64, y: &NodeBound, c: f64, want_lower: bool) -> AffineBound {
    let mut out = AffineBound::constant(n, c);
    let (pick_x, pick_y) = if want_lower {
        (scaled_lower(a, x), scaled_lower(b, y))
    } else {
        (scaled_upper(a, x), scaled_upper(b, y))
    };
    out.axpy(pick_x.0, pick_x.1);
    out.axpy(pick_y.0, pick_y.1);
    out
}

/// True if `c + 2k pi` lies in `[lo, hi]` for some integer k.
fn hits_periodic(c: f64, lo: f64, hi: f64) -> bool {
    let k = ((lo - c) / TAU).ceil();
    c + k * TAU <= hi
}

pub(crate) fn sin_interval(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo >= TAU {
        return (-1.0, 1.0);
    }
    let (a, b) = (lo.sin(), hi.sin());
    let mut min = a.min(b);
    let mut max = a.max(b);
    if hits_periodic(FRAC_PI_2, lo, hi) {
        max = 1.0;
    }
    if hits_periodic(-FRAC_PI_2, lo, hi) {
        min = -1.0;
    }
    (min, max)
}

pub(crate) fn cos_interval(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo >= TAU {
        return (-1.0, 1.0);
    }
    let (a, b) = (lo.cos(), hi.cos());
    let mut min = a.min(b);
    let mut max = a.max(b);
    if hits_periodic(0.0, lo, hi) {
        max = 1.0;
    }
    if hits_periodic(PI, lo, hi) {
        min = -1.0;
    }
    (min, max)
}

pub(crate) fn rbf_interval(lo: f64, hi: f64, center: f64, width: f64) -> (f64, f64) {
    let f = |x: f64| {
        let d = (x - center) / width;
        (-0.5 * d * d).exp()
    };
    let (a, b) = (f(lo), f(hi));
    if lo <= center && center <= hi {
        (a.min(b), 1.0)
    } else {
        (a.min(b), a.max(b))
    }
}

/// Sound affine bounds for every graph output over `input`, and the box they
/// concretize to.
pub fn relax(graph: &CompGraph, input: &HyperRect) -> (LinearBounds, HyperRect) {
    assert_eq!(input.dim(), graph.input_dim(), "input box dimension");
    let n = graph.input_dim();
    let lo_in = input.lower();
    let hi_in = input.upper();
    let mut b: Vec<NodeBound> = Vec::with_capacity(graph.node_count());

    for node in graph.nodes() {
        // (lower, upper, interval from interval arithmetic)
        let (lower, upper, ia) = match &node.kind {
            NodeKind::Input(i) => (
                AffineBound::unit(n, *i),
                AffineBound::unit(n, *i),
                (lo_in[*i], hi_in[*i]),
            ),
            NodeKind::Const(c) => (AffineBound::constant(n, *c), AffineBound::constant(n, *c), (*c, *c)),
            NodeKind::Affine { terms, bias } => {
                let mut lower = AffineBound::constant(n, *bias);
                let mut upper = AffineBound::constant(n, *bias);
                let (mut ia_lo, mut ia_hi) = (*bias, *bias);
                for &(id, w) in terms {
                    let (a, l) = scaled_lower(w, &b[id]);
                    lower.axpy(a, l);
                    let (a, u) = scaled_upper(w, &b[id]);
                    upper.axpy(a, u);
                    if w >= 0.0 {
                        ia_lo += w * b[id].lo;
                        ia_hi += w * b[id].hi;
                    } else {
                        ia_lo += w * b[id].hi;
                        ia_hi += w * b[id].lo;
                    }
                }
                (lower, upper, (ia_lo, ia_hi))
            }
            NodeKind::Add(x, y) => {
                let mut lower = b[*x].lower.clone();
                lower.axpy(1.0, &b[*y].lower);
                let mut upper = b[*x].upper.clone();
                upper.axpy(1.0, &b[*y].upper);
                (lower, upper, (b[*x].lo + b[*y].lo, b[*x].hi + b[*y].hi))
            }
            NodeKind::Mul(x, y) => {
                let (bx, by) = (&b[*x], &b[*y]);
                let (lx, ux, ly, uy) = (bx.lo, bx.hi, by.lo, by.hi);
                // McCormick envelopes; keep whichever plane concretizes tighter.
                let l1 = plane(n, ly, bx, lx, by, -lx * ly, true);
                let l2 = plane(n, uy, bx, ux, by, -ux * uy, true);
                let u1 = plane(n, uy, bx, lx, by, -lx * uy, false);
                let u2 = plane(n, ly, bx, ux, by, -ux * ly, false);
                let lower = if l1.min_over(&lo_in, &hi_in).0 >= l2.min_over(&lo_in, &hi_in).0 {
                    l1
                } else {
                    l2
                };
                let upper = if u1.max_over(&lo_in, &hi_in).0 <= u2.max_over(&lo_in, &hi_in).0 {
                    u1
                } else {
                    u2
                };
                let p = [lx * ly, lx * uy, ux * ly, ux * uy];
                let ia = (
                    p.iter().copied().fold(f64::INFINITY, f64::min),
                    p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                );
                (lower, upper, ia)
            }
            NodeKind::Sin(x) => {
                let (l, u) = sin_interval(b[*x].lo, b[*x].hi);
                (AffineBound::constant(n, l), AffineBound::constant(n, u), (l, u))
            }
            NodeKind::Cos(x) => {
                let (l, u) = cos_interval(b[*x].lo, b[*x].hi);
                (AffineBound::constant(n, l), AffineBound::constant(n, u), (l, u))
            }
            NodeKind::Rbf { input, center, width } => {
                let (l, u) = rbf_interval(b[*input].lo, b[*input].hi, *center, *width);
                (AffineBound::constant(n, l), AffineBound::constant(n, u), (l, u))
            }
            NodeKind::Clamp { input, lo, hi } => clamp_bounds(n, &b[*input], *lo, *hi),
        };

        let (cl, mag_l) = lower.min_over(&lo_in, &hi_in);
        let (cu, mag_u) = upper.max_over(&lo_in, &hi_in);
        let mut lo = cl.max(ia.0);
        let mut hi = cu.min(ia.1);
        if lo > hi {
            // Only reachable through rounding; both bounds are sound.
            let m = 0.5 * (lo + hi);
            lo = m;
            hi = m;
        }
        lo -= ROUND_REL * (mag_l + lo.abs()) + f64::MIN_POSITIVE;
        hi += ROUND_REL * (mag_u + hi.abs()) + f64::MIN_POSITIVE;
        if let NodeKind::Clamp { lo: a, hi: z, .. } = node.kind {
            // Clamping is exact in floating point, so its range needs no slack.
            lo = lo.clamp(a, z);
            hi = hi.clamp(a, z);
        }
        b.push(NodeBound { lower, upper, lo, hi });
    }

    let m = graph.output_dim();
    let mut psi = DMatrix::zeros(m, n);
    let mut phi = DMatrix::zeros(m, n);
    let mut alpha = DVector::zeros(m);
    let mut beta = DVector::zeros(m);
    let mut lo_out = Vec::with_capacity(m);
    let mut hi_out = Vec::with_capacity(m);
    for (k, &o) in graph.outputs().iter().enumerate() {
        let nb = &b[o];
        for j in 0..n {
            psi[(k, j)] = nb.lower.coef[j];
            phi[(k, j)] = nb.upper.coef[j];
        }
        alpha[k] = nb.lower.bias;
        beta[k] = nb.upper.bias;
        lo_out.push(nb.lo);
        hi_out.push(nb.hi);
    }
    (
        LinearBounds { psi, alpha, phi, beta },
        HyperRect::from_bounds(&lo_out, &hi_out),
    )
}

fn clamp_bounds(n: usize, x: &NodeBound, lo: f64, hi: f64) -> (AffineBound, AffineBound, (f64, f64)) {
    let (l, u) = (x.lo, x.hi);
    let ia = (l.clamp(lo, hi), u.clamp(lo, hi));
    if u <= lo {
        return (AffineBound::constant(n, lo), AffineBound::constant(n, lo), (lo, lo));
    }
    if l >= hi {
        return (AffineBound::constant(n, hi), AffineBound::constant(n, hi), (hi, hi));
    }
    if lo <= l && u <= hi {
        return (x.lower.clone(), x.upper.clone(), ia);
    }
    if l < lo && u <= hi {
        // max(x, lo): convex; chord above, x or lo below.
        let s = (u - lo) / (u - l);
        let mut upper = AffineBound::constant(n, lo - s * l);
        upper.axpy(s, &x.upper);
        let lower = if u - lo >= lo - l {
            x.lower.clone()
        } else {
            AffineBound::constant(n, lo)
        };
        return (lower, upper, ia);
    }
    if lo <= l && u > hi {
        // min(x, hi): concave; chord below, x or hi above.
        let s = (hi - l) / (u - l);
        let mut lower = AffineBound::constant(n, l - s * l);
        lower.axpy(s, &x.lower);
        let upper = if hi - l >= u - hi {
            x.upper.clone()
        } else {
            AffineBound::constant(n, hi)
        };
        return (lower, upper, ia);
    }
    (AffineBound::constant(n, lo), AffineBound::constant(n, hi), ia)
}
