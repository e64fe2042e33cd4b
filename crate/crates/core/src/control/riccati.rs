//! Continuous-time algebraic Riccati and Lyapunov solvers for small dense systems.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const SIGN_MAX_ITER: usize = 200;
const SMITH_MAX_ITER: usize = 120;

/// Largest real part among the eigenvalues of `a`.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn is_hurwitz(a: &DMatrix<f64>) -> bool {
    spectral_abscissa(a) < 0.0
}

fn check_square(m: &DMatrix<f64>, n: usize, what: &str) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "{what} must be {n}x{n}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix input"));
    }
    Ok(())
}

/// Matrix sign function by the determinant-scaled Newton iteration.
fn matrix_sign(h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = h.nrows();
    let mut z = h.clone();
    for _ in 0..SIGN_MAX_ITER {
        let lu = z.clone().lu();
        let det = lu.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NotStabilizable);
        }
        let zi = lu.try_inverse().ok_or(Error::NotStabilizable)?;
        let c = det.abs().powf(-1.0 / n as f64);
        let next = (&z * c + &zi / c) * 0.5;
        let diff = (&next - &z).norm();
        let scale = next.norm();
        z = next;
        if diff <= 1e-13 * scale {
            // One unscaled polish step once converged.
            let zi = z.clone().try_inverse().ok_or(Error::NotStabilizable)?;
            return Ok((&z + zi) * 0.5);
        }
    }
    Err(Error::NotStabilizable)
}

/// Stabilizing solution `P` of `A'P + PA - P B R^-1 B' P + Q = 0`.
pub fn solve_care(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    check_square(a, n, "A")?;
    check_square(q, n, "Q")?;
    let m = b.ncols();
    if b.nrows() != n {
        return Err(Error::InvalidArgument("B row count must match A".into()));
    }
    check_square(r, m, "R")?;
    let r_inv = r
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("R must be positive definite".into()))?
        .inverse();
    let g = b * &r_inv * b.transpose();

    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-&g));
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let w = matrix_sign(&h)?;
    let eye = DMatrix::<f64>::identity(n, n);
    let mut lhs = DMatrix::zeros(2 * n, n);
    lhs.view_mut((0, 0), (n, n)).copy_from(&w.view((0, n), (n, n)));
    lhs.view_mut((n, 0), (n, n))
        .copy_from(&(w.view((n, n), (n, n)) + &eye));
    let mut rhs = DMatrix::zeros(2 * n, n);
    rhs.view_mut((0, 0), (n, n))
        .copy_from(&(-(w.view((0, 0), (n, n)) + &eye)));
    rhs.view_mut((n, 0), (n, n))
        .copy_from(&(-w.view((n, 0), (n, n))));

    let svd = lhs.svd(true, true);
    let p = svd
        .solve(&rhs, 1e-12)
        .map_err(|_| Error::Singular("Riccati subspace"))?;
    let p = (&p + p.transpose()) * 0.5;
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotStabilizable);
    }
    let closed = a - &g * &p;
    if !is_hurwitz(&closed) {
        return Err(Error::NotStabilizable);
    }
    Ok(p)
}

/// Infinite-horizon LQR gain for a single-input system. Returns `(K, P)` with
/// `K = R^-1 B' P`, so that `u = -K x` is stabilizing.
pub fn solve_care_lqr(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    q: &DMatrix<f64>,
    r: f64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("R must be positive, got {r}")));
    }
    let bm = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let p = solve_care(a, &bm, q, &DMatrix::from_element(1, 1, r))?;
    let k = (p.transpose() * b) / r;
    Ok((k, p))
}

/// `A'P + PA - P B R^-1 B' P + Q`.
pub fn care_residual(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> DMatrix<f64> {
    let r_inv = r.clone().try_inverse().expect("R invertible");
    a.transpose() * p + p * a - p * b * r_inv * b.transpose() * p + q
}

/// Solution `P` of `P A + A' P + Q = 0` for Hurwitz `A`.
///
/// Uses a Cayley transform to the equivalent Stein equation followed by
/// Smith doubling.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    check_square(a, n, "A")?;
    check_square(q, n, "Q")?;
    let eig = a.complex_eigenvalues();
    let max_re = eig.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re >= 0.0 {
        return Err(Error::NotHurwitz(max_re));
    }
    let min_re = eig.iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
    // Shift balancing the slowest and fastest modes.
    let shift = (max_re * min_re).sqrt();

    let m = a.transpose();
    let eye = DMatrix::<f64>::identity(n, n);
    let left = (&eye * shift - &m)
        .try_inverse()
        .ok_or(Error::Singular("Cayley transform"))?;
    let mut ak = &left * (&eye * shift + &m);
    let mut pk = &left * q * left.transpose() * (2.0 * shift);
    for _ in 0..SMITH_MAX_ITER {
        let inc = &ak * &pk * ak.transpose();
        let done = inc.norm() <= 1e-17 * pk.norm();
        pk += inc;
        ak = &ak * &ak;
        if done {
            break;
        }
    }
    let p = (&pk + pk.transpose()) * 0.5;
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Lyapunov solution"));
    }
    Ok(p)
}

pub fn lyapunov_residual(a: &DMatrix<f64>, q: &DMatrix<f64>, p: &DMatrix<f64>) -> DMatrix<f64> {
    p * a + a.transpose() * p + q
}
