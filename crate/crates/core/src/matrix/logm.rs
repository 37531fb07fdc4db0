use num_complex::Complex64;

use super::eigen::complex_schur;
use super::{c, ensure_square, norm1, CMat};
use crate::error::{Error, Result};

const GL_NODES: usize = 12;
const SQRT_TARGET: f64 = 0.25;

/// Principal matrix logarithm via complex Schur form and inverse scaling
/// and squaring.
///
/// Square roots of the triangular factor are taken until `||T - I||_1 <=
/// 1/4`; `log(I + X)` is then evaluated by Gauss-Legendre quadrature of
/// `int_0^1 X (I + tX)^{-1} dt`, which is the diagonal Pade approximant.
pub fn logm(m: &CMat) -> Result<CMat> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(m.clone());
    }
    let (q, mut t) = complex_schur(m)?;
    let scale = norm1(m).max(f64::MIN_POSITIVE);
    for k in 0..n {
        let lambda = t[(k, k)];
        if lambda.norm() <= 1e-14 * scale {
            return Err(Error::Singular);
        }
        if lambda.re < 0.0 && lambda.im.abs() <= 1e-12 * lambda.norm() {
            return Err(Error::BranchCut { eigenvalue: lambda });
        }
    }
    let id = CMat::identity(n, n);
    let mut roots = 0u32;
    while norm1(&(&t - &id)) > SQRT_TARGET {
        if roots >= 100 {
            return Err(Error::NoConvergence("logarithm square-root phase"));
        }
        t = sqrt_upper(&t);
        roots += 1;
    }
    let x = &t - &id;
    let mut log = CMat::zeros(n, n);
    for (node, weight) in gauss_legendre_unit(GL_NODES) {
        let lhs = &id + &x * c(node, 0.0);
        let term = lhs
            .solve_upper_triangular(&x)
            .ok_or(Error::Singular)?;
        log += term * c(weight, 0.0);
    }
    let log = log * c(2f64.powi(roots as i32), 0.0);
    Ok(&q * log * q.adjoint())
}

/// Principal square root of an upper-triangular matrix (Bjorck-Hammarling).
fn sqrt_upper(t: &CMat) -> CMat {
    let n = t.nrows();
    let mut r = CMat::zeros(n, n);
    for j in 0..n {
        r[(j, j)] = t[(j, j)].sqrt();
        for i in (0..j).rev() {
            let mut s: Complex64 = t[(i, j)];
            for k in (i + 1)..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            r[(i, j)] = s / (r[(i, i)] + r[(j, j)]);
        }
    }
    r
}

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
fn gauss_legendre_unit(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 1..=m {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (x + 1.0), 0.5 * w));
    }
    out
}
