use nalgebra::{Schur, SymmetricEigen};
use num_complex::Complex64;

use super::{c, ensure_finite, ensure_finite_c, ensure_square, max_abs, to_complex, CMat, RMat, I};
use crate::error::{Error, Result};

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigh(h: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = ensure_square(h)?;
    ensure_finite_c(h, "hermitian eigen-solve argument")?;
    let sym = (h + h.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 10_000)
        .ok_or(Error::NoConvergence("hermitian eigen-solve"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok((values, vectors))
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigh(m: &RMat) -> Result<(Vec<f64>, RMat)> {
    let n = ensure_square(m)?;
    ensure_finite(m, "symmetric eigen-solve argument")?;
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 10_000)
        .ok_or(Error::NoConvergence("symmetric eigen-solve"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = RMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok((values, vectors))
}

/// Complex Schur form `m = q t q^H` with `t` upper triangular.
pub(crate) fn complex_schur(m: &CMat) -> Result<(CMat, CMat)> {
    let n = ensure_square(m)?;
    ensure_finite_c(m, "Schur argument")?;
    // The QR sweeps can stall on near-scalar input; removing the mean
    // eigenvalue first avoids that without changing the Schur vectors.
    let shift = m.trace() / c(n.max(1) as f64, 0.0);
    let centered = m - CMat::identity(n, n) * shift;
    let schur = Schur::try_new(centered.clone(), f64::EPSILON, 100_000)
        .or_else(|| Schur::try_new(centered, 16.0 * f64::EPSILON, 100_000))
        .ok_or(Error::NoConvergence("complex Schur decomposition"))?;
    let (mut q, mut t) = schur.unpack();
    for k in 0..n {
        t[(k, k)] += shift;
    }
    let scale = t.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(f64::MIN_POSITIVE);
    // Split any 2x2 diagonal block left behind by the QR sweeps.
    let mut i = 0;
    while i + 1 < n {
        if t[(i + 1, i)].norm() > 1e-14 * scale {
            split_block(&mut q, &mut t, i);
        }
        i += 1;
    }
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = c(0.0, 0.0);
        }
    }
    Ok((q, t))
}

/// Unitary rotation on rows/columns `i, i+1` that triangularizes the block.
fn split_block(q: &mut CMat, t: &mut CMat, i: usize) {
    let (a, b, cc, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * cc).sqrt();
    let lambda = half_tr + disc;
    // eigenvector of [[a,b],[c,d]] for lambda
    let (mut v0, mut v1) = (b, lambda - a);
    if v0.norm() + v1.norm() < 1e-300 {
        v0 = lambda - d;
        v1 = cc;
    }
    let nrm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
    let (v0, v1) = (v0 / nrm, v1 / nrm);
    // G = [[v0, -conj(v1)], [v1, conj(v0)]]
    let g = [[v0, -v1.conj()], [v1, v0.conj()]];
    let n = t.nrows();
    // t <- G^H t
    for col in 0..n {
        let x = t[(i, col)];
        let y = t[(i + 1, col)];
        t[(i, col)] = g[0][0].conj() * x + g[1][0].conj() * y;
        t[(i + 1, col)] = g[0][1].conj() * x + g[1][1].conj() * y;
    }
    // t <- t G, q <- q G
    for m in [t, q] {
        for row in 0..n {
            let x = m[(row, i)];
            let y = m[(row, i + 1)];
            m[(row, i)] = x * g[0][0] + y * g[1][0];
            m[(row, i + 1)] = x * g[0][1] + y * g[1][1];
        }
    }
}

/// Eigenvalues of a general complex matrix (diagonal of its Schur form).
pub fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    let (_, t) = complex_schur(m)?;
    Ok((0..t.nrows()).map(|k| t[(k, k)]).collect())
}

pub fn spectral_radius(m: &CMat) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().fold(0.0, |a, z| a.max(z.norm())))
}

pub fn spectral_radius_real(m: &RMat) -> Result<f64> {
    spectral_radius(&to_complex(m))
}

/// Unique positive semidefinite square root of a Hermitian matrix.
///
/// Eigenvalues in `[-tol, 0)` are clamped to zero; anything below `-tol`
/// is rejected.
pub fn sqrt_psd(h: &CMat, tol: f64) -> Result<CMat> {
    let (values, vectors) = hermitian_eigh(h)?;
    if let Some(&min) = values.first() {
        if min < -tol {
            return Err(Error::NotPsd(min));
        }
    }
    let roots: Vec<Complex64> = values.iter().map(|&v| c(v.max(0.0).sqrt(), 0.0)).collect();
    let scaled = CMat::from_fn(h.nrows(), h.ncols(), |r, k| vectors[(r, k)] * roots[k]);
    Ok(scaled * vectors.adjoint())
}

/// Orthogonal normal form of a real antisymmetric matrix.
///
/// `o^T a o = blockdiag(mu_k * [[0, 1], [-1, 0]])` with `mu_k > 0` in
/// descending order.
#[derive(Debug, Clone)]
pub struct SkewNormalForm {
    pub o: RMat,
    pub mus: Vec<f64>,
}

/// Computes the normal form from the Hermitian matrix `i a`, whose
/// eigenvalues are `+-mu_k`.
///
/// For each eigenvector `u` of `+mu_k` the phase is fixed so that its
/// largest component is positive imaginary; then `o_{2k} = sqrt2 Im u`,
/// `o_{2k+1} = sqrt2 Re u`. Degenerate `mu_k` come out orthonormal because
/// the eigensolver returns an orthonormal basis of each eigenspace.
pub fn skew_normal_form(a: &RMat) -> Result<SkewNormalForm> {
    let n = ensure_square(a)?;
    ensure_finite(a, "antisymmetric matrix")?;
    if n % 2 != 0 {
        return Err(Error::Dimension(format!("antisymmetric normal form needs even order, got {n}")));
    }
    let anti = (a - a.transpose()) * 0.5;
    let h = to_complex(&anti) * I;
    let (values, vectors) = hermitian_eigh(&h)?;
    let nu = n / 2;
    let scale = max_abs(&anti).max(f64::MIN_POSITIVE);
    // ascending order: the top nu eigenvalues are +mu_k, read them descending
    let mut o = RMat::zeros(n, n);
    let mut mus = Vec::with_capacity(nu);
    for k in 0..nu {
        let idx = n - 1 - k;
        let mu = values[idx];
        if !(mu > 1e-13 * scale) {
            return Err(Error::Singular);
        }
        mus.push(mu);
        let u = vectors.column(idx);
        let umax = u.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let j = u
            .iter()
            .position(|z| z.norm() >= (1.0 - 1e-8) * umax)
            .unwrap_or(0);
        let phase = I * u[j].conj() / u[j].norm();
        let s2 = std::f64::consts::SQRT_2;
        for r in 0..n {
            let z = u[r] * phase;
            o[(r, 2 * k)] = s2 * z.im;
            o[(r, 2 * k + 1)] = s2 * z.re;
        }
    }
    Ok(SkewNormalForm { o, mus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::max_abs_c;

    #[test]
    fn near_scalar_input_converges() {
        let mut m = CMat::identity(4, 4) * c(0.3328360826246044, 0.0);
        m[(1, 0)] = c(-2.6e-18, 0.0);
        m[(2, 1)] = c(-4.27e-17, 0.0);
        m[(1, 2)] = c(-4.86e-17, 0.0);
        m[(3, 0)] = c(6.9e-18, 0.0);
        m[(3, 2)] = c(1.4e-17, 0.0);
        let rho = spectral_radius(&m).unwrap();
        assert!((rho - 0.3328360826246044).abs() < 1e-15);
    }

    #[test]
    fn schur_reconstructs_and_is_triangular() {
        let m = CMat::from_fn(5, 5, |j, k| c(((j * 7 + k * 3) % 5) as f64 - 2.0, (j as f64 - k as f64) * 0.3));
        let (q, t) = complex_schur(&m).unwrap();
        assert!(max_abs_c(&(&q * &t * q.adjoint() - &m)) < 1e-12);
        assert!(max_abs_c(&(&q.adjoint() * &q - CMat::identity(5, 5))) < 1e-12);
        for j in 0..5 {
            for i in (j + 1)..5 {
                assert_eq!(t[(i, j)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn schur_of_real_rotation_is_complex_triangular() {
        let m = to_complex(&RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let ev = eigenvalues(&m).unwrap();
        let mut ims: Vec<f64> = ev.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        assert!((ims[0] + 1.0).abs() < 1e-14 && (ims[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn spectral_radius_diag() {
        let m = RMat::from_row_slice(2, 2, &[-3.0, 0.0, 0.0, 2.0]);
        assert!((spectral_radius_real(&m).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn sqrt_psd_roundtrip_and_rejection() {
        let b = CMat::from_fn(3, 3, |j, k| c((j + k) as f64 * 0.2, j as f64 - k as f64));
        let h = &b * b.adjoint();
        let r = sqrt_psd(&h, 1e-12).unwrap();
        assert!(max_abs_c(&(&r * &r - &h)) < 1e-11);
        assert!(max_abs_c(&(&r - r.adjoint())) < 1e-12);
        let neg = to_complex(&RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5]));
        assert!(matches!(sqrt_psd(&neg, 1e-12), Err(Error::NotPsd(_))));
    }

    #[test]
    fn skew_form_reconstructs() {
        let g = RMat::from_fn(6, 6, |j, k| ((j * 5 + k * 11) % 7) as f64 * 0.4 - 1.1);
        let a = &g - g.transpose();
        let form = skew_normal_form(&a).unwrap();
        let bj = RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let mut blocks = RMat::zeros(6, 6);
        for (k, mu) in form.mus.iter().enumerate() {
            blocks.view_mut((2 * k, 2 * k), (2, 2)).copy_from(&(&bj * *mu));
        }
        assert!(form.mus.windows(2).all(|w| w[0] >= w[1]));
        assert!((form.o.transpose() * &form.o - RMat::identity(6, 6)).abs().max() < 1e-12);
        assert!((&form.o * blocks * form.o.transpose() - a).abs().max() < 1e-12);
    }

    #[test]
    fn skew_form_degenerate_spectrum() {
        let bj = RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let a = crate::matrix::kron(&RMat::identity(3, 3), &bj) * 0.7;
        let form = skew_normal_form(&a).unwrap();
        assert!(form.mus.iter().all(|m| (m - 0.7).abs() < 1e-14));
        assert!((form.o.transpose() * &form.o - RMat::identity(6, 6)).abs().max() < 1e-12);
        assert!((form.o.transpose() * &a * &form.o - &a).abs().max() < 1e-12);
    }

    #[test]
    fn skew_form_gauge_is_identity_for_canonical_input() {
        let bj = RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let form = skew_normal_form(&(&bj * 2.0)).unwrap();
        assert!((form.o - RMat::identity(2, 2)).abs().max() < 1e-14);
        assert!(matches!(skew_normal_form(&RMat::zeros(2, 2)), Err(Error::Singular)));
    }
}
