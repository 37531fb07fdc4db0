//! Dense real/complex matrix substrate.
//!
//! Everything here is a pure function of its inputs. Real matrices are
//! `DMatrix<f64>`, complex ones `DMatrix<Complex64>`; the matrix functions
//! (exponential, principal logarithm, `upsilon`) work on the complex type and
//! real inputs are lifted with [`to_complex`].

mod eigen;
mod expm;
mod logm;

pub use eigen::{
    eigenvalues, hermitian_eigh, skew_normal_form, spectral_radius, spectral_radius_real,
    sqrt_psd, symmetric_eigh, SkewNormalForm,
};
pub use expm::{expm, expm_real, upsilon};
pub use logm::logm;

use nalgebra::{DMatrix, Scalar};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

pub fn imag_part(m: &CMat) -> RMat {
    m.map(|z| z.im)
}

pub fn max_abs(m: &RMat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_c(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Maximum absolute column sum.
pub fn norm1(m: &CMat) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn ensure_square<T: Scalar>(m: &DMatrix<T>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    Ok(m.nrows())
}

pub fn ensure_finite(m: &RMat, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn ensure_finite_c(m: &CMat, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Which symmetry a matrix is expected to have.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryKind {
    Symmetric,
    Antisymmetric,
    Hermitian,
    None,
}

impl SymmetryKind {
    fn name(self) -> &'static str {
        match self {
            SymmetryKind::Symmetric => "symmetric",
            SymmetryKind::Antisymmetric => "antisymmetric",
            SymmetryKind::Hermitian => "hermitian",
            SymmetryKind::None => "unconstrained",
        }
    }
}

/// A symmetry expectation together with the tolerance it is checked at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryTag {
    pub kind: SymmetryKind,
    pub tolerance: f64,
}

impl SymmetryTag {
    pub fn new(kind: SymmetryKind, tolerance: f64) -> Self {
        Self { kind, tolerance }
    }

    /// Tag with the default tolerance `1e-9 * (1 + max|m_jk|)`.
    pub fn default_for(kind: SymmetryKind, m: &CMat) -> Self {
        Self::new(kind, default_symmetry_tolerance(max_abs_c(m)))
    }

    pub fn residual(&self, m: &CMat) -> f64 {
        let n = m.nrows();
        let mut r: f64 = 0.0;
        for j in 0..n {
            for k in 0..m.ncols().min(n) {
                let d = match self.kind {
                    SymmetryKind::Symmetric => m[(j, k)] - m[(k, j)],
                    SymmetryKind::Antisymmetric => m[(j, k)] + m[(k, j)],
                    SymmetryKind::Hermitian => m[(j, k)] - m[(k, j)].conj(),
                    SymmetryKind::None => Complex64::new(0.0, 0.0),
                };
                r = r.max(d.norm());
            }
        }
        r
    }

    /// Returns the residual if the matrix is square and within tolerance.
    pub fn check(&self, m: &CMat, what: &'static str) -> Result<f64> {
        ensure_square(m)?;
        let residual = self.residual(m);
        if residual > self.tolerance {
            return Err(Error::Symmetry {
                what,
                kind: self.kind.name(),
                residual,
                tolerance: self.tolerance,
            });
        }
        Ok(residual)
    }

    pub fn check_real(&self, m: &RMat, what: &'static str) -> Result<f64> {
        self.check(&to_complex(m), what)
    }
}

pub fn default_symmetry_tolerance(scale: f64) -> f64 {
    1e-9 * (1.0 + scale)
}

/// Checks a real matrix is square, finite and symmetric at the default tolerance.
pub fn ensure_symmetric(m: &RMat, what: &'static str) -> Result<()> {
    ensure_square(m)?;
    ensure_finite(m, what)?;
    let tag = SymmetryTag::new(SymmetryKind::Symmetric, default_symmetry_tolerance(max_abs(m)));
    tag.check_real(m, what).map(|_| ())
}

pub fn ensure_symmetric_c(m: &CMat, what: &'static str) -> Result<()> {
    ensure_square(m)?;
    ensure_finite_c(m, what)?;
    SymmetryTag::default_for(SymmetryKind::Symmetric, m)
        .check(m, what)
        .map(|_| ())
}

pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.transpose()) * c(0.5, 0.0)
}

pub fn symmetrize_real(m: &RMat) -> RMat {
    (m + m.transpose()) * 0.5
}

/// Symmetric matrix inheriting the diagonal and upper triangle of `m`.
pub fn diam<T: Scalar>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = ensure_square(m)?;
    Ok(DMatrix::from_fn(n, n, |j, k| {
        if j <= k {
            m[(j, k)].clone()
        } else {
            m[(k, j)].clone()
        }
    }))
}

/// Order-`n` matrix with ones on the anti-diagonal.
pub fn reversal(n: usize) -> Result<RMat> {
    if n == 0 {
        return Err(Error::InvalidInput("reversal matrix needs order >= 1".into()));
    }
    Ok(RMat::from_fn(n, n, |j, k| if j + k == n - 1 { 1.0 } else { 0.0 }))
}

pub fn kron<T>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T>
where
    T: nalgebra::ComplexField,
{
    a.kronecker(b)
}

pub fn det(m: &CMat) -> Result<Complex64> {
    ensure_square(m)?;
    ensure_finite_c(m, "determinant argument")?;
    Ok(m.clone().determinant())
}

pub fn det_real(m: &RMat) -> Result<f64> {
    ensure_square(m)?;
    ensure_finite(m, "determinant argument")?;
    Ok(m.clone().determinant())
}

pub fn inverse_real(m: &RMat) -> Result<RMat> {
    ensure_square(m)?;
    m.clone().try_inverse().ok_or(Error::Singular)
}

pub fn block_diag_real(blocks: &[&RMat]) -> RMat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = RMat::zeros(rows, cols);
    let (mut r, mut k) = (0, 0);
    for b in blocks {
        out.view_mut((r, k), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        k += b.ncols();
    }
    out
}

/// `1/sqrt(det)` on the branch continuously connected to `path(0)`.
///
/// `path` evaluates the determinant along a homotopy `s in [0, 1]`; `path(0)`
/// must be real positive. When `|arg det(1)| <= pi/2` the principal root is
/// returned directly, otherwise the argument is unwrapped along the path.
/// Returns `(value, det(1))`.
pub fn inv_sqrt_continued<F>(path: F, steps: usize) -> Result<(Complex64, Complex64)>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let end = path(1.0)?;
    if end.norm() == 0.0 || !end.re.is_finite() || !end.im.is_finite() {
        return Err(Error::DeterminantBranch { determinant: end });
    }
    if end.arg().abs() <= std::f64::consts::FRAC_PI_2 {
        return Ok((end.sqrt().inv(), end));
    }
    let start = path(0.0)?;
    if !(start.re > 0.0) {
        return Err(Error::DeterminantBranch { determinant: start });
    }
    let steps = steps.max(8);
    let mut arg = start.arg();
    let mut prev = start;
    let mut s_prev = 0.0;
    for i in 1..=steps {
        let s = i as f64 / steps as f64;
        arg += unwrap_segment(&path, s_prev, prev, s, 0)?;
        prev = path(s)?;
        s_prev = s;
    }
    let value = Complex64::from_polar(prev.norm().powf(-0.5), -0.5 * arg);
    Ok((value, end))
}

fn unwrap_segment<F>(path: &F, s0: f64, d0: Complex64, s1: f64, depth: u32) -> Result<f64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let d1 = path(s1)?;
    if d1.norm() == 0.0 || !d1.re.is_finite() || !d1.im.is_finite() {
        return Err(Error::DeterminantBranch { determinant: d1 });
    }
    let delta = (d1 / d0).arg();
    if delta.abs() <= std::f64::consts::FRAC_PI_4 || depth >= 30 {
        return Ok(delta);
    }
    let mid = 0.5 * (s0 + s1);
    let dm = path(mid)?;
    Ok(unwrap_segment(path, s0, d0, mid, depth + 1)? + unwrap_segment(path, mid, dm, s1, depth + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn diam_examples() {
        let m = RMat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(diam(&m).unwrap(), RMat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]));
        let s = RMat::from_row_slice(2, 2, &[1.0, 5.0, 5.0, -2.0]);
        assert_eq!(diam(&s).unwrap(), s);
        let theta = RMat::from_row_slice(2, 2, &[0.0, 0.7, -0.7, 0.0]);
        assert_eq!(diam(&theta).unwrap(), RMat::from_row_slice(2, 2, &[0.0, 0.7, 0.7, 0.0]));
        assert!(matches!(diam(&RMat::zeros(2, 3)), Err(Error::NotSquare(2, 3))));
    }

    #[test]
    fn diam_idempotent_and_linear() {
        let a = RMat::from_fn(4, 4, |j, k| (j as f64 + 1.3 * k as f64).sin());
        let b = RMat::from_fn(4, 4, |j, k| (2.0 * j as f64 - k as f64).cos());
        let da = diam(&a).unwrap();
        assert_eq!(diam(&da).unwrap(), da);
        let lhs = diam(&(&a * 2.0 + &b)).unwrap();
        let rhs = &da * 2.0 + diam(&b).unwrap();
        assert!((lhs - rhs).abs().max() < 1e-15);
    }

    #[test]
    fn reversal_examples() {
        assert_eq!(reversal(1).unwrap(), RMat::identity(1, 1));
        assert_eq!(reversal(2).unwrap(), RMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        for n in 1..7 {
            let r = reversal(n).unwrap();
            assert_eq!(&r * &r, RMat::identity(n, n));
            assert_eq!(r.transpose(), r);
        }
        assert!(reversal(0).is_err());
    }

    #[test]
    fn symmetry_tag_checks() {
        let m = to_complex(&RMat::from_row_slice(2, 2, &[0.0, 1.0, -0.9, 0.0]));
        let tag = SymmetryTag::default_for(SymmetryKind::Antisymmetric, &m);
        assert!(tag.check(&m, "theta").is_err());
        let h = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, -2.0), c(3.0, 0.0)]);
        let tag = SymmetryTag::default_for(SymmetryKind::Hermitian, &h);
        assert_eq!(tag.check(&h, "h").unwrap(), 0.0);
    }

    #[test]
    fn kron_determinant_identity() {
        // det(A (x) B) = det(A)^m det(B)^n for A n x n, B m x m.
        let a = RMat::from_row_slice(2, 2, &[1.2, -0.3, 0.4, 0.9]);
        let b = RMat::from_row_slice(3, 3, &[0.5, 0.1, 0.0, -0.2, 1.1, 0.3, 0.7, 0.0, 0.8]);
        let lhs = det_real(&kron(&a, &b)).unwrap();
        let rhs = det_real(&a).unwrap().powi(3) * det_real(&b).unwrap().powi(2);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    #[test]
    fn continued_root_matches_principal_when_safe() {
        let (v, d) = inv_sqrt_continued(|s| Ok(c(2.0 + s, s)), 16).unwrap();
        assert_relative_eq!(v.re, d.sqrt().inv().re, epsilon = 1e-15);
        // A path whose determinant winds past the negative axis picks the
        // continuous branch, not the principal one.
        let path = |s: f64| Ok(Complex64::from_polar(1.0, 1.2 * std::f64::consts::PI * s));
        let (v, _) = inv_sqrt_continued(path, 16).unwrap();
        let expected = Complex64::from_polar(1.0, -0.6 * std::f64::consts::PI);
        assert!((v - expected).norm() < 1e-12);
    }
}
