//! Closed-form moments of products of Gaussian-shaped functions of the
//! quantum variables.
//!
//! `Y = prod_k exp(-X_k^2 / 2)` in index order. `E Y` is a complex
//! determinant root; `E Y Y^dag` is real and bounded by `1/sqrt(det(I + 2P))`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{c, det, diam, inv_sqrt_continued, reversal, to_complex, CMat, RMat, I};
use crate::state::GaussianState;

const HOMOTOPY_STEPS: usize = 64;

/// `E exp(-sigma2 xi^2 / 2) = 1/sqrt(1 + big_sigma2 sigma2)` for a
/// zero-mean Gaussian variable of variance `big_sigma2`.
pub fn single_variable_qem(big_sigma2: f64, sigma2: f64) -> Result<f64> {
    if !(big_sigma2 >= 0.0) || !(sigma2 >= 0.0) || !big_sigma2.is_finite() || !sigma2.is_finite() {
        return Err(Error::InvalidInput(format!(
            "variances must be finite and nonnegative, got {big_sigma2} and {sigma2}"
        )));
    }
    Ok(1.0 / (1.0 + big_sigma2 * sigma2).sqrt())
}

/// `E Y = 1/sqrt(det(P + I + i Theta_diam))`.
///
/// The root follows `det(P + I + i s Theta_diam)` from the real positive
/// value at `s = 0`.
pub fn product_moment_ey(state: &GaussianState) -> Result<Complex64> {
    let n = state.order();
    let base = to_complex(&(state.p() + RMat::identity(n, n)));
    let td = to_complex(&diam(state.theta())?) * I;
    let (value, _) = inv_sqrt_continued(|s| det(&(&base + &td * c(s, 0.0))), HOMOTOPY_STEPS)?;
    Ok(value)
}

#[derive(Debug, Clone)]
pub struct ProductMomentReport {
    /// `E Y Y^dag`, real part.
    pub value: f64,
    /// Imaginary part of the computed moment (zero in exact arithmetic).
    pub imaginary_part: f64,
    /// `1/sqrt(det(I + 2P))`.
    pub upper_bound: f64,
    /// `det(I_{2n} + K_diam)`.
    pub determinant: Complex64,
    /// `K = [I; R] (P + i Theta) [I R]`.
    pub k: CMat,
}

/// `E Y Y^dag = 1/sqrt(det(I_{2n} + K_diam))` with the augmented covariance
/// `K` of `(X, R X)`, `R` the reversal matrix.
pub fn product_moment_eyy(state: &GaussianState) -> Result<ProductMomentReport> {
    let n = state.order();
    let k = augmented_covariance(state)?;
    let kd = diam(&k)?;
    let id = CMat::identity(2 * n, 2 * n);
    let real_part = to_complex(&kd.map(|z| z.re));
    let imag_part = to_complex(&kd.map(|z| z.im)) * I;
    let (moment, determinant) =
        inv_sqrt_continued(|s| det(&(&id + &real_part + &imag_part * c(s, 0.0))), HOMOTOPY_STEPS)?;
    let classical = det(&(CMat::identity(n, n) + to_complex(state.p()) * c(2.0, 0.0)))?;
    Ok(ProductMomentReport {
        value: moment.re,
        imaginary_part: moment.im,
        upper_bound: 1.0 / classical.re.sqrt(),
        determinant,
        k,
    })
}

/// `[I; R] (P + i Theta) [I R]`, of order `2n`.
pub fn augmented_covariance(state: &GaussianState) -> Result<CMat> {
    let n = state.order();
    let r = reversal(n)?;
    let mut g = RMat::zeros(2 * n, n);
    g.view_mut((0, 0), (n, n)).fill_with_identity();
    g.view_mut((n, 0), (n, n)).copy_from(&r);
    let g = to_complex(&g);
    Ok(&g * state.covariance() * g.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccr::CcrMatrix;
    use crate::matrix::{hermitian_eigh, symmetric_eigh};

    #[test]
    fn single_variable_values() {
        assert!((single_variable_qem(1.0, 1.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(single_variable_qem(3.0, 0.0).unwrap(), 1.0);
        assert!((single_variable_qem(3.0, 2.0).unwrap() - 1.0 / 7f64.sqrt()).abs() < 1e-15);
        assert!(single_variable_qem(-1.0, 1.0).is_err());
    }

    #[test]
    fn vacuum_ey() {
        let ey = product_moment_ey(&GaussianState::vacuum(1)).unwrap();
        assert!((ey - Complex64::new(1.0 / 2.5f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn classical_ey_and_eyy() {
        for n in [1usize, 2, 4] {
            let ccr = CcrMatrix::validate(RMat::zeros(n, n)).unwrap();
            let st = GaussianState::admissible(RMat::identity(n, n), ccr).unwrap();
            let ey = product_moment_ey(&st).unwrap();
            assert!((ey.re - 2f64.powf(-(n as f64) / 2.0)).abs() < 1e-15 && ey.im == 0.0);
            let r = product_moment_eyy(&st).unwrap();
            assert!((r.value - r.upper_bound).abs() < 1e-14);
        }
    }

    #[test]
    fn vacuum_eyy_is_real_and_bounded() {
        let r = product_moment_eyy(&GaussianState::vacuum(1)).unwrap();
        assert!(r.imaginary_part.abs() < 1e-12);
        assert!(r.value > 0.0 && r.value <= 1.0 && r.value <= 0.5 + 1e-15);
    }

    #[test]
    fn augmented_spectrum_matches_twice_p() {
        let p = RMat::from_row_slice(2, 2, &[1.3, 0.2, 0.2, 0.7]);
        let st = GaussianState::admissible(p.clone(), CcrMatrix::canonical(1)).unwrap();
        let k = augmented_covariance(&st).unwrap();
        let real_k = to_complex(&k.map(|z| z.re));
        let (mut ev, _) = hermitian_eigh(&real_k).unwrap();
        ev.retain(|v| v.abs() > 1e-12);
        let (two_p, _) = symmetric_eigh(&(p * 2.0)).unwrap();
        for (a, b) in ev.iter().zip(&two_p) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
