//! Zero-mean Gaussian states: admissibility `P + i Theta >= 0`, the
//! quasi-characteristic function and the moment-generating function.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::ccr::CcrMatrix;
use crate::error::{Error, Result};
use crate::matrix::{ensure_finite, ensure_symmetric, hermitian_eigh, max_abs, to_complex, CMat, RMat, I};

#[derive(Debug, Clone)]
pub struct GaussianState {
    p: RMat,
    ccr: CcrMatrix,
    min_eigenvalue: f64,
}

impl GaussianState {
    /// Accepts `P` when the smallest eigenvalue of `P + i Theta` is at least
    /// `-1e-10 (1 + ||P||)`.
    pub fn admissible(p: RMat, ccr: CcrMatrix) -> Result<Self> {
        let n = ccr.order();
        if p.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "P is {}x{} but the CCR matrix has order {n}",
                p.nrows(),
                p.ncols()
            )));
        }
        ensure_finite(&p, "P")?;
        ensure_symmetric(&p, "P")?;
        let p = (&p + p.transpose()) * 0.5;
        let cov = to_complex(&p) + to_complex(ccr.theta()) * I;
        let (values, _) = hermitian_eigh(&cov)?;
        let min_eigenvalue = values.first().copied().unwrap_or(0.0);
        if min_eigenvalue < -1e-10 * (1.0 + max_abs(&p)) {
            return Err(Error::Heisenberg(min_eigenvalue));
        }
        Ok(Self { p, ccr, min_eigenvalue })
    }

    /// Vacuum `P = I/2` over the canonical CCR matrix of `nu` modes.
    pub fn vacuum(nu: usize) -> Self {
        Self::thermal(nu, 0.5).expect("vacuum is admissible")
    }

    /// `P = s I` over the canonical CCR matrix; admissible for `s >= 1/2`.
    pub fn thermal(nu: usize, s: f64) -> Result<Self> {
        Self::admissible(RMat::identity(2 * nu, 2 * nu) * s, CcrMatrix::canonical(nu))
    }

    pub fn p(&self) -> &RMat {
        &self.p
    }

    pub fn ccr(&self) -> &CcrMatrix {
        &self.ccr
    }

    pub fn theta(&self) -> &RMat {
        self.ccr.theta()
    }

    pub fn order(&self) -> usize {
        self.p.nrows()
    }

    /// Smallest eigenvalue of `P + i Theta`.
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// Quantum covariance `P + i Theta`.
    pub fn covariance(&self) -> CMat {
        to_complex(&self.p) + to_complex(self.ccr.theta()) * I
    }

    /// Replaces `Theta` (e.g. by a scaled copy) keeping `P`.
    pub fn with_ccr(&self, ccr: CcrMatrix) -> Result<Self> {
        Self::admissible(self.p.clone(), ccr)
    }

    /// `Phi(u) = exp(-u^T P u / 2)`.
    pub fn qcf(&self, u: &DVector<f64>) -> Result<Complex64> {
        self.check_len(u.len())?;
        Ok(Complex64::new((-0.5 * self.quad(u)).exp(), 0.0))
    }

    /// `Psi(u) = exp(|M^T u|_P^2 / 2)` for the variables `M X`.
    pub fn mgf(&self, u: &DVector<f64>, map: &RMat) -> Result<f64> {
        if map.ncols() != self.order() || map.nrows() != u.len() {
            return Err(Error::Dimension(format!(
                "map is {}x{}, expected {}x{}",
                map.nrows(),
                map.ncols(),
                u.len(),
                self.order()
            )));
        }
        let v = map.transpose() * u;
        Ok((0.5 * self.quad(&v)).exp())
    }

    fn quad(&self, u: &DVector<f64>) -> f64 {
        u.dot(&(&self.p * u))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.order() {
            return Err(Error::Dimension(format!("vector has length {len}, expected {}", self.order())));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccr::bj;

    fn half_bj() -> CcrMatrix {
        CcrMatrix::validate(&bj() * 0.5).unwrap()
    }

    #[test]
    fn admissibility_examples() {
        let vac = GaussianState::admissible(RMat::identity(2, 2) * 0.5, half_bj()).unwrap();
        assert!(vac.min_eigenvalue().abs() < 1e-14);
        let th = GaussianState::admissible(RMat::identity(2, 2), half_bj()).unwrap();
        assert!((th.min_eigenvalue() - 0.5).abs() < 1e-14);
        match GaussianState::admissible(RMat::identity(2, 2) * 0.4, half_bj()) {
            Err(Error::Heisenberg(e)) => assert!((e + 0.1).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_asymmetric_and_mismatched() {
        let p = RMat::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 1.0]);
        assert!(matches!(GaussianState::admissible(p, half_bj()), Err(Error::Symmetry { .. })));
        assert!(matches!(
            GaussianState::admissible(RMat::identity(3, 3), half_bj()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn qcf_and_mgf_values() {
        let th = GaussianState::thermal(1, 1.0).unwrap();
        let zero = DVector::zeros(2);
        assert_eq!(th.qcf(&zero).unwrap(), Complex64::new(1.0, 0.0));
        let e1 = DVector::from_row_slice(&[1.0, 0.0]);
        assert!((th.qcf(&e1).unwrap().re - (-0.5f64).exp()).abs() < 1e-15);
        let id = RMat::identity(2, 2);
        assert_eq!(th.mgf(&zero, &id).unwrap(), 1.0);
        assert!((th.mgf(&e1, &id).unwrap() - 0.5f64.exp()).abs() < 1e-15);
        assert!(th.qcf(&DVector::zeros(3)).is_err());
    }
}
