//! Monte Carlo estimators that average closed-form exponentials over auxiliary normal parameters.
//!
//! A Gaussian-shaped function of quantum variables is written as a classical
//! average of Weyl-type exponentials over auxiliary normal parameters; the
//! quantum expectation of each exponential is known in closed form.
//!
//! Samples are split into fixed chunks; chunk `k` draws from a ChaCha8
//! stream `k` of the seed and chunk sums are combined in index order, so
//! results do not depend on the number of worker threads.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{diam, RMat};
use crate::qef::{intermediates, QefProblem};
use crate::state::GaussianState;

const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: Complex64,
    /// `sqrt(Var Re + Var Im) / sqrt(samples)`.
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
    /// Samples dropped because the integrand was not finite.
    pub rejected: usize,
}

impl McEstimate {
    /// `|mean - target| <= k std_error`.
    pub fn within(&self, target: Complex64, k: f64) -> bool {
        (self.mean - target).norm() <= k * self.std_error
    }
}

#[derive(Default, Clone, Copy)]
struct Sums {
    n: usize,
    rejected: usize,
    re: f64,
    im: f64,
    re2: f64,
    im2: f64,
}

/// Averages `f(z)` over `z ~ N(0, I_dim)`.
pub fn estimate<F>(dim: usize, samples: usize, seed: u64, f: F) -> Result<McEstimate>
where
    F: Fn(&DVector<f64>) -> Complex64 + Sync,
{
    if samples < 2 {
        return Err(Error::InvalidInput("at least two samples are required".into()));
    }
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Sums> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let count = CHUNK.min(samples - k * CHUNK);
            let mut s = Sums::default();
            let mut z = DVector::zeros(dim);
            for _ in 0..count {
                for x in z.iter_mut() {
                    *x = StandardNormal.sample(&mut rng);
                }
                let v = f(&z);
                if v.re.is_finite() && v.im.is_finite() {
                    s.n += 1;
                    s.re += v.re;
                    s.im += v.im;
                    s.re2 += v.re * v.re;
                    s.im2 += v.im * v.im;
                } else {
                    s.rejected += 1;
                }
            }
            s
        })
        .collect();
    let t = parts.iter().fold(Sums::default(), |a, b| Sums {
        n: a.n + b.n,
        rejected: a.rejected + b.rejected,
        re: a.re + b.re,
        im: a.im + b.im,
        re2: a.re2 + b.re2,
        im2: a.im2 + b.im2,
    });
    if t.n < 2 {
        return Err(Error::Divergence(format!("{} of {samples} samples were not finite", t.rejected)));
    }
    let n = t.n as f64;
    let (mre, mim) = (t.re / n, t.im / n);
    let var = ((t.re2 - n * mre * mre) + (t.im2 - n * mim * mim)).max(0.0) / (n - 1.0);
    Ok(McEstimate {
        mean: Complex64::new(mre, mim),
        std_error: (var / n).sqrt(),
        samples: t.n,
        seed,
        rejected: t.rejected,
    })
}

/// `E exp(-sigma2 xi^2 / 2) = E_c Phi(omega)`, `omega ~ N(0, sigma2)`,
/// `Phi(u) = exp(-big_sigma2 u^2 / 2)`.
pub fn mc_single_variable(big_sigma2: f64, sigma2: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    if !(big_sigma2 >= 0.0) || !(sigma2 >= 0.0) {
        return Err(Error::InvalidInput("variances must be nonnegative".into()));
    }
    let sd = sigma2.sqrt();
    estimate(1, samples, seed, |z| {
        let w = sd * z[0];
        Complex64::new((-0.5 * big_sigma2 * w * w).exp(), 0.0)
    })
}

/// `E prod_k exp(-X_k^2/2) = E_c exp(-u^T (P + i Theta_diam) u / 2)`, `u ~ N(0, I)`.
pub fn mc_product_moment(state: &GaussianState, samples: usize, seed: u64) -> Result<McEstimate> {
    let p = state.p().clone();
    let td = diam(state.theta())?;
    estimate(state.order(), samples, seed, move |u| {
        let re = u.dot(&(&p * u));
        let im = u.dot(&(&td * u));
        Complex64::new(-0.5 * re, -0.5 * im).exp()
    })
}

/// `Xi = E_c exp(omega^T L_diam omega / 2)`, `omega ~ N(0, Mho)`.
///
/// The estimator has finite mean only while `rho(Mho Re L) < 1` (and finite
/// variance only below 1/2); infeasible problems are refused unless `force`.
pub fn mc_qef(problem: &QefProblem, samples: usize, seed: u64, force: bool) -> Result<McEstimate> {
    let im = intermediates(problem)?;
    let rho = crate::matrix::spectral_radius_real(&im.mho_re_l())?;
    if rho >= 1.0 && !force {
        return Err(Error::Infeasible(rho));
    }
    let ld = im.l_diam();
    let re: RMat = ld.map(|z| z.re);
    let imag: RMat = ld.map(|z| z.im);
    let scale: Vec<f64> = im.mho.iter().map(|m| m.sqrt()).collect();
    estimate(scale.len(), samples, seed, move |z| {
        let w = DVector::from_iterator(z.len(), z.iter().zip(&scale).map(|(x, s)| x * s));
        Complex64::new(0.5 * w.dot(&(&re * &w)), 0.5 * w.dot(&(&imag * &w))).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variable_calibration() {
        let est = mc_single_variable(3.0, 2.0, 200_000, 7).unwrap();
        assert!(est.within(Complex64::new(1.0 / 7f64.sqrt(), 0.0), 3.0), "{est:?}");
    }

    #[test]
    fn deterministic_in_seed() {
        let a = mc_single_variable(1.0, 1.0, 40_000, 11).unwrap();
        let b = mc_single_variable(1.0, 1.0, 40_000, 11).unwrap();
        let c = mc_single_variable(1.0, 1.0, 40_000, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn zero_weight_is_exactly_one() {
        let p = QefProblem::new(GaussianState::vacuum(1), RMat::identity(2, 2) * 1e-300).unwrap();
        let est = mc_qef(&p, 1000, 1, false).unwrap();
        assert!((est.mean - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn refuses_infeasible() {
        let p = QefProblem::new(GaussianState::vacuum(1), RMat::identity(2, 2) * 2.0).unwrap();
        assert!(matches!(mc_qef(&p, 1000, 1, false), Err(Error::Infeasible(_))));
    }
}
