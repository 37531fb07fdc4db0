//! Quadratic-exponential functional `Xi = E exp(X^T Pi X)` of a Gaussian state.
//!
//! After `Theta = T J T^T` and `V^T T^T Pi T V = Lambda (x) I_2`, each mode
//! splits as `exp(lambda (q^2 + p^2)) = exp(alpha q^2) exp(beta p^2)
//! exp(alpha q^2)` with `alpha = tanh(lambda)/2`, `beta = sinh(2 lambda)/2`.
//! Randomizing the three factors gives
//! `Xi = 1/sqrt(det(I - Mho L_diam))`, finite while `rho(Mho Re L) < 1`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ccr::{canonical_j, CcrCanonicalization};
use crate::error::{Error, Result};
use crate::matrix::{
    det, diam, ensure_finite, ensure_symmetric, inv_sqrt_continued, spectral_radius, spectral_radius_real,
    symmetric_eigh, to_complex, CMat, RMat, I,
};
use crate::state::GaussianState;
use crate::williamson::{williamson, WilliamsonDecomposition};

const HOMOTOPY_STEPS: usize = 64;

#[derive(Debug, Clone)]
pub struct QefProblem {
    state: GaussianState,
    pi: RMat,
    risk: f64,
}

impl QefProblem {
    pub fn new(state: GaussianState, pi: RMat) -> Result<Self> {
        let n = state.order();
        if pi.shape() != (n, n) {
            return Err(Error::Dimension(format!("Pi is {}x{}, expected {n}x{n}", pi.nrows(), pi.ncols())));
        }
        ensure_finite(&pi, "Pi")?;
        ensure_symmetric(&pi, "Pi")?;
        let pi = (&pi + pi.transpose()) * 0.5;
        let (values, _) = symmetric_eigh(&pi)?;
        if let Some(&min) = values.first() {
            if !(min > 0.0) {
                return Err(Error::NotPositiveDefinite(min));
            }
        }
        Ok(Self { state, pi, risk: 1.0 })
    }

    /// Scales the weight as `Pi -> theta Pi`.
    pub fn with_risk(&self, theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidInput(format!("risk parameter must be positive, got {theta}")));
        }
        Ok(Self { risk: theta, ..self.clone() })
    }

    pub fn state(&self) -> &GaussianState {
        &self.state
    }

    pub fn pi(&self) -> &RMat {
        &self.pi
    }

    pub fn risk(&self) -> f64 {
        self.risk
    }

    /// `theta Pi`.
    pub fn effective_pi(&self) -> RMat {
        &self.pi * self.risk
    }
}

/// Intermediate matrices of the determinant formula.
#[derive(Debug, Clone)]
pub struct QefIntermediates {
    pub t: RMat,
    pub t_inv: RMat,
    pub williamson: WilliamsonDecomposition,
    /// `I_nu (x) [[1, 0], [0, 1], [1, 0]]`.
    pub f: RMat,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// `F V^{-1} T^{-1} P T^{-T} V^{-T} F^T + i F J F^T`.
    pub l: CMat,
    /// Diagonal of `Mho = 2 blockdiag(alpha_k, beta_k, alpha_k)`.
    pub mho: Vec<f64>,
}

impl QefIntermediates {
    pub fn lambdas(&self) -> &[f64] {
        self.williamson.lambdas()
    }

    pub fn l_diam(&self) -> CMat {
        diam(&self.l).expect("L is square")
    }

    /// `Mho Re L`.
    pub fn mho_re_l(&self) -> RMat {
        let mut m = self.l.map(|z| z.re);
        for (r, &w) in self.mho.iter().enumerate() {
            m.row_mut(r).scale_mut(w);
        }
        m
    }

    /// `det(I - Mho(s) L_diam)` with `Mho(s)` built from `s lambda_k`.
    fn det_at(&self, s: f64) -> Result<Complex64> {
        let ld = self.l_diam();
        let n = ld.nrows();
        let mho = mho_diagonal(&self.lambdas().iter().map(|l| s * l).collect::<Vec<_>>());
        let mut m = -ld;
        for (r, &w) in mho.iter().enumerate() {
            m.row_mut(r).scale_mut(w);
        }
        det(&(CMat::identity(n, n) + m))
    }
}

/// `(alpha_k, beta_k)` with `alpha = tanh(lambda)/2`, `beta = sinh(2 lambda)/2`.
pub fn mode_factors(lambda: f64) -> (f64, f64) {
    (0.5 * lambda.tanh(), 0.5 * (2.0 * lambda).sinh())
}

fn mho_diagonal(lambdas: &[f64]) -> Vec<f64> {
    lambdas
        .iter()
        .flat_map(|&l| {
            let (a, b) = mode_factors(l);
            [2.0 * a, 2.0 * b, 2.0 * a]
        })
        .collect()
}

fn triple_map(nu: usize) -> RMat {
    let block = RMat::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
    RMat::identity(nu, nu).kronecker(&block)
}

/// Intermediates with the default canonicalization and eigenvalue order.
pub fn intermediates(problem: &QefProblem) -> Result<QefIntermediates> {
    let canon = problem.state.ccr().canonicalize()?;
    intermediates_with(problem, &canon, None)
}

/// Intermediates for a given factor `T` and, optionally, a reordering of
/// the symplectic eigenvalue blocks.
pub fn intermediates_with(
    problem: &QefProblem,
    canon: &CcrCanonicalization,
    order: Option<&[usize]>,
) -> Result<QefIntermediates> {
    let t = canon.t().clone();
    let t_inv = canon.t_inv().clone();
    let m = t.transpose() * problem.effective_pi() * &t;
    let m = (&m + m.transpose()) * 0.5;
    let mut w = williamson(&m)?;
    if let Some(order) = order {
        w = w.permuted(order)?;
    }
    let nu = canon.nu();
    let f = triple_map(nu);
    let g = &f * w.v_inv() * &t_inv;
    let re = &g * problem.state.p() * g.transpose();
    let im = &f * canonical_j(nu) * f.transpose();
    let l = to_complex(&re) + to_complex(&im) * I;
    let (alphas, betas): (Vec<f64>, Vec<f64>) = w.lambdas().iter().map(|&l| mode_factors(l)).unzip();
    let mho = mho_diagonal(w.lambdas());
    Ok(QefIntermediates {
        t,
        t_inv,
        williamson: w,
        f,
        alphas,
        betas,
        l,
        mho,
    })
}

/// `rho(P Pi) max_k sinh(2 lambda_k)/lambda_k`, sufficient for feasibility
/// when below 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SufficientCondition {
    pub margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct QefReport {
    pub xi: Complex64,
    /// `rho(Mho Re L) < 1`.
    pub feasible: bool,
    pub spectral_radius: f64,
    /// `rho(Mho L_diam)`, reported for inspection only.
    pub complex_spectral_radius: f64,
    pub sufficient: SufficientCondition,
    /// `1/sqrt(det(I - 2 P Pi))`, absent when `rho(2 P Pi) >= 1`.
    pub classical_limit: Option<f64>,
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub determinant: Complex64,
    pub degenerate_spectrum: bool,
    pub risk: f64,
}

/// Evaluates `Xi`. Infeasible problems still get the analytic value, with
/// `feasible = false`.
pub fn compute_qef(problem: &QefProblem) -> Result<QefReport> {
    let im = intermediates(problem)?;
    report_from(problem, &im)
}

pub fn report_from(problem: &QefProblem, im: &QefIntermediates) -> Result<QefReport> {
    let rho = spectral_radius_real(&im.mho_re_l())?;
    let mut ml = im.l_diam();
    for (r, &w) in im.mho.iter().enumerate() {
        ml.row_mut(r).scale_mut(w);
    }
    let complex_spectral_radius = spectral_radius(&ml)?;
    let (xi, determinant) = inv_sqrt_continued(|s| im.det_at(s), HOMOTOPY_STEPS)?;
    Ok(QefReport {
        xi,
        feasible: rho < 1.0,
        spectral_radius: rho,
        complex_spectral_radius,
        sufficient: sufficient_from(problem, im.lambdas())?,
        classical_limit: classical_limit(problem).ok(),
        lambdas: im.lambdas().to_vec(),
        alphas: im.alphas.clone(),
        betas: im.betas.clone(),
        determinant,
        degenerate_spectrum: im.williamson.is_degenerate(),
        risk: problem.risk,
    })
}

pub fn sufficient_condition(problem: &QefProblem) -> Result<SufficientCondition> {
    let im = intermediates(problem)?;
    sufficient_from(problem, im.lambdas())
}

fn sufficient_from(problem: &QefProblem, lambdas: &[f64]) -> Result<SufficientCondition> {
    let rho = spectral_radius_real(&(problem.state.p() * problem.effective_pi()))?;
    let factor = lambdas
        .iter()
        .map(|&l| if l < 1e-8 { 2.0 + 4.0 * l * l / 3.0 } else { (2.0 * l).sinh() / l })
        .fold(0.0, f64::max);
    let margin = rho * factor;
    Ok(SufficientCondition { margin, holds: margin < 1.0 })
}

/// `1/sqrt(det(I - 2 P Pi))`, the commuting-variable value.
pub fn classical_limit(problem: &QefProblem) -> Result<f64> {
    let two_p_pi = problem.state.p() * problem.effective_pi() * 2.0;
    let rho = spectral_radius_real(&two_p_pi)?;
    if rho >= 1.0 {
        return Err(Error::ClassicalDivergence(rho));
    }
    let n = two_p_pi.nrows();
    let d = (RMat::identity(n, n) - two_p_pi).determinant();
    Ok(1.0 / d.sqrt())
}

/// `Xi(theta Pi)` over a grid of risk parameters, evaluated in parallel.
pub fn sweep(problem: &QefProblem, grid: &[f64]) -> Vec<Result<QefReport>> {
    grid.par_iter()
        .map(|&theta| compute_qef(&problem.with_risk(theta)?))
        .collect()
}
