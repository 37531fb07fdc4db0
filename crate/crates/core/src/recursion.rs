//! Single-exponential form of multiplicative quadratic-exponential costs.
//!
//! `Q_N = exp(X^T C_N X) Q_{N-1} exp(X^T C_N X)` with `Q_0 = exp(X_0^T C_0 X_0)`
//! equals `exp(X^T Pi_N X)` over the history `X = (X_0, ..., X_N)` when
//! `exp(4i Theta_N Pi_N) = exp(4i Theta_N C_N) M_N exp(4i Theta_N C_N)`, where
//! `M_N = [[exp(G), 0], [4i sigma_N Pi_{N-1} Upsilon(G), I_n]]` and
//! `G = 4i Theta_{N-1} Pi_{N-1}` is the image of `blockdiag(Pi_{N-1}, 0)`.

use crate::ccr::{CcrMatrix, ProcessCcr};
use crate::error::{Error, Result};
use crate::matrix::{
    c, ensure_finite, ensure_symmetric, expm, inverse_real, logm, max_abs, max_abs_c, to_complex, upsilon, CMat,
    RMat,
};

pub const DEFAULT_HORIZON_CAP: usize = 64;
/// Relative tolerance on `Im Pi_N` before it is discarded.
pub const REALNESS_TOLERANCE: f64 = 1e-9;

/// Diagnostics of one recursion step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub horizon: usize,
    /// `max |Im Pi_N|` before realification.
    pub imaginary_residual: f64,
    /// `max |Pi_N - Pi_N^T|` before symmetrization.
    pub asymmetry_residual: f64,
    /// `max |S Theta_N S^T - Theta_N|` for `S = exp(4i Theta_N Pi_N)`.
    pub symplectic_residual: f64,
    /// Cumulative `sum |4i Theta C|_F` over all factors so far.
    pub guard_norm: f64,
    pub branch_risk: bool,
}

#[derive(Debug, Clone)]
pub struct RecursionState {
    process: ProcessCcr,
    pi: RMat,
    /// `exp(4i Theta_N Pi_N)` as the product of the step factors.
    image: CMat,
    guard_norm: f64,
    horizon_cap: usize,
    trace: Vec<StepRecord>,
}

impl RecursionState {
    /// `Pi_0 = C_0` over `Theta_0`.
    pub fn init(theta0: RMat, c0: RMat) -> Result<Self> {
        let process = ProcessCcr::new(theta0)?;
        check_weight(&c0, process.theta().nrows(), "C_0")?;
        let c0 = (&c0 + c0.transpose()) * 0.5;
        let g = generator(process.theta(), &c0);
        let guard_norm = g.norm();
        let image = expm(&g)?;
        let record = StepRecord {
            horizon: 0,
            imaginary_residual: 0.0,
            asymmetry_residual: 0.0,
            symplectic_residual: symplectic_residual(&image, process.theta()),
            guard_norm,
            branch_risk: guard_norm >= std::f64::consts::PI,
        };
        Ok(Self {
            process,
            pi: c0,
            image,
            guard_norm,
            horizon_cap: DEFAULT_HORIZON_CAP,
            trace: vec![record],
        })
    }

    pub fn with_horizon_cap(mut self, cap: usize) -> Self {
        self.horizon_cap = cap;
        self
    }

    pub fn horizon(&self) -> usize {
        self.process.horizon()
    }

    pub fn pi(&self) -> &RMat {
        &self.pi
    }

    pub fn process(&self) -> &ProcessCcr {
        &self.process
    }

    pub fn theta(&self) -> &RMat {
        self.process.theta()
    }

    /// Cached `exp(4i Theta_N Pi_N)`.
    pub fn image(&self) -> &CMat {
        &self.image
    }

    pub fn trace(&self) -> &[StepRecord] {
        &self.trace
    }

    pub fn last(&self) -> &StepRecord {
        self.trace.last().expect("trace starts at N = 0")
    }

    /// Step with a full weight `C_N` of order `(N+1)n`.
    pub fn step_general(&self, c_n: &RMat, sigma: RMat, theta: RMat) -> Result<Self> {
        let process = self.extend(sigma, theta)?;
        check_weight(c_n, process.theta().nrows(), "C_N")?;
        let c_n = (c_n + c_n.transpose()) * 0.5;
        let g = generator(process.theta(), &c_n);
        let guard = 2.0 * g.norm();
        let factor = expm(&g)?;
        self.advance(process, factor, guard)
    }

    /// Step with a weight `D_N` on the current variable only, i.e.
    /// `C_N = blockdiag(0, D_N)`, using
    /// `exp(4i Theta_N C_N) = [[I, -4i sigma^T D Upsilon(4i theta D)], [0, exp(4i theta D)]]`.
    pub fn step_current(&self, d_n: &RMat, sigma: RMat, theta: RMat) -> Result<Self> {
        let n = self.process.block_order();
        check_weight(d_n, n, "D_N")?;
        let d_n = (d_n + d_n.transpose()) * 0.5;
        let process = self.extend(sigma, theta)?;
        let prev = self.pi.nrows();
        let step = process.steps().last().expect("just pushed");
        let local = generator(&step.theta, &d_n);
        let ups = upsilon(&local)?;
        let mut factor = CMat::identity(prev + n, prev + n);
        let coupling = to_complex(&(step.sigma.transpose() * &d_n)) * ups * c(0.0, -4.0);
        factor.view_mut((0, prev), (prev, n)).copy_from(&coupling);
        factor.view_mut((prev, prev), (n, n)).copy_from(&expm(&local)?);
        let guard = 2.0 * generator(process.theta(), &embed_current(&d_n, prev)).norm();
        self.advance(process, factor, guard)
    }

    fn extend(&self, sigma: RMat, theta: RMat) -> Result<ProcessCcr> {
        if self.horizon() >= self.horizon_cap {
            return Err(Error::Domain(format!("horizon cap {} reached", self.horizon_cap)));
        }
        self.process.push(sigma, theta)
    }

    /// `M_N`, the image of `blockdiag(Pi_{N-1}, 0)` under `C -> exp(4i Theta_N C)`.
    fn middle(&self, process: &ProcessCcr) -> Result<CMat> {
        let prev = self.pi.nrows();
        let n = process.block_order();
        let step = process.steps().last().expect("just pushed");
        let g = generator(self.process.theta(), &self.pi);
        let mut m = CMat::identity(prev + n, prev + n);
        m.view_mut((0, 0), (prev, prev)).copy_from(&self.image);
        let lower = to_complex(&(&step.sigma * &self.pi)) * upsilon(&g)? * c(0.0, 4.0);
        m.view_mut((prev, 0), (n, prev)).copy_from(&lower);
        Ok(m)
    }

    fn advance(&self, process: ProcessCcr, factor: CMat, guard_increment: f64) -> Result<Self> {
        let ccr = CcrMatrix::validate(process.theta().clone())?;
        if ccr.is_singular() {
            return Err(Error::SingularCcr);
        }
        let rhs = &factor * self.middle(&process)? * &factor;
        let theta_inv = to_complex(&inverse_real(process.theta())?);
        let raw = theta_inv * logm(&rhs)? * c(0.0, -0.25);
        let re = raw.map(|z| z.re);
        let imaginary_residual = raw.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        let asymmetry_residual = (&re - re.transpose()).abs().max();
        let pi = (&re + re.transpose()) * 0.5;
        let tolerance = REALNESS_TOLERANCE * (1.0 + max_abs(&pi));
        if imaginary_residual > tolerance {
            return Err(Error::ConjugationSymmetry {
                residual: imaginary_residual,
                tolerance,
            });
        }
        let exact = expm(&generator(process.theta(), &pi))?;
        let guard_norm = self.guard_norm + guard_increment;
        let record = StepRecord {
            horizon: process.horizon(),
            imaginary_residual,
            asymmetry_residual,
            symplectic_residual: symplectic_residual(&exact, process.theta()),
            guard_norm,
            branch_risk: guard_norm >= std::f64::consts::PI,
        };
        let mut trace = self.trace.clone();
        trace.push(record);
        Ok(Self {
            process,
            pi,
            image: rhs,
            guard_norm,
            horizon_cap: self.horizon_cap,
            trace,
        })
    }
}

/// `blockdiag(0_{prev}, d)`.
pub fn embed_current(d: &RMat, prev: usize) -> RMat {
    let n = d.nrows();
    let mut out = RMat::zeros(prev + n, prev + n);
    out.view_mut((prev, prev), (n, n)).copy_from(d);
    out
}

fn generator(theta: &RMat, weight: &RMat) -> CMat {
    to_complex(&(theta * weight)) * c(0.0, 4.0)
}

fn symplectic_residual(s: &CMat, theta: &RMat) -> f64 {
    let t = to_complex(theta);
    max_abs_c(&(s * &t * s.transpose() - t))
}

fn check_weight(m: &RMat, order: usize, what: &'static str) -> Result<()> {
    if m.shape() != (order, order) {
        return Err(Error::Dimension(format!(
            "{what} is {}x{}, expected {order}x{order}",
            m.nrows(),
            m.ncols()
        )));
    }
    ensure_finite(m, what)?;
    ensure_symmetric(m, what)
}
