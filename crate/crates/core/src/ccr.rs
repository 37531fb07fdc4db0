//! CCR matrices: validation, canonical form `Theta = T J T^T`, and block
//! CCR matrices of discrete-time processes.

use crate::error::{Error, Result};
use crate::matrix::{
    ensure_finite, ensure_square, hermitian_eigh, max_abs, skew_normal_form, to_complex, RMat, I,
};

/// `[[0, 1], [-1, 0]]`.
pub fn bj() -> RMat {
    RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

/// Canonical CCR matrix `J = (I_nu (x) bJ) / 2` of `nu` position-momentum pairs.
pub fn canonical_j(nu: usize) -> RMat {
    RMat::identity(nu, nu).kronecker(&bj()) * 0.5
}

/// A validated real antisymmetric commutator matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CcrMatrix {
    theta: RMat,
    singular: bool,
    antisymmetry_residual: f64,
}

impl CcrMatrix {
    pub fn validate(theta: RMat) -> Result<Self> {
        ensure_square(&theta)?;
        ensure_finite(&theta, "CCR matrix")?;
        let residual = (&theta + theta.transpose()).abs().max();
        let tolerance = 1e-9 * (1.0 + max_abs(&theta));
        if residual > tolerance {
            return Err(Error::MalformedCcr { residual, tolerance });
        }
        let theta = (&theta - theta.transpose()) * 0.5;
        let singular = detect_singular(&theta)?;
        Ok(Self {
            theta,
            singular,
            antisymmetry_residual: residual,
        })
    }

    /// `J` for `nu` canonical pairs.
    pub fn canonical(nu: usize) -> Self {
        Self {
            theta: canonical_j(nu),
            singular: nu == 0,
            antisymmetry_residual: 0.0,
        }
    }

    pub fn theta(&self) -> &RMat {
        &self.theta
    }

    pub fn order(&self) -> usize {
        self.theta.nrows()
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        self.antisymmetry_residual
    }

    /// `eps * Theta`, used to approach the commuting limit.
    pub fn scaled(&self, eps: f64) -> Result<Self> {
        Self::validate(&self.theta * eps)
    }

    /// Finds `T` with `Theta = T J T^T`.
    ///
    /// `T = Q blockdiag(sqrt(2 theta_k) I_2)` where `Q^T Theta Q =
    /// blockdiag(theta_k bJ)` is the orthogonal normal form, blocks ordered by
    /// descending `theta_k`.
    pub fn canonicalize(&self) -> Result<CcrCanonicalization> {
        let n = self.order();
        if n % 2 != 0 {
            return Err(Error::Dimension(format!("canonicalization needs even order, got {n}")));
        }
        if self.singular {
            return Err(Error::SingularCcr);
        }
        let form = skew_normal_form(&self.theta).map_err(|e| match e {
            Error::Singular => Error::SingularCcr,
            other => other,
        })?;
        let nu = n / 2;
        let mut t = form.o.clone();
        let mut t_inv = form.o.transpose();
        for (k, &theta_k) in form.mus.iter().enumerate() {
            let s = (2.0 * theta_k).sqrt();
            for col in [2 * k, 2 * k + 1] {
                t.column_mut(col).scale_mut(s);
                t_inv.row_mut(col).scale_mut(1.0 / s);
            }
        }
        let j = canonical_j(nu);
        let residual = (&t * &j * t.transpose() - &self.theta).abs().max();
        if residual > 1e-8 * max_abs(&self.theta) {
            return Err(Error::Canonicalization(residual));
        }
        Ok(CcrCanonicalization {
            t,
            t_inv,
            nu,
            block_scales: form.mus,
            residual,
        })
    }
}

fn detect_singular(theta: &RMat) -> Result<bool> {
    let n = theta.nrows();
    if n == 0 || n % 2 != 0 {
        return Ok(true);
    }
    let scale = max_abs(theta);
    if scale == 0.0 {
        return Ok(true);
    }
    let (values, _) = hermitian_eigh(&(to_complex(theta) * I))?;
    let min = values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    Ok(min <= 1e-13 * scale)
}

/// A factor `T` of `Theta = T J T^T` together with its inverse.
#[derive(Debug, Clone)]
pub struct CcrCanonicalization {
    t: RMat,
    t_inv: RMat,
    nu: usize,
    block_scales: Vec<f64>,
    residual: f64,
}

impl CcrCanonicalization {
    pub fn t(&self) -> &RMat {
        &self.t
    }

    pub fn t_inv(&self) -> &RMat {
        &self.t_inv
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn j(&self) -> RMat {
        canonical_j(self.nu)
    }

    /// The `theta_k` of the normal form `blockdiag(theta_k bJ)`, descending.
    pub fn block_scales(&self) -> &[f64] {
        &self.block_scales
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Replaces `T` by `T S` for a symplectic `S` (`S J S^T = J`).
    ///
    /// Any such `S` gives another valid canonicalization.
    pub fn with_gauge(&self, s: &RMat) -> Result<Self> {
        let n = self.t.nrows();
        if s.shape() != (n, n) {
            return Err(Error::Dimension(format!("gauge must be {n}x{n}")));
        }
        let j = self.j();
        let defect = (s * &j * s.transpose() - &j).abs().max();
        if defect > 1e-9 * (1.0 + max_abs(s).powi(2)) {
            return Err(Error::InvalidInput(format!(
                "gauge matrix is not symplectic (defect {defect:.3e})"
            )));
        }
        let s_inv = s.clone().try_inverse().ok_or(Error::Singular)?;
        let t = &self.t * s;
        let t_inv = s_inv * &self.t_inv;
        let theta = &self.t * &j * self.t.transpose();
        let residual = (&t * &j * t.transpose() - theta).abs().max();
        Ok(Self {
            t,
            t_inv,
            nu: self.nu,
            block_scales: self.block_scales.clone(),
            residual,
        })
    }
}

/// One time step of a process CCR matrix: `[X_N, X_{<N}^T] = 2i sigma_N`,
/// `[X_N, X_N^T] = 2i theta_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessBlock {
    pub sigma: RMat,
    pub theta: RMat,
}

/// Block CCR matrix `Theta_N = [[Theta_{N-1}, -sigma_N^T], [sigma_N, theta_N]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessCcr {
    block: usize,
    theta0: RMat,
    steps: Vec<ProcessBlock>,
    assembled: RMat,
}

impl ProcessCcr {
    /// Starts the process at `Theta_0 = theta_0`.
    pub fn new(theta0: RMat) -> Result<Self> {
        let ccr = CcrMatrix::validate(theta0)?;
        let theta0 = ccr.theta().clone();
        Ok(Self {
            block: theta0.nrows(),
            assembled: theta0.clone(),
            theta0,
            steps: Vec::new(),
        })
    }

    pub fn assemble(theta0: RMat, blocks: impl IntoIterator<Item = ProcessBlock>) -> Result<Self> {
        let mut process = Self::new(theta0)?;
        for b in blocks {
            process = process.push(b.sigma, b.theta)?;
        }
        Ok(process)
    }

    /// Appends the next time step and returns the extended process.
    pub fn push(&self, sigma: RMat, theta: RMat) -> Result<Self> {
        let n = self.block;
        let prev = self.assembled.nrows();
        if sigma.shape() != (n, prev) {
            return Err(Error::Dimension(format!(
                "sigma_{} must be {n}x{prev}, got {}x{}",
                self.horizon() + 1,
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if theta.shape() != (n, n) {
            return Err(Error::Dimension(format!("theta block must be {n}x{n}")));
        }
        ensure_finite(&sigma, "sigma block")?;
        let theta = CcrMatrix::validate(theta)?.theta().clone();
        let mut assembled = RMat::zeros(prev + n, prev + n);
        assembled.view_mut((0, 0), (prev, prev)).copy_from(&self.assembled);
        assembled.view_mut((0, prev), (prev, n)).copy_from(&(-sigma.transpose()));
        assembled.view_mut((prev, 0), (n, prev)).copy_from(&sigma);
        assembled.view_mut((prev, prev), (n, n)).copy_from(&theta);
        let mut steps = self.steps.clone();
        steps.push(ProcessBlock { sigma, theta });
        Ok(Self {
            block: n,
            theta0: self.theta0.clone(),
            steps,
            assembled,
        })
    }

    /// Number of appended steps `N`.
    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn block_order(&self) -> usize {
        self.block
    }

    pub fn theta0(&self) -> &RMat {
        &self.theta0
    }

    pub fn steps(&self) -> &[ProcessBlock] {
        &self.steps
    }

    /// `Theta_N`.
    pub fn theta(&self) -> &RMat {
        &self.assembled
    }

    pub fn ccr(&self) -> Result<CcrMatrix> {
        CcrMatrix::validate(self.assembled.clone())
    }
}
