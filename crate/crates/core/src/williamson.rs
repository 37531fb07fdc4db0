//! Symplectic diagonalization `V^T M V = Lambda (x) I_2`, `V J V^T = J`,
//! for positive definite `M` and `J = (I (x) bJ) / 2`.

use crate::ccr::canonical_j;
use crate::error::{Error, Result};
use crate::matrix::{ensure_finite, ensure_symmetric, max_abs, skew_normal_form, symmetric_eigh, RMat};

/// Relative gap below which two symplectic eigenvalues count as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct WilliamsonDecomposition {
    v: RMat,
    v_inv: RMat,
    lambdas: Vec<f64>,
    degenerate: bool,
}

/// Decomposes a symmetric positive definite `M` of even order.
///
/// With `A = M^{1/2} J M^{1/2} = O blockdiag(mu_k bJ) O^T` the symplectic
/// eigenvalues are `lambda_k = 2 mu_k` and `V = M^{-1/2} O
/// blockdiag(sqrt(lambda_k) I_2)`.
pub fn williamson(m: &RMat) -> Result<WilliamsonDecomposition> {
    ensure_finite(m, "Williamson input")?;
    ensure_symmetric(m, "Williamson input")?;
    let n = m.nrows();
    if n == 0 || n % 2 != 0 {
        return Err(Error::Dimension(format!("Williamson decomposition needs even order, got {n}")));
    }
    let m = (m + m.transpose()) * 0.5;
    let (values, vectors) = symmetric_eigh(&m)?;
    let min = values[0];
    if !(min > 1e-14 * max_abs(&m)) {
        return Err(Error::NotPositiveDefinite(min));
    }
    let mut root = vectors.clone();
    let mut root_inv = vectors.clone();
    for (k, &v) in values.iter().enumerate() {
        root.column_mut(k).scale_mut(v.sqrt());
        root_inv.column_mut(k).scale_mut(1.0 / v.sqrt());
    }
    let root_inv_left = &root_inv * vectors.transpose();
    let root = &root * vectors.transpose();

    let j = canonical_j(n / 2);
    let form = skew_normal_form(&(&root * &j * &root))?;
    let lambdas: Vec<f64> = form.mus.iter().map(|mu| 2.0 * mu).collect();

    let mut v = &root_inv_left * &form.o;
    let mut v_inv = form.o.transpose() * &root;
    for (k, &l) in lambdas.iter().enumerate() {
        let s = l.sqrt();
        for col in [2 * k, 2 * k + 1] {
            v.column_mut(col).scale_mut(s);
            v_inv.row_mut(col).scale_mut(1.0 / s);
        }
    }
    let top = lambdas[0];
    let degenerate = lambdas.windows(2).any(|w| w[0] - w[1] < DEGENERACY_GAP * top);
    Ok(WilliamsonDecomposition {
        v,
        v_inv,
        lambdas,
        degenerate,
    })
}

impl WilliamsonDecomposition {
    pub fn v(&self) -> &RMat {
        &self.v
    }

    pub fn v_inv(&self) -> &RMat {
        &self.v_inv
    }

    /// Symplectic eigenvalues, descending unless [`permuted`](Self::permuted).
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn nu(&self) -> usize {
        self.lambdas.len()
    }

    /// True when two symplectic eigenvalues are closer than
    /// [`DEGENERACY_GAP`] relative to the largest; `V` is still valid.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// `Lambda (x) I_2`.
    pub fn lambda_matrix(&self) -> RMat {
        let n = 2 * self.nu();
        RMat::from_fn(n, n, |r, c| if r == c { self.lambdas[r / 2] } else { 0.0 })
    }

    /// `V^{-T} (Lambda (x) I_2) V^{-1}`.
    pub fn reconstruct(&self) -> RMat {
        self.v_inv.transpose() * self.lambda_matrix() * &self.v_inv
    }

    /// `max |V J V^T - J|`.
    pub fn symplectic_residual(&self) -> f64 {
        let j = canonical_j(self.nu());
        (&self.v * &j * self.v.transpose() - j).abs().max()
    }

    /// `max |V^T M V - Lambda (x) I_2|`.
    pub fn diagonalization_residual(&self, m: &RMat) -> f64 {
        (self.v.transpose() * m * &self.v - self.lambda_matrix()).abs().max()
    }

    /// Reorders the canonical blocks: block `k` of the result is block
    /// `order[k]` of `self`. Block permutations are symplectic.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let nu = self.nu();
        let mut seen = vec![false; nu];
        if order.len() != nu || !order.iter().all(|&k| k < nu && !std::mem::replace(&mut seen[k], true)) {
            return Err(Error::InvalidInput(format!("{order:?} is not a permutation of 0..{nu}")));
        }
        let n = 2 * nu;
        let mut v = RMat::zeros(n, n);
        let mut v_inv = RMat::zeros(n, n);
        for (k, &src) in order.iter().enumerate() {
            for o in 0..2 {
                v.set_column(2 * k + o, &self.v.column(2 * src + o));
                v_inv.set_row(2 * k + o, &self.v_inv.row(2 * src + o));
            }
        }
        Ok(Self {
            v,
            v_inv,
            lambdas: order.iter().map(|&k| self.lambdas[k]).collect(),
            degenerate: self.degenerate,
        })
    }
}
