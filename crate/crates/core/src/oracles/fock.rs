//! Truncated Fock-basis oscillators.
//!
//! Each mode carries `q = (a + a^dag)/sqrt2`, `p = (a - a^dag)/(i sqrt2)` on
//! levels `0..d`, so `[q, p] = i` away from the top level. Variables with a
//! general CCR matrix are realized as `X = T Z` with `Theta = T J T^T`.
//! Quadratic forms are exact projections of the untruncated operators:
//! same-mode products are formed at `d + 1` levels and then cut.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::ccr::{CcrCanonicalization, CcrMatrix};
use crate::error::{Error, Result};
use crate::matrix::{c, hermitian_eigh, to_complex, CMat, RMat, I};
use crate::williamson::williamson;

/// Levels kept away from the truncation corner when comparing operators.
pub const SAFE_MARGIN: usize = 5;

/// Sparse row storage used for repeated operator-vector products.
#[derive(Debug, Clone)]
pub struct SparseOp {
    rows: Vec<Vec<(usize, Complex64)>>,
    norm1: f64,
}

impl SparseOp {
    pub fn from_dense(m: &CMat) -> Self {
        let rows = (0..m.nrows())
            .map(|r| {
                (0..m.ncols())
                    .filter_map(|k| {
                        let z = m[(r, k)];
                        (z.norm() > 0.0).then_some((k, z))
                    })
                    .collect()
            })
            .collect();
        let norm1 = (0..m.ncols())
            .map(|k| m.column(k).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        Self { rows, norm1 }
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|row| row.iter().map(|&(k, z)| z * v[k]).sum()),
        )
    }

    /// `exp(A) v` by Taylor series on substeps of 1-norm at most one.
    pub fn exp_apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let steps = self.norm1.ceil().max(1.0) as usize;
        let h = 1.0 / steps as f64;
        let mut out = v.clone();
        for _ in 0..steps {
            let mut term = out.clone();
            let mut acc = out.clone();
            let mut small = 0;
            for k in 1..200 {
                term = self.apply(&term) * c(h / k as f64, 0.0);
                acc += &term;
                let t = term.camax();
                if t <= 1e-18 * acc.camax() {
                    small += 1;
                    if small == 2 {
                        break;
                    }
                } else {
                    small = 0;
                }
            }
            out = acc;
        }
        out
    }
}

/// Position and momentum on `d` levels, built from `d + 1` levels so that
/// products can be cut exactly.
fn single_mode(d: usize) -> [CMat; 2] {
    let mut a = CMat::zeros(d, d);
    for k in 1..d {
        a[(k - 1, k)] = c((k as f64).sqrt(), 0.0);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q = (&a + a.adjoint()) * c(s, 0.0);
    let p = (&a - a.adjoint()) * (-I * s);
    [q, p]
}

/// A truncated oscillator realizing a CCR matrix of even order.
#[derive(Debug, Clone)]
pub struct FockOscillator {
    modes: usize,
    levels: usize,
    canon: CcrCanonicalization,
    /// `z_ops[j]` is the `j`-th canonical variable on the full space.
    z_ops: Vec<CMat>,
    /// `pair[a][b]`: single-mode product `Z_a Z_b` cut from `d + 1` levels.
    pair: [[CMat; 2]; 2],
    single: [CMat; 2],
}

impl FockOscillator {
    pub fn new(ccr: &CcrMatrix, levels: usize) -> Result<Self> {
        let canon = ccr.canonicalize()?;
        Self::with_canonicalization(canon, levels)
    }

    pub fn with_canonicalization(canon: CcrCanonicalization, levels: usize) -> Result<Self> {
        let modes = canon.nu();
        if !(1..=2).contains(&modes) {
            return Err(Error::InvalidInput(format!("Fock oracle supports 1 or 2 modes, got {modes}")));
        }
        if levels < 2 * SAFE_MARGIN + 2 {
            return Err(Error::InvalidInput(format!("truncation {levels} is too small")));
        }
        let big = single_mode(levels + 1);
        let cut = |m: CMat| m.view((0, 0), (levels, levels)).into_owned();
        let pair = [
            [cut(&big[0] * &big[0]), cut(&big[0] * &big[1])],
            [cut(&big[1] * &big[0]), cut(&big[1] * &big[1])],
        ];
        let single = single_mode(levels);
        let mut osc = Self {
            modes,
            levels,
            canon,
            z_ops: Vec::new(),
            pair,
            single,
        };
        osc.z_ops = (0..2 * modes).map(|j| osc.embed(&osc.single[j % 2], j / 2)).collect();
        Ok(osc)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn dim(&self) -> usize {
        self.levels.pow(self.modes as u32)
    }

    pub fn t(&self) -> &RMat {
        self.canon.t()
    }

    fn embed(&self, op: &CMat, mode: usize) -> CMat {
        let id = CMat::identity(self.levels, self.levels);
        match (self.modes, mode) {
            (1, _) => op.clone(),
            (_, 0) => op.kronecker(&id),
            _ => id.kronecker(op),
        }
    }

    /// Operator of `Z_j Z_k` for canonical indices.
    fn z_product(&self, j: usize, k: usize) -> CMat {
        let (mj, mk) = (j / 2, k / 2);
        if mj == mk {
            self.embed(&self.pair[j % 2][k % 2], mj)
        } else if mj < mk {
            self.single[j % 2].kronecker(&self.single[k % 2])
        } else {
            self.single[k % 2].kronecker(&self.single[j % 2])
        }
    }

    /// `Z^T G Z` for a coefficient in canonical coordinates.
    pub fn quadratic_z(&self, g: &CMat) -> CMat {
        let n = 2 * self.modes;
        let mut out = CMat::zeros(self.dim(), self.dim());
        for j in 0..n {
            for k in 0..n {
                let w = g[(j, k)];
                if w.norm() > 0.0 {
                    out += self.z_product(j, k) * w;
                }
            }
        }
        out
    }

    /// `X^T C X = Z^T (T^T C T) Z`.
    pub fn quadratic(&self, cm: &CMat) -> CMat {
        let t = to_complex(self.canon.t());
        self.quadratic_z(&(t.transpose() * cm * t))
    }

    /// `u^T X`.
    pub fn linear(&self, u: &[f64]) -> CMat {
        let v = self.canon.t().transpose() * DVector::from_row_slice(u);
        let mut out = CMat::zeros(self.dim(), self.dim());
        for (j, op) in self.z_ops.iter().enumerate() {
            out += op * c(v[j], 0.0);
        }
        out
    }

    /// Indices whose every mode level is below `levels - margin`.
    pub fn safe_indices(&self, margin: usize) -> Vec<usize> {
        let cut = self.levels.saturating_sub(margin);
        (0..self.dim())
            .filter(|&i| {
                let mut rest = i;
                (0..self.modes).all(|_| {
                    let level = rest % self.levels;
                    rest /= self.levels;
                    level < cut
                })
            })
            .collect()
    }

    /// `max |a_ij|` over safe rows and columns.
    pub fn safe_norm(&self, a: &CMat, margin: usize) -> f64 {
        let idx = self.safe_indices(margin);
        let mut m = 0.0f64;
        for &r in &idx {
            for &k in &idx {
                m = m.max(a[(r, k)].norm());
            }
        }
        m
    }

    /// `max |[Z_{2k}, Z_{2k+1}] - i delta|` on the safe block.
    pub fn ccr_residual(&self) -> f64 {
        let n = 2 * self.modes;
        let dim = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for k in 0..n {
                let comm = &self.z_ops[j] * &self.z_ops[k] - &self.z_ops[k] * &self.z_ops[j];
                let target = if j / 2 == k / 2 && j != k {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    CMat::identity(dim, dim) * c(0.0, sign)
                } else {
                    CMat::zeros(dim, dim)
                };
                worst = worst.max(self.safe_norm(&(comm - target), SAFE_MARGIN));
            }
        }
        worst
    }
}

/// A density matrix as a weighted ensemble of pure states.
#[derive(Debug, Clone)]
pub struct FockState {
    pub weights: Vec<f64>,
    pub vectors: Vec<DVector<Complex64>>,
}

impl FockState {
    pub fn vacuum(osc: &FockOscillator) -> Self {
        let mut v = DVector::zeros(osc.dim());
        v[0] = c(1.0, 0.0);
        Self {
            weights: vec![1.0],
            vectors: vec![v],
        }
    }

    /// Gaussian state with real covariance `P` in the oscillator's `X`
    /// coordinates.
    ///
    /// `P_Z = T^{-1} P T^{-T} = V^{-T} (D (x) I_2) V^{-1}` is realized as the
    /// Gibbs state `exp(-Z^T V G V^T Z)` with `G = blockdiag(arccoth(2 d_k) I_2)`;
    /// pure modes get a large finite `g`. Isotropic `P_Z` is built directly
    /// from thermal populations.
    pub fn gaussian(osc: &FockOscillator, p: &RMat) -> Result<Self> {
        let t_inv = osc.canon.t_inv();
        let pz = t_inv * p * t_inv.transpose();
        let pz = (&pz + pz.transpose()) * 0.5;
        let n = pz.nrows();
        let s = pz[(0, 0)];
        if (&pz - RMat::identity(n, n) * s).abs().max() <= 1e-12 * (1.0 + s) {
            return Self::thermal(osc, s);
        }
        let w = williamson(&pz)?;
        let g_diag: Vec<f64> = w
            .lambdas()
            .iter()
            .map(|&d| if d <= 0.5 + 1e-9 { 20.0 } else { 0.5 * ((2.0 * d + 1.0) / (2.0 * d - 1.0)).ln() })
            .collect();
        let g = RMat::from_fn(n, n, |r, k| if r == k { g_diag[r / 2] } else { 0.0 });
        let gz = w.v() * g * w.v().transpose();
        let h = osc.quadratic_z(&to_complex(&((&gz + gz.transpose()) * 0.5)));
        let (values, vectors) = hermitian_eigh(&h)?;
        let e0 = values[0];
        let mut weights = Vec::new();
        let mut vecs = Vec::new();
        for (k, &e) in values.iter().enumerate() {
            let wgt = (-(e - e0)).exp();
            if wgt > 1e-17 {
                weights.push(wgt);
                vecs.push(vectors.column(k).into_owned());
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|x| *x /= total);
        Ok(Self {
            weights,
            vectors: vecs,
        })
    }

    /// Product of thermal modes with `<q^2> = <p^2> = s`, `s >= 1/2`.
    pub fn thermal(osc: &FockOscillator, s: f64) -> Result<Self> {
        if s < 0.5 - 1e-12 {
            return Err(Error::Heisenberg(s - 0.5));
        }
        if s <= 0.5 + 1e-15 {
            return Ok(Self::vacuum(osc));
        }
        let zeta = (s - 0.5) / (s + 0.5);
        let d = osc.levels;
        let single: Vec<f64> = (0..d).map(|k| (1.0 - zeta) * zeta.powi(k as i32)).collect();
        let mut weights = Vec::new();
        let mut vectors = Vec::new();
        for i in 0..osc.dim() {
            let (mut rest, mut w) = (i, 1.0);
            for _ in 0..osc.modes {
                w *= single[rest % d];
                rest /= d;
            }
            if w > 1e-17 {
                let mut v = DVector::zeros(osc.dim());
                v[i] = c(1.0, 0.0);
                weights.push(w);
                vectors.push(v);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|x| *x /= total);
        Ok(Self { weights, vectors })
    }

    /// `Tr(rho A)`.
    pub fn expect(&self, a: &CMat) -> Complex64 {
        self.weights
            .iter()
            .zip(&self.vectors)
            .map(|(&w, v)| (v.adjoint() * a * v)[(0, 0)] * w)
            .sum()
    }

    /// `Tr(rho exp(A_1) ... exp(A_m))`, each `A_k` given as an operator.
    pub fn expect_exponentials(&self, ops: &[SparseOp]) -> Complex64 {
        self.weights
            .iter()
            .zip(&self.vectors)
            .map(|(&w, v)| {
                let mut u = v.clone();
                for op in ops.iter().rev() {
                    u = op.exp_apply(&u);
                }
                v.dotc(&u) * w
            })
            .sum()
    }
}

/// Expectation with a truncation estimate from a run at `levels - 10`.
#[derive(Debug, Clone, Copy)]
pub struct FockEstimate {
    pub value: Complex64,
    pub truncation_error: f64,
    pub levels: usize,
}

/// `Tr(rho exp(X^T C_1 X) ... exp(X^T C_m X))` for the Gaussian state with
/// covariance `P`.
pub fn fock_expectation(ccr: &CcrMatrix, p: &RMat, factors: &[CMat], levels: usize) -> Result<FockEstimate> {
    let eval = |d: usize| -> Result<Complex64> {
        let osc = FockOscillator::new(ccr, d)?;
        let state = FockState::gaussian(&osc, p)?;
        let ops: Vec<SparseOp> = factors.iter().map(|f| SparseOp::from_dense(&osc.quadratic(f))).collect();
        Ok(state.expect_exponentials(&ops))
    };
    let value = eval(levels)?;
    let coarse = eval(levels.saturating_sub(10))?;
    Ok(FockEstimate {
        value,
        truncation_error: (value - coarse).norm(),
        levels,
    })
}

/// `exp(i H)` for Hermitian `H`.
fn unitary_exp(h: &CMat) -> Result<CMat> {
    let (values, vectors) = hermitian_eigh(h)?;
    let phases = CMat::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::from_polar(1.0, v)),
    ));
    Ok(&vectors * phases * vectors.adjoint())
}

/// Safe-block norm of `exp(i u^T X) - exp(i/2 u^T Theta_diam u) prod_k exp(i u_k X_k)`.
pub fn verify_weyl_factorization(osc: &FockOscillator, theta: &RMat, u: &[f64]) -> Result<f64> {
    let n = 2 * osc.modes();
    if u.len() != n {
        return Err(Error::Dimension(format!("u has length {}, expected {n}", u.len())));
    }
    let lhs = unitary_exp(&osc.linear(u))?;
    let mut rhs = CMat::identity(osc.dim(), osc.dim());
    for k in 0..n {
        if u[k] != 0.0 {
            let mut e = vec![0.0; n];
            e[k] = u[k];
            rhs *= unitary_exp(&osc.linear(&e))?;
        }
    }
    let mut phase = 0.0;
    for j in 0..n {
        for k in (j + 1)..n {
            phase += u[j] * u[k] * theta[(j, k)];
        }
    }
    let rhs = rhs * Complex64::from_polar(1.0, phase);
    Ok(osc.safe_norm(&(lhs - rhs), osc.levels() / 4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccr::bj;

    fn canonical() -> CcrMatrix {
        CcrMatrix::canonical(1)
    }

    #[test]
    fn ccr_holds_on_safe_block() {
        let osc = FockOscillator::new(&canonical(), 40).unwrap();
        assert!(osc.ccr_residual() < 1e-12);
        let osc2 = FockOscillator::new(&CcrMatrix::canonical(2), 12).unwrap();
        assert!(osc2.ccr_residual() < 1e-12);
    }

    #[test]
    fn number_operator_expectation() {
        let id = CMat::identity(2, 2) * c(0.1, 0.0);
        let est = fock_expectation(&canonical(), &(RMat::identity(2, 2) * 0.5), &[id], 60).unwrap();
        assert!((est.value - c(0.1f64.exp(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_expectation_is_one() {
        let osc = FockOscillator::new(&canonical(), 30).unwrap();
        let st = FockState::thermal(&osc, 1.0).unwrap();
        assert!((st.expect(&CMat::identity(30, 30)) - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn gibbs_state_reproduces_covariance() {
        let ccr = CcrMatrix::validate(bj() * 0.8).unwrap();
        let p = RMat::from_row_slice(2, 2, &[1.1, 0.3, 0.3, 0.9]);
        let osc = FockOscillator::new(&ccr, 60).unwrap();
        let st = FockState::gaussian(&osc, &p).unwrap();
        let q = osc.linear(&[1.0, 0.0]);
        let pp = osc.linear(&[0.0, 1.0]);
        let sym = (&q * &pp + &pp * &q) * c(0.5, 0.0);
        assert!((st.expect(&(&q * &q)).re - 1.1).abs() < 1e-9);
        assert!((st.expect(&(&pp * &pp)).re - 0.9).abs() < 1e-9);
        assert!((st.expect(&sym).re - 0.3).abs() < 1e-9);
    }

    #[test]
    fn weyl_factorization() {
        let osc = FockOscillator::new(&canonical(), 80).unwrap();
        let theta = bj() * 0.5;
        assert!(verify_weyl_factorization(&osc, &theta, &[0.0, 0.0]).unwrap() < 1e-13);
        assert!(verify_weyl_factorization(&osc, &theta, &[0.6, 0.0]).unwrap() < 1e-13);
        assert!(verify_weyl_factorization(&osc, &theta, &[0.3, 0.7]).unwrap() < 1e-6);
    }
}
