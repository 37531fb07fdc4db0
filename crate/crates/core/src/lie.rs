//! Quadratic forms `X^T C X` under commutation and exponentiation.
//!
//! `[X^T A X, X^T B X] = X^T C X` with `C = 4i(A Theta B - B Theta A)`, and
//! `C -> 4i Theta C` is a Lie algebra isomorphism onto Hamiltonian matrices,
//! so products of `exp(X^T C_k X)` are tracked through the complex
//! symplectic matrices `E(C) = exp(4i Theta C)`.

use num_complex::Complex64;

use crate::ccr::{bj, CcrMatrix};
use crate::error::{Error, Result};
use crate::matrix::{
    c, expm, inverse_real, logm, max_abs_c, symmetrize, to_complex, CMat, RMat, SymmetryKind, SymmetryTag, I,
};

/// Tolerance of the realness check in [`symmetric_sandwich`].
pub const REALNESS_TOLERANCE: f64 = 1e-9;

fn check_coefficient(m: &CMat, ccr: &CcrMatrix, kind: SymmetryKind, what: &'static str) -> Result<()> {
    let n = ccr.order();
    if m.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "{what} is {}x{}, CCR matrix has order {n}",
            m.nrows(),
            m.ncols()
        )));
    }
    SymmetryTag::default_for(kind, m).check(m, what)?;
    Ok(())
}

/// `4i Theta C`.
pub fn generator(cm: &CMat, ccr: &CcrMatrix) -> CMat {
    to_complex(ccr.theta()) * cm * c(0.0, 4.0)
}

/// `C = 4i (A Theta B - B Theta A)`, so that `[X^T A X, X^T B X] = X^T C X`.
pub fn quad_commutator(a: &CMat, b: &CMat, ccr: &CcrMatrix) -> Result<CMat> {
    check_coefficient(a, ccr, SymmetryKind::Symmetric, "A")?;
    check_coefficient(b, ccr, SymmetryKind::Symmetric, "B")?;
    let theta = to_complex(ccr.theta());
    Ok((a * &theta * b - b * &theta * a) * c(0.0, 4.0))
}

/// The scalar `-i Tr(C Theta)` to which `X^T C X` reduces for antisymmetric `C`.
pub fn antisymmetric_trace_constant(cm: &CMat, ccr: &CcrMatrix) -> Result<Complex64> {
    check_coefficient(cm, ccr, SymmetryKind::Antisymmetric, "C")?;
    Ok(-I * (cm * to_complex(ccr.theta())).trace())
}

/// `E(C) = exp(4i Theta C)`, a complex symplectic matrix.
#[derive(Debug, Clone)]
pub struct SymplecticImage {
    pub s: CMat,
}

impl SymplecticImage {
    /// `max |S Theta S^T - Theta|`.
    pub fn symplectic_residual(&self, ccr: &CcrMatrix) -> f64 {
        let theta = to_complex(ccr.theta());
        max_abs_c(&(&self.s * &theta * self.s.transpose() - theta))
    }
}

pub fn exp_map(cm: &CMat, ccr: &CcrMatrix) -> Result<SymplecticImage> {
    check_coefficient(cm, ccr, SymmetryKind::Symmetric, "C")?;
    Ok(SymplecticImage {
        s: expm(&generator(cm, ccr))?,
    })
}

/// Result of recovering `E` from a product of symplectic images.
#[derive(Debug, Clone)]
pub struct LieProduct {
    /// Symmetrized `(4i Theta)^{-1} ln(prod)`.
    pub e: CMat,
    /// `max |E - E^T|` before symmetrization.
    pub asymmetry_residual: f64,
    /// `max |E(E) - prod| / max(1, max |prod|)`.
    pub exp_residual: f64,
    /// `sum_k |4i Theta C_k|_F`.
    pub guard_norm: f64,
    /// `guard_norm >= pi`: the principal logarithm may not be the right branch.
    pub branch_risk: bool,
}

fn guard_norm(cs: &[&CMat], ccr: &CcrMatrix) -> f64 {
    cs.iter().map(|cm| generator(cm, ccr).norm()).sum()
}

fn recover(product: &CMat, ccr: &CcrMatrix, guard: f64) -> Result<LieProduct> {
    if ccr.is_singular() {
        return Err(Error::SingularCcr);
    }
    let theta_inv = to_complex(&inverse_real(ccr.theta())?);
    let log = logm(product)?;
    let raw = theta_inv * log * c(0.0, -0.25);
    let asymmetry_residual = max_abs_c(&(&raw - raw.transpose()));
    let e = symmetrize(&raw);
    let back = expm(&generator(&e, ccr))?;
    let exp_residual = max_abs_c(&(back - product)) / max_abs_c(product).max(1.0);
    Ok(LieProduct {
        e,
        asymmetry_residual,
        exp_residual,
        guard_norm: guard,
        branch_risk: !(guard < std::f64::consts::PI),
    })
}

/// `E` with `exp(X^T A X) exp(X^T B X) = exp(X^T E X)`.
pub fn dynkin_product(a: &CMat, b: &CMat, ccr: &CcrMatrix) -> Result<LieProduct> {
    product_chain(&[a.clone(), b.clone()], ccr)
}

/// `E` with `prod_k exp(X^T C_k X) = exp(X^T E X)`, factors in index order.
pub fn product_chain(cs: &[CMat], ccr: &CcrMatrix) -> Result<LieProduct> {
    let n = ccr.order();
    let mut product = CMat::identity(n, n);
    for cm in cs {
        product *= exp_map(cm, ccr)?.s;
    }
    let refs: Vec<&CMat> = cs.iter().collect();
    recover(&product, ccr, guard_norm(&refs, ccr))
}

/// `E = exp(4i C_1 Theta) C_2 exp(-4i Theta C_1)`, the closed form of
/// `product_chain([C_1, C_2, -C_1])`.
pub fn sandwich_closed_form(c1: &CMat, c2: &CMat, ccr: &CcrMatrix) -> Result<CMat> {
    let theta = to_complex(ccr.theta());
    let left = expm(&(c1 * &theta * c(0.0, 4.0)))?;
    let right = expm(&(&theta * c1 * c(0.0, -4.0)))?;
    Ok(left * c2 * right)
}

#[derive(Debug, Clone)]
pub struct SandwichResult {
    pub e: RMat,
    /// `max |Im E|` before it was discarded.
    pub imaginary_residual: f64,
    pub asymmetry_residual: f64,
    pub exp_residual: f64,
    pub guard_norm: f64,
    pub branch_risk: bool,
}

/// Real symmetric `E` with `E(E) = E(C_N)...E(C_1) E(C_0) E(C_1)...E(C_N)`.
pub fn symmetric_sandwich(c0: &RMat, cs: &[RMat], ccr: &CcrMatrix) -> Result<SandwichResult> {
    let n = ccr.order();
    let c0c = to_complex(c0);
    let mut product = exp_map(&c0c, ccr)?.s;
    let mut refs = vec![c0c.clone()];
    for ck in cs {
        let ckc = to_complex(ck);
        let s = exp_map(&ckc, ccr)?.s;
        product = &s * product * &s;
        refs.push(ckc.clone());
        refs.push(ckc);
    }
    debug_assert_eq!(product.nrows(), n);
    let refs: Vec<&CMat> = refs.iter().collect();
    let lp = recover(&product, ccr, guard_norm(&refs, ccr))?;
    let re = lp.e.map(|z| z.re);
    let imaginary_residual = lp.e.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    let tolerance = REALNESS_TOLERANCE * (1.0 + re.abs().max());
    if imaginary_residual > tolerance {
        return Err(Error::ConjugationSymmetry {
            residual: imaginary_residual,
            tolerance,
        });
    }
    Ok(SandwichResult {
        e: re,
        imaginary_residual,
        asymmetry_residual: lp.asymmetry_residual,
        exp_residual: lp.exp_residual,
        guard_norm: lp.guard_norm,
        branch_risk: lp.branch_risk,
    })
}

/// `E_1 = diag(1, 0)`.
pub fn e1() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
}

/// `E_2 = diag(0, 1)`.
pub fn e2() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
}

/// `E(a E_1) = [[1, 0], [-4 a theta i, 1]]` for `Theta = theta bJ`.
pub fn exp_e1(a: f64, theta: f64) -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, -4.0 * a * theta), c(1.0, 0.0)])
}

/// `E(b E_2) = [[1, 4 b theta i], [0, 1]]` for `Theta = theta bJ`.
pub fn exp_e2(b: f64, theta: f64) -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 4.0 * b * theta), c(0.0, 0.0), c(1.0, 0.0)])
}

/// `E(diag(a, b)) = cosh(4 theta s) I + i sinh(4 theta s) [[0, sqrt(b/a)],
/// [-sqrt(a/b), 0]]`, `s = sqrt(ab)`, for `Theta = theta bJ`.
pub fn exp_diag(a: f64, b: f64, theta: f64) -> CMat {
    let s = (a * b).sqrt();
    let ch = (4.0 * theta * s).cosh();
    let sh = (4.0 * theta * s).sinh();
    let r = (b / a).sqrt();
    CMat::from_row_slice(2, 2, &[c(ch, 0.0), c(0.0, sh * r), c(0.0, -sh / r), c(ch, 0.0)])
}

/// `E(alpha E_1) E(beta E_2) E(alpha E_1) = E(diag(a, b))`.
#[derive(Debug, Clone, Copy)]
pub struct Factorization2 {
    pub alpha: f64,
    pub beta: f64,
    /// Relative residual of the closed-form matrix identity.
    pub residual: f64,
    /// Relative residual of the same identity with dense exponentials.
    pub dense_residual: f64,
}

/// Solves the three-factor identity for `a, b > 0`, `Theta = theta bJ`.
///
/// `alpha = a tanh(2 theta s) / (4 theta s)` and `beta = b sinh(4 theta s) /
/// (4 theta s)` with `s = sqrt(ab)`; both are even in `theta`.
pub fn factorize_2x2(a: f64, b: f64, theta: f64) -> Result<Factorization2> {
    if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!("a and b must be positive, got {a} and {b}")));
    }
    if theta == 0.0 || !theta.is_finite() {
        return Err(Error::InvalidInput("theta must be nonzero".into()));
    }
    let x = 4.0 * theta * (a * b).sqrt();
    let alpha = a * (0.5 * x).tanh() / x;
    let beta = b * x.sinh() / x;

    let target = exp_diag(a, b, theta);
    let scale = max_abs_c(&target).max(1.0);
    let lhs = exp_e1(alpha, theta) * exp_e2(beta, theta) * exp_e1(alpha, theta);
    let residual = max_abs_c(&(lhs - &target)) / scale;

    let ccr = CcrMatrix::validate(bj() * theta)?;
    let dense = exp_map(&(e1() * c(alpha, 0.0)), &ccr)?.s
        * exp_map(&(e2() * c(beta, 0.0)), &ccr)?.s
        * exp_map(&(e1() * c(alpha, 0.0)), &ccr)?.s;
    let dense_target = exp_map(&to_complex(&RMat::from_row_slice(2, 2, &[a, 0.0, 0.0, b])), &ccr)?.s;
    let dense_residual = max_abs_c(&(dense - &dense_target)) / max_abs_c(&dense_target).max(1.0);
    Ok(Factorization2 {
        alpha,
        beta,
        residual,
        dense_residual,
    })
}
