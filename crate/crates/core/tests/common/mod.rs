//! Deterministic random inputs shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qef_core::ccr::{canonical_j, CcrMatrix};
use qef_core::matrix::{expm_real, CMat, RMat};
use qef_core::state::GaussianState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matrix(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> RMat {
    DMatrix::from_fn(r, c, |_, _| scale * rng.random_range(-1.0..1.0))
}

pub fn symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> RMat {
    let m = matrix(rng, n, n, scale);
    (&m + m.transpose()) * 0.5
}

pub fn complex_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMat {
    let re = symmetric(rng, n, scale);
    let im = symmetric(rng, n, scale);
    CMat::from_fn(n, n, |r, c| Complex64::new(re[(r, c)], im[(r, c)]))
}

/// Symmetric positive definite with eigenvalues in `[lo, lo + spread]`.
pub fn spd(rng: &mut ChaCha8Rng, n: usize, lo: f64, spread: f64) -> RMat {
    let q = matrix(rng, n, n, 1.0).qr().q();
    let d = RMat::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| lo + spread * rng.random::<f64>()));
    let m = &q * d * q.transpose();
    (&m + m.transpose()) * 0.5
}

/// Nonsingular antisymmetric matrix of even order.
pub fn ccr(rng: &mut ChaCha8Rng, n: usize) -> CcrMatrix {
    loop {
        let g = matrix(rng, n, n, 1.0);
        let c = CcrMatrix::validate(&g - g.transpose()).unwrap();
        if let Ok(canon) = c.canonicalize() {
            if canon.block_scales().iter().all(|&t| t > 0.05) {
                return c;
            }
        }
    }
}

/// `exp(J H)` with `H` symmetric: symplectic with respect to `J`.
pub fn symplectic(rng: &mut ChaCha8Rng, nu: usize, scale: f64) -> RMat {
    let h = symmetric(rng, 2 * nu, scale);
    expm_real(&(canonical_j(nu) * h)).unwrap().map(|z| z.re)
}

/// Admissible `P = T S (D (x) I_2) S^T T^T` with `d_k >= 1/2`.
pub fn state(rng: &mut ChaCha8Rng, ccr: &CcrMatrix) -> GaussianState {
    let nu = ccr.order() / 2;
    let t = ccr.canonicalize().unwrap().t().clone();
    let s = symplectic(rng, nu, 0.6);
    let d = RMat::from_fn(2 * nu, 2 * nu, |r, c| if r == c { 0.5 } else { 0.0 });
    let mut d = d;
    for k in 0..nu {
        let v = 0.5 + rng.random::<f64>();
        d[(2 * k, 2 * k)] = v;
        d[(2 * k + 1, 2 * k + 1)] = v;
    }
    let p = &t * &s * d * s.transpose() * t.transpose();
    GaussianState::admissible((&p + p.transpose()) * 0.5, ccr.clone()).unwrap()
}
