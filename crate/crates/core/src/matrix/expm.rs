use num_complex::Complex64;

use super::{c, ensure_finite_c, ensure_square, norm1, to_complex, CMat, RMat};
use crate::error::{Error, Result};

// Degree-13 Pade coefficients and the matching 1-norm threshold (Higham 2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a [13/13] Pade approximant.
pub fn expm(a: &CMat) -> Result<CMat> {
    let n = ensure_square(a)?;
    ensure_finite_c(a, "matrix exponential argument")?;
    if n == 0 {
        return Ok(a.clone());
    }
    let norm = norm1(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * c(2f64.powi(-squarings), 0.0);
    let id = CMat::identity(n, n);
    let b = |k: usize| c(PADE13[k], 0.0);

    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_high = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = &a * (u_high + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let v_high = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8));
    let v = v_high + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &id * b(0);

    let numer = &v + &u;
    let denom = &v - &u;
    let mut r = denom.lu().solve(&numer).ok_or(Error::Singular)?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

/// Exponential of a real matrix, returned as a complex matrix.
pub fn expm_real(a: &RMat) -> Result<CMat> {
    expm(&to_complex(a))
}

/// Taylor sums of `exp(z)` and `upsilon(z)` for `||z||_1 <= 1/2`.
fn taylor_exp_upsilon(z: &CMat) -> (CMat, CMat) {
    let n = z.nrows();
    let id = CMat::identity(n, n);
    // upsilon(z) = sum_k z^k / (k+1)!
    let mut term = id.clone();
    let mut ups = id.clone();
    for k in 1..60 {
        term = &term * z * c(1.0 / (k as f64 + 1.0), 0.0);
        ups += &term;
        if norm1(&term) <= 1e-18 * norm1(&ups) {
            break;
        }
    }
    let e = &id + z * &ups;
    (e, ups)
}

/// The entire function `sum_k z^k/(k+1)!` evaluated at a square matrix.
///
/// Equals `z^{-1}(e^z - I)` for invertible `z`. Small arguments are summed
/// directly; larger ones are scaled by `2^-s` and doubled back with
/// `upsilon(2z) = upsilon(z)(e^z + I)/2`, so no inverse of `z` is formed.
pub fn upsilon(z: &CMat) -> Result<CMat> {
    let n = ensure_square(z)?;
    ensure_finite_c(z, "upsilon argument")?;
    if n == 0 {
        return Ok(z.clone());
    }
    let norm = norm1(z);
    let halvings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let zs = z * c(2f64.powi(-halvings), 0.0);
    let (mut e, mut ups) = taylor_exp_upsilon(&zs);
    let id = CMat::identity(n, n);
    let half = Complex64::new(0.5, 0.0);
    for _ in 0..halvings {
        ups = &ups * (&e + &id) * half;
        e = &e * &e;
    }
    Ok(ups)
}
