//! Check of `exp(a q^2 - b d^2) = exp(alpha q^2) exp(-beta d^2) exp(alpha q^2)`
//! on Gaussian-shaped functions `sigma exp(-gamma (q - mu)^2)`.
//!
//! The left side is the time-1 flow of `d_t psi = (a q^2 - b d_q^2) psi`,
//! which keeps the Gaussian shape with
//! `gamma' = 4b gamma^2 - a`, `(gamma mu)' = 4b gamma^2 mu`,
//! `(ln sigma - gamma mu^2)' = 2b gamma (1 - 2 gamma mu^2)`.
//! The right side acts in closed form: multiplication by `exp(alpha q^2)`
//! lowers `gamma` by `alpha`, and `exp(-beta d^2)` maps `gamma` to
//! `gamma / (1 - 4 beta gamma)` keeping the mass.

use crate::error::{Error, Result};

pub const MIN_STEPS: usize = 1000;

/// Relative margin inside which `gamma - alpha` is treated as on an endpoint.
pub const BOUNDARY_GUARD: f64 = 1e-12;

/// `sigma exp(-gamma (q - mu)^2)`, stored with `ln sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianShape {
    pub gamma: f64,
    pub mu: f64,
    pub log_sigma: f64,
}

impl GaussianShape {
    fn max_diff(&self, other: &Self) -> f64 {
        (self.gamma - other.gamma)
            .abs()
            .max((self.mu - other.mu).abs())
            .max((self.log_sigma - other.log_sigma).abs())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HeatReport {
    pub alpha: f64,
    pub beta: f64,
    pub flow: GaussianShape,
    pub composed: GaussianShape,
    /// Largest absolute difference of `gamma`, `mu`, `ln sigma`.
    pub discrepancy: f64,
}

/// `alpha = tanh(s) a / (2s)`, `beta = sinh(2s) b / (2s)`, `s = sqrt(ab)`.
pub fn heat_factors(a: f64, b: f64) -> (f64, f64) {
    let s = (a * b).sqrt();
    if s < 1e-8 {
        (0.5 * a * (1.0 - s * s / 3.0), b * (1.0 + 2.0 * s * s / 3.0))
    } else {
        (a * s.tanh() / (2.0 * s), b * (2.0 * s).sinh() / (2.0 * s))
    }
}

/// Admissible interval of `gamma - alpha`: `(alpha/(1 + 4 alpha beta), 1/(4 beta))`.
pub fn admissible_interval(a: f64, b: f64) -> (f64, f64) {
    let (alpha, beta) = heat_factors(a, b);
    let hi = if beta > 0.0 { 1.0 / (4.0 * beta) } else { f64::INFINITY };
    (alpha / (1.0 + 4.0 * alpha * beta), hi)
}

/// Multiplication by `exp(alpha q^2)`.
pub fn multiply(f: GaussianShape, alpha: f64) -> Result<GaussianShape> {
    let g = f.gamma - alpha;
    if !(g > 0.0) {
        return Err(Error::Domain(format!("gamma - alpha = {g} is not positive")));
    }
    Ok(GaussianShape {
        gamma: g,
        mu: f.gamma * f.mu / g,
        log_sigma: f.log_sigma + alpha * f.gamma * f.mu * f.mu / g,
    })
}

/// `gamma / (1 - 4 beta gamma)`, defined for `gamma < 1/(4 beta)`.
pub fn heat_map(gamma: f64, beta: f64) -> Result<f64> {
    let denom = 1.0 - 4.0 * beta * gamma;
    if !(gamma > 0.0) || !(denom > 0.0) {
        return Err(Error::Domain(format!("gamma = {gamma} is outside (0, 1/(4 beta))")));
    }
    Ok(gamma / denom)
}

/// Application of `exp(-beta d^2)`.
pub fn backward_heat(f: GaussianShape, beta: f64) -> Result<GaussianShape> {
    let g = heat_map(f.gamma, beta)?;
    Ok(GaussianShape {
        gamma: g,
        mu: f.mu,
        log_sigma: f.log_sigma + 0.5 * (g / f.gamma).ln(),
    })
}

/// State `(gamma, m = gamma mu, l = ln sigma - gamma mu^2)`.
fn rhs(a: f64, b: f64, y: [f64; 3]) -> [f64; 3] {
    let [g, m, _] = y;
    [4.0 * b * g * g - a, 4.0 * b * g * m, 2.0 * b * g * (1.0 - 2.0 * m * m / g)]
}

fn rk4(a: f64, b: f64, y0: [f64; 3], steps: usize) -> Result<[f64; 3]> {
    let h = 1.0 / steps as f64;
    let add = |y: [f64; 3], k: [f64; 3], s: f64| [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2]];
    let mut y = y0;
    for step in 0..steps {
        let k1 = rhs(a, b, y);
        let k2 = rhs(a, b, add(y, k1, 0.5 * h));
        let k3 = rhs(a, b, add(y, k2, 0.5 * h));
        let k4 = rhs(a, b, add(y, k3, h));
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !y.iter().all(|v| v.is_finite()) || !(y[0] > 0.0) || y[0] > 1e12 {
            return Err(Error::Divergence(format!(
                "Riccati flow left the Gaussian class at t = {}",
                (step + 1) as f64 * h
            )));
        }
    }
    Ok(y)
}

/// Compares the flow at `t = 1` with the three-factor composition.
pub fn heat_sandwich_check(a: f64, b: f64, gamma: f64, mu: f64, t_steps: usize) -> Result<HeatReport> {
    if !(a >= 0.0) || !(b >= 0.0) || !a.is_finite() || !b.is_finite() || !mu.is_finite() {
        return Err(Error::InvalidInput(format!("need finite a, b >= 0, got a = {a}, b = {b}")));
    }
    if t_steps < MIN_STEPS {
        return Err(Error::InvalidInput(format!("at least {MIN_STEPS} steps are required")));
    }
    let (alpha, beta) = heat_factors(a, b);
    let (lo, hi) = admissible_interval(a, b);
    let gap = gamma - alpha;
    // points within rounding of an endpoint count as on the boundary
    if !(gap > lo * (1.0 + BOUNDARY_GUARD) && gap < hi * (1.0 - BOUNDARY_GUARD)) {
        return Err(Error::Domain(format!(
            "gamma - alpha = {gap} is outside the admissible interval ({lo}, {hi})"
        )));
    }
    let f = GaussianShape {
        gamma,
        mu,
        log_sigma: 0.0,
    };
    let composed = multiply(backward_heat(multiply(f, alpha)?, beta)?, alpha)?;
    let [g, m, l] = rk4(a, b, [gamma, gamma * mu, -gamma * mu * mu], t_steps)?;
    let flow = GaussianShape {
        gamma: g,
        mu: m / g,
        log_sigma: l + m * m / g,
    };
    Ok(HeatReport {
        alpha,
        beta,
        flow,
        composed,
        discrepancy: flow.max_diff(&composed),
    })
}
