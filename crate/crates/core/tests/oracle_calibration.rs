//! Statistical calibration of the Monte Carlo estimators and domain checks
//! of the heat-kernel map.

use num_complex::Complex64;
use qef_core::ccr::CcrMatrix;
use qef_core::matrix::RMat;
use qef_core::moments::product_moment_ey;
use qef_core::oracles::heat::heat_map;
use qef_core::oracles::{mc_product_moment, mc_qef, mc_single_variable};
use qef_core::qef::{compute_qef, QefProblem};
use qef_core::state::GaussianState;

fn coverage<F: Fn(u64) -> bool>(hit: F) -> usize {
    (0..50u64).filter(|&seed| hit(1000 + seed)).count()
}

#[test]
fn single_variable_interval_coverage() {
    let target = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
    let hits = coverage(|seed| mc_single_variable(1.0, 1.0, 20_000, seed).unwrap().within(target, 3.0));
    assert!(hits >= 45, "{hits} of 50");
}

#[test]
fn product_moment_interval_coverage() {
    let st = GaussianState::vacuum(1);
    let target = product_moment_ey(&st).unwrap();
    let hits = coverage(|seed| mc_product_moment(&st, 20_000, seed).unwrap().within(target, 3.0));
    assert!(hits >= 45, "{hits} of 50");
}

#[test]
fn qef_interval_coverage() {
    let problem = QefProblem::new(GaussianState::thermal(1, 1.0).unwrap(), RMat::identity(2, 2) * 0.1).unwrap();
    let target = compute_qef(&problem).unwrap().xi;
    assert!((target.re - 1.2427).abs() < 1e-4);
    let hits = coverage(|seed| mc_qef(&problem, 20_000, seed, false).unwrap().within(target, 3.0));
    assert!(hits >= 45, "{hits} of 50");
}

#[test]
fn commuting_product_moment() {
    // Theta = 0, P = I: classical value 1/sqrt(det(2I)) = 1/2
    let ccr = CcrMatrix::validate(RMat::zeros(2, 2)).unwrap();
    let st = GaussianState::admissible(RMat::identity(2, 2), ccr).unwrap();
    let est = mc_product_moment(&st, 200_000, 5).unwrap();
    assert!(est.within(Complex64::new(0.5, 0.0), 3.0), "{est:?}");
}

#[test]
fn heat_map_positivity_boundary() {
    let beta = 0.3;
    let edge = 1.0 / (4.0 * beta);
    for k in 1..40 {
        let gamma = edge * k as f64 / 20.0;
        let r = heat_map(gamma, beta);
        if gamma < edge * (1.0 - 1e-12) {
            assert!(r.unwrap() > 0.0);
        } else {
            assert!(r.is_err(), "gamma = {gamma}");
        }
    }
}
