//! Algebraic invariants checked on randomly generated inputs.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use qef_core::ccr::canonical_j;
use qef_core::lie::{dynkin_product, exp_map, generator, product_chain, quad_commutator};
use qef_core::matrix::{
    c, det, diam, expm, logm, max_abs, max_abs_c, reversal, upsilon, CMat, RMat,
};
use qef_core::moments::product_moment_eyy;
use qef_core::qef::{compute_qef, intermediates, intermediates_with, report_from, QefProblem};
use qef_core::state::GaussianState;
use qef_core::williamson::williamson;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

fn feasible_problem(seed: u64, n: usize) -> QefProblem {
    let mut rng = common::rng(seed);
    let ccr = common::ccr(&mut rng, n);
    let st = common::state(&mut rng, &ccr);
    let pi = common::spd(&mut rng, n, 0.01, 0.05);
    let scale = 0.05 / (max_abs(st.p()) * n as f64);
    QefProblem::new(st, pi * scale).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn diam_is_idempotent_and_linear(seed in any::<u64>(), half in 1usize..5, a in -2.0f64..2.0) {
        let mut rng = common::rng(seed);
        let n = 2 * half;
        let x = common::matrix(&mut rng, n, n, 1.0);
        let y = common::matrix(&mut rng, n, n, 1.0);
        let dx = diam(&x).unwrap();
        prop_assert_eq!(diam(&dx).unwrap(), dx.clone());
        let lin = diam(&(&x * a + &y)).unwrap() - (&dx * a + diam(&y).unwrap());
        prop_assert!(max_abs(&lin) < 1e-14);
        // only the diagonal and upper triangle matter
        let lower = RMat::from_fn(n, n, |r, k| if r > k { y[(r, k)] } else { 0.0 });
        prop_assert_eq!(diam(&(&x + lower)).unwrap(), diam(&x).unwrap());
        prop_assert_eq!(dx.transpose(), dx.clone());
        let r = reversal(n).unwrap();
        prop_assert_eq!(&r * &r, RMat::identity(n, n));
    }

    #[test]
    fn exp_of_z_is_identity_plus_z_upsilon(seed in any::<u64>(), n in 1usize..6, s in 0.05f64..4.0) {
        let mut rng = common::rng(seed);
        let re = common::matrix(&mut rng, n, n, s);
        let im = common::matrix(&mut rng, n, n, s);
        let z = CMat::from_fn(n, n, |r, k| Complex64::new(re[(r, k)], im[(r, k)]));
        let lhs = expm(&z).unwrap();
        let rhs = CMat::identity(n, n) + &z * upsilon(&z).unwrap();
        prop_assert!(max_abs_c(&(&lhs - rhs)) < 1e-10 * max_abs_c(&lhs).max(1.0));
    }

    #[test]
    fn log_inverts_exp_near_identity(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = common::rng(seed);
        let z = common::complex_symmetric(&mut rng, n, 0.3);
        let back = logm(&expm(&z).unwrap()).unwrap();
        prop_assert!(max_abs_c(&(back - &z)) < 1e-11);
    }

    #[test]
    fn canonicalization_reconstructs_theta(seed in any::<u64>(), nu in 1usize..5) {
        let mut rng = common::rng(seed);
        let ccr = common::ccr(&mut rng, 2 * nu);
        let canon = ccr.canonicalize().unwrap();
        let back = canon.t() * canonical_j(nu) * canon.t().transpose();
        prop_assert!(max_abs(&(back - ccr.theta())) < 1e-10 * (1.0 + max_abs(ccr.theta())));
        let id = canon.t() * canon.t_inv();
        prop_assert!(max_abs(&(id - RMat::identity(2 * nu, 2 * nu))) < 1e-10);
    }

    #[test]
    fn admissibility_survives_orthogonal_congruence(seed in any::<u64>(), nu in 1usize..4) {
        let mut rng = common::rng(seed);
        let ccr = common::ccr(&mut rng, 2 * nu);
        let st = common::state(&mut rng, &ccr);
        let q = common::matrix(&mut rng, 2 * nu, 2 * nu, 1.0).qr().q();
        let p = &q * st.p() * q.transpose();
        let theta = &q * ccr.theta() * q.transpose();
        let moved = GaussianState::admissible(
            (&p + p.transpose()) * 0.5,
            qef_core::ccr::CcrMatrix::validate(theta).unwrap(),
        );
        prop_assert!(moved.is_ok());
        prop_assert!((moved.unwrap().min_eigenvalue() - st.min_eigenvalue()).abs() < 1e-9);
    }

    #[test]
    fn williamson_reconstructs_and_is_symplectic(seed in any::<u64>(), nu in 1usize..5) {
        let mut rng = common::rng(seed);
        let m = common::spd(&mut rng, 2 * nu, 0.1, 3.0);
        let w = williamson(&m).unwrap();
        prop_assert!(w.symplectic_residual() < 1e-9);
        prop_assert!(w.diagonalization_residual(&m) < 1e-9);
        prop_assert!(max_abs(&(w.reconstruct() - &m)) < 1e-9 * max_abs(&m));
        // symplectic congruence preserves the symplectic spectrum
        let s = common::symplectic(&mut rng, nu, 0.3);
        let moved = s.transpose() * &m * &s;
        let w2 = williamson(&((&moved + moved.transpose()) * 0.5)).unwrap();
        for (a, b) in w.lambdas().iter().zip(w2.lambdas()) {
            prop_assert!((a - b).abs() < 1e-8 * a.max(1.0));
        }
    }

    #[test]
    fn eyy_is_real_and_bounded(seed in any::<u64>(), nu in 1usize..3) {
        let mut rng = common::rng(seed);
        let ccr = common::ccr(&mut rng, 2 * nu);
        let st = common::state(&mut rng, &ccr);
        let r = product_moment_eyy(&st).unwrap();
        prop_assert!(r.imaginary_part.abs() < 1e-10);
        prop_assert!(r.value > 0.0);
        prop_assert!(r.value <= r.upper_bound * (1.0 + 1e-12));
    }

    #[test]
    fn qef_is_gauge_and_order_invariant(seed in any::<u64>(), nu in 1usize..4) {
        let problem = feasible_problem(seed, 2 * nu);
        let base = compute_qef(&problem).unwrap();
        prop_assert!(base.feasible);
        let mut rng = common::rng(seed ^ 0x5eed);
        let s = common::symplectic(&mut rng, nu, 0.5);
        let canon = problem.state().ccr().canonicalize().unwrap().with_gauge(&s).unwrap();
        let gauged = report_from(&problem, &intermediates_with(&problem, &canon, None).unwrap()).unwrap();
        prop_assert!((gauged.xi - base.xi).norm() < 1e-8 * base.xi.norm());
        let order: Vec<usize> = (0..nu).rev().collect();
        let canon = problem.state().ccr().canonicalize().unwrap();
        let perm = report_from(&problem, &intermediates_with(&problem, &canon, Some(&order)).unwrap()).unwrap();
        prop_assert!((perm.xi - base.xi).norm() < 1e-8 * base.xi.norm());
    }

    #[test]
    fn qef_is_real_above_one_and_increasing_in_risk(seed in any::<u64>(), nu in 1usize..3) {
        let problem = feasible_problem(seed, 2 * nu);
        let mut last = 1.0;
        for k in 1..=4 {
            let r = compute_qef(&problem.with_risk(k as f64 * 0.25).unwrap()).unwrap();
            prop_assert!(r.xi.im.abs() < 1e-10 * r.xi.re);
            prop_assert!(r.xi.re > last);
            last = r.xi.re;
        }
        let im = intermediates(&problem).unwrap();
        prop_assert!(im.mho.iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn exp_map_is_symplectic_with_unit_determinant(seed in any::<u64>(), nu in 1usize..4) {
        let mut rng = common::rng(seed);
        let ccr = common::ccr(&mut rng, 2 * nu);
        let cm = common::complex_symmetric(&mut rng, 2 * nu, 0.2);
        let img = exp_map(&cm, &ccr).unwrap();
        prop_assert!(img.symplectic_residual(&ccr) < 1e-9 * max_abs_c(&img.s).powi(2).max(1.0));
        prop_assert!((det(&img.s).unwrap() - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn commutator_maps_to_generator_commutator(seed in any::<u64>(), nu in 1usize..4) {
        let mut rng = common::rng(seed);
        let ccr = common::ccr(&mut rng, 2 * nu);
        let a = common::complex_symmetric(&mut rng, 2 * nu, 1.0);
        let b = common::complex_symmetric(&mut rng, 2 * nu, 1.0);
        let ga = generator(&a, &ccr);
        let gb = generator(&b, &ccr);
        let lhs = generator(&quad_commutator(&a, &b, &ccr).unwrap(), &ccr);
        let rhs = &ga * &gb - &gb * &ga;
        prop_assert!(max_abs_c(&(lhs - &rhs)) < 1e-10 * max_abs_c(&rhs).max(1.0));
    }

    #[test]
    fn product_recovery_round_trips(seed in any::<u64>(), nu in 1usize..3, k in 2usize..5) {
        let mut rng = common::rng(seed);
        let ccr = common::ccr(&mut rng, 2 * nu);
        let cs: Vec<CMat> = (0..k).map(|_| common::complex_symmetric(&mut rng, 2 * nu, 0.05)).collect();
        let lp = product_chain(&cs, &ccr).unwrap();
        prop_assert!(lp.exp_residual < 1e-10);
        prop_assert!(lp.asymmetry_residual < 1e-8);
        let two = dynkin_product(&cs[0], &cs[1], &ccr).unwrap();
        let cc = quad_commutator(&cs[0], &cs[1], &ccr).unwrap();
        // second-order term of the Baker-Campbell-Hausdorff series
        let approx = &cs[0] + &cs[1] + cc * c(0.5, 0.0);
        prop_assert!(!lp.branch_risk || lp.guard_norm >= std::f64::consts::PI);
        prop_assert!(max_abs_c(&(two.e - approx)) < 50.0 * 0.05f64.powi(3) * (1.0 + max_abs(ccr.theta())).powi(2));
    }

    #[test]
    fn qcf_is_hermitian(seed in any::<u64>(), nu in 1usize..4) {
        let mut rng = common::rng(seed);
        let ccr = common::ccr(&mut rng, 2 * nu);
        let st = common::state(&mut rng, &ccr);
        let u = nalgebra::DVector::from_fn(2 * nu, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
        let a = st.qcf(&u).unwrap();
        let b = st.qcf(&(-&u)).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-14);
        prop_assert!(a.norm() <= 1.0 + 1e-14);
    }
}
