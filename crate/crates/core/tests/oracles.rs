//! Sampling checks on every shipped oracle.

use ipc_core::oracle::relative_error;
use ipc_core::problems::rng::Streams;
use ipc_core::problems::{make_arctan_quadratic, make_fractional, make_quadratic, spectral_norm};
use ipc_core::{finite_difference_grad, Convexity, GradientOracle};
use nalgebra::DVector;

const PAIRS: usize = 100;

#[test]
fn fractional_gradient_matches_finite_differences() {
    let p = make_fractional(12, 3);
    let mut u = Streams::new(99).stream(0);
    for _ in 0..PAIRS {
        let x = u.vector(12, 1.0, 10.0);
        let err = relative_error(&finite_difference_grad(&p, &x, 1e-4), &p.gradient(&x));
        assert!(err <= 1e-5, "relative error {err:e}");
    }
    let n1 = make_fractional(1, 5);
    let x0 = n1.default_start().unwrap();
    assert!(relative_error(&finite_difference_grad(&n1, &x0, 1e-4), &n1.gradient(&x0)) <= 1e-5);
}

#[test]
fn fractional_construction_ranges() {
    let n = 30;
    let p = make_fractional(n, 11);
    let q = &p.q_mat;
    assert!((q - q.transpose()).norm() <= 1e-12 * q.norm());
    let min_eig = q.clone().symmetric_eigen().eigenvalues.min();
    assert!(min_eig >= 1.0 - 1e-9, "{min_eig}");
    assert!(p.c.iter().chain(p.r.iter()).all(|&v| v > 0.0 && v < 2.0));
    assert!(p.q_const > 1.0 && p.q_const < 2.0);
    assert_eq!(p.t_const, 1.0 + 4.0 * n as f64);
    assert!(p.x0.iter().all(|&v| v > 1.0 && v < 10.0));
    assert_eq!(p.convexity(), Convexity::PseudoConvex);
    assert!(p.lipschitz().is_none());
}

#[test]
fn fractional_denominator_positive_and_bounded_below() {
    let p = make_fractional(20, 4);
    let mut u = Streams::new(5).stream(0);
    for _ in 0..PAIRS {
        let x = u.vector(20, 0.0, 10.0);
        assert!(p.denominator(&x) > 0.0);
        assert!(p.check_domain(&x).is_ok());
        assert!(p.value(&x) > 0.0);
    }
    let far = DVector::from_element(20, -1e3);
    assert!(p.check_domain(&far).is_err());
}

#[test]
fn fractional_gradient_is_pseudo_monotone() {
    let n = 15;
    let p = make_fractional(n, 8);
    let mut u = Streams::new(17).stream(0);
    let mut tested = 0;
    while tested < PAIRS {
        let x = u.vector(n, 1.0, 10.0);
        let y = u.vector(n, 1.0, 10.0);
        let dir = &y - &x;
        if p.gradient(&x).dot(&dir) >= 0.0 {
            assert!(p.gradient(&y).dot(&dir) >= -1e-8);
            tested += 1;
        }
    }
}

#[test]
fn arctan_gradient_at_origin_is_q() {
    let p = make_arctan_quadratic(10, 2);
    assert_eq!(p.gradient(&DVector::zeros(10)), p.q);
}

#[test]
fn arctan_structure() {
    let n = 25;
    let p = make_arctan_quadratic(n, 6);
    // skew part of M is B
    let b = (&p.m - p.m.transpose()) * 0.5;
    assert!((&b + b.transpose()).amax() <= 1e-12);
    let norm = spectral_norm(&p.m);
    let svd_norm = p.m.clone().svd(false, false).singular_values.max();
    assert!(
        (norm - svd_norm).abs() <= 1e-8 * svd_norm,
        "{norm} vs {svd_norm}"
    );
    assert_eq!(p.lipschitz(), Some(norm + 1.0));
    assert!(p.q.iter().all(|&v| v.abs() < 500.0));
    assert!(p.x0.iter().all(|&v| v > 0.0 && v < 1.0));
}

#[test]
fn arctan_operator_monotone_lipschitz_and_symmetric_part_cocoercive() {
    let n = 20;
    let p = make_arctan_quadratic(n, 1);
    let l = p.lipschitz().unwrap();
    let mut u = Streams::new(23).stream(0);
    for _ in 0..PAIRS {
        let x = u.vector(n, -3.0, 3.0);
        let y = u.vector(n, -3.0, 3.0);
        let dx = &x - &y;
        let dg = p.gradient(&x) - p.gradient(&y);
        assert!(dg.dot(&dx) >= -1e-8 * dg.norm() * dx.norm());
        assert!(dg.norm() <= l * (1.0 + 1e-8) * dx.norm());
        let ds = p.symmetric_gradient(&x) - p.symmetric_gradient(&y);
        let lhs = ds.dot(&dx);
        let rhs = ds.norm_squared() / l;
        assert!(lhs >= rhs - 1e-8 * lhs.abs(), "cocoercivity {lhs} < {rhs}");
    }
}

#[test]
fn arctan_value_differentiates_to_symmetric_operator() {
    let n = 15;
    let p = make_arctan_quadratic(n, 4);
    let mut u = Streams::new(31).stream(0);
    for _ in 0..PAIRS {
        let x = u.vector(n, 0.0, 1.0);
        let err = relative_error(
            &finite_difference_grad(&p, &x, 1e-4),
            &p.symmetric_gradient(&x),
        );
        assert!(err <= 1e-5, "{err:e}");
    }
}

#[test]
fn quadratic_oracle_facts() {
    let p = make_quadratic(8, 50.0, 3);
    assert_eq!(p.gradient(&p.x_star), DVector::zeros(8));
    assert_eq!(p.lipschitz(), Some(50.0));
    assert!((p.diag.min() - 1.0).abs() < 1e-15 && (p.diag.max() - 50.0).abs() < 1e-12);
    let mut u = Streams::new(3).stream(7);
    for _ in 0..PAIRS {
        let x = u.vector(8, -5.0, 5.0);
        assert!(relative_error(&finite_difference_grad(&p, &x, 1e-4), &p.gradient(&x)) <= 1e-5);
        let y = u.vector(8, -5.0, 5.0);
        let (dx, dg) = (&x - &y, p.gradient(&x) - p.gradient(&y));
        assert!(dg.dot(&dx) >= dg.norm_squared() / 50.0 * (1.0 - 1e-8));
    }
    // gradient descent with h = 1/cond contracts monotonically
    let mut x = p.x0.clone();
    let mut dist = (&x - &p.x_star).norm();
    for _ in 0..50 {
        x = &x - p.gradient(&x) / 50.0;
        let d = (&x - &p.x_star).norm();
        assert!(d < dist);
        dist = d;
    }
}

#[test]
fn generators_are_deterministic() {
    assert_eq!(make_fractional(7, 1), make_fractional(7, 1));
    assert_eq!(make_arctan_quadratic(7, 1), make_arctan_quadratic(7, 1));
    assert_eq!(make_quadratic(7, 9.0, 1), make_quadratic(7, 9.0, 1));
    assert_ne!(make_fractional(7, 1).x0, make_fractional(7, 2).x0);
}

#[test]
fn arctan_value_and_gradient_agree_with_separate_calls() {
    let p = make_arctan_quadratic(6, 3);
    let x = p.x0.clone();
    let (f, g) = p.value_and_gradient(&x);
    assert_eq!(f, p.value(&x));
    assert_eq!(g, p.gradient(&x));
    let fr = make_fractional(6, 3);
    let (f, g) = fr.value_and_gradient(&fr.x0);
    assert!((f - fr.value(&fr.x0)).abs() <= 1e-14 * f.abs());
    assert_eq!(g, fr.gradient(&fr.x0));
}
