use ipc_core::gradient_flow::{estimate_order, flow_step, global_error, FlowScheme, SchemeKind};
use ipc_core::problems::QuadraticProblem;
use ipc_core::IpcError;
use nalgebra::DVector;

const H: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

fn scalar() -> QuadraticProblem {
    QuadraticProblem::new(
        DVector::from_element(1, 1.0),
        DVector::zeros(1),
        DVector::from_element(1, 1.0),
    )
}

fn expected_order(kind: SchemeKind) -> f64 {
    match kind {
        SchemeKind::ExplicitEuler | SchemeKind::ImplicitEuler => 1.0,
        _ => 2.0,
    }
}

#[test]
fn scalar_flow_orders() {
    let q = scalar();
    for kind in SchemeKind::ALL {
        let slope = estimate_order(&FlowScheme::new(kind), &q, 1.0, &H).unwrap();
        assert!(
            (slope - expected_order(kind)).abs() <= 0.15,
            "{kind}: {slope}"
        );
    }
}

#[test]
fn orders_survive_diagonal_rescaling() {
    let base = QuadraticProblem::new(
        DVector::from_vec(vec![1.0, 2.0, 3.0]),
        DVector::zeros(3),
        DVector::from_vec(vec![1.0, -0.5, 0.25]),
    );
    let scaled = QuadraticProblem::new(
        base.diag.clone(),
        DVector::zeros(3),
        base.x0
            .component_mul(&DVector::from_vec(vec![10.0, 0.1, 3.0])),
    );
    let h = [0.05, 0.025, 0.0125, 0.00625];
    for kind in SchemeKind::ALL {
        let s = FlowScheme::new(kind);
        let a = estimate_order(&s, &base, 1.0, &h).unwrap();
        let b = estimate_order(&s, &scaled, 1.0, &h).unwrap();
        assert!((a - b).abs() <= 0.05, "{kind}: {a} vs {b}");
    }
}

#[test]
fn implicit_schemes_hit_closed_forms_over_a_run() {
    let q = QuadraticProblem::new(
        DVector::from_vec(vec![0.5, 4.0]),
        DVector::zeros(2),
        DVector::from_vec(vec![1.0, 1.0]),
    );
    let h = 0.1;
    let mut x = q.x0.clone();
    for _ in 0..10 {
        x = flow_step(&FlowScheme::new(SchemeKind::ImplicitEuler), &q, &x, h).unwrap();
    }
    for (i, &lam) in q.diag.iter().enumerate() {
        let exact = (1.0 + h * lam).powi(-10);
        assert!((x[i] - exact).abs() <= 1e-10, "{} vs {exact}", x[i]);
    }
}

#[test]
fn second_order_schemes_beat_first_order_ones() {
    let q = scalar();
    let e = |k| global_error(&FlowScheme::new(k), &q, 1.0, 0.0125).unwrap();
    assert!(e(SchemeKind::ExplicitTrapezoidal) < e(SchemeKind::ExplicitEuler) / 10.0);
    assert!(e(SchemeKind::Midpoint) < e(SchemeKind::ImplicitEuler) / 10.0);
}

#[test]
fn step_must_divide_horizon() {
    let q = scalar();
    let err = global_error(&FlowScheme::new(SchemeKind::Midpoint), &q, 1.0, 0.3).unwrap_err();
    assert!(matches!(err, IpcError::Validation(_)));
}
