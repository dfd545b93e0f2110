//! Time discretizations of the gradient flow `ẋ = −∇f(x)` and empirical
//! estimation of their global error order.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{IpcError, Result};
use crate::oracle::GradientOracle;

/// Largest `h·L` accepted by the implicit schemes and by [`estimate_order`];
/// keeps every fixed-point map a contraction.
pub const MAX_HL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    ExplicitEuler,
    ImplicitEuler,
    Midpoint,
    Trapezoidal,
    /// Trapezoidal rule with the implicit point replaced by an explicit Euler
    /// predictor. Identical to the corrected step with `β = ½`.
    ExplicitTrapezoidal,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::ExplicitEuler,
        SchemeKind::ImplicitEuler,
        SchemeKind::Midpoint,
        SchemeKind::Trapezoidal,
        SchemeKind::ExplicitTrapezoidal,
    ];

    pub fn is_implicit(self) -> bool {
        matches!(
            self,
            SchemeKind::ImplicitEuler | SchemeKind::Midpoint | SchemeKind::Trapezoidal
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::ExplicitEuler => "explicit-euler",
            SchemeKind::ImplicitEuler => "implicit-euler",
            SchemeKind::Midpoint => "midpoint",
            SchemeKind::Trapezoidal => "trapezoidal",
            SchemeKind::ExplicitTrapezoidal => "explicit-trapezoidal",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = IpcError;
    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| IpcError::Validation(format!("unknown scheme '{s}'")))
    }
}

/// Parameters of the plain fixed-point iteration used by implicit schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointParams {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for FixedPointParams {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iters: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowScheme {
    pub kind: SchemeKind,
    pub inner: FixedPointParams,
}

impl FlowScheme {
    pub fn new(kind: SchemeKind) -> Self {
        Self {
            kind,
            inner: FixedPointParams::default(),
        }
    }
}

impl From<SchemeKind> for FlowScheme {
    fn from(kind: SchemeKind) -> Self {
        Self::new(kind)
    }
}

/// Iterates `y ← map(y)` from `start` until successive iterates agree to
/// `tol·(1 + ‖y‖)`.
fn fixed_point<F>(start: DVector<f64>, params: &FixedPointParams, map: F) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut y = start;
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_iters {
        let next = map(&y);
        residual = (&next - &y).norm();
        let done = residual <= params.tol * (1.0 + next.norm());
        y = next;
        if done {
            return Ok(y);
        }
    }
    Err(IpcError::NoConvergence {
        iters: params.max_iters,
        residual,
    })
}

fn check_hl(oracle: &dyn GradientOracle, h: f64) -> Result<()> {
    match oracle.lipschitz() {
        Some(l) if h * l > MAX_HL => Err(IpcError::Validation(format!(
            "step needs h·L <= {MAX_HL}, got {}",
            h * l
        ))),
        _ => Ok(()),
    }
}

/// One step of size `h` from `x`. Implicit schemes require `h·L ≤ MAX_HL`.
pub fn flow_step(
    scheme: &FlowScheme,
    oracle: &dyn GradientOracle,
    x: &DVector<f64>,
    h: f64,
) -> Result<DVector<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(IpcError::Validation(format!(
            "step must be positive, got {h}"
        )));
    }
    if scheme.kind.is_implicit() {
        check_hl(oracle, h)?;
    }
    let g = oracle.gradient(x);
    match scheme.kind {
        SchemeKind::ExplicitEuler => Ok(x - &g * h),
        SchemeKind::ImplicitEuler => {
            fixed_point(x - &g * h, &scheme.inner, |y| x - oracle.gradient(y) * h)
        }
        SchemeKind::Midpoint => {
            let half = 0.5 * h;
            let z = fixed_point(x - &g * half, &scheme.inner, |z| {
                x - oracle.gradient(z) * half
            })?;
            Ok(&z * 2.0 - x)
        }
        SchemeKind::Trapezoidal => {
            let half = 0.5 * h;
            fixed_point(x - &g * h, &scheme.inner, |y| {
                x - (&g + oracle.gradient(y)) * half
            })
        }
        SchemeKind::ExplicitTrapezoidal => {
            let z = x - &g * h;
            let gz = oracle.gradient(&z);
            Ok(DVector::from_fn(x.len(), |i, _| {
                x[i] - h * (0.5 * g[i] + 0.5 * gz[i])
            }))
        }
    }
}

/// Global error `max_k ‖x^k − x(t_k)‖` of `scheme` with step `h` over `[0, t_end]`.
///
/// The oracle must be a diagonal quadratic so that the exact flow is known.
pub fn global_error(
    scheme: &FlowScheme,
    oracle: &dyn GradientOracle,
    t_end: f64,
    h: f64,
) -> Result<f64> {
    let quad = oracle.as_quadratic().ok_or_else(|| {
        IpcError::UnsupportedOracle(
            "order estimation needs a diagonal quadratic with a closed-form flow".into(),
        )
    })?;
    let steps = (t_end / h).round();
    if steps < 1.0 || (steps * h - t_end).abs() > 1e-9 * t_end {
        return Err(IpcError::Validation(format!(
            "h={h} does not divide T={t_end}"
        )));
    }
    let x0 = &quad.x0;
    let mut x = x0.clone();
    let mut worst: f64 = 0.0;
    for k in 1..=steps as usize {
        x = flow_step(scheme, oracle, &x, h)?;
        let exact = quad.exact_flow(x0, k as f64 * h);
        worst = worst.max((&x - exact).norm());
    }
    Ok(worst)
}

/// Least-squares slope of `log E(h)` against `log h`.
pub fn estimate_order(
    scheme: &FlowScheme,
    oracle: &dyn GradientOracle,
    t_end: f64,
    h_list: &[f64],
) -> Result<f64> {
    if h_list.len() < 3 {
        return Err(IpcError::Validation(
            "order estimation needs at least three step sizes".into(),
        ));
    }
    if h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(IpcError::Validation(
            "step sizes must be strictly decreasing".into(),
        ));
    }
    check_hl(oracle, h_list[0])?;
    let points = h_list
        .iter()
        .map(|&h| Ok((h.ln(), global_error(scheme, oracle, t_end, h)?.ln())))
        .collect::<Result<Vec<_>>>()?;
    Ok(least_squares_slope(&points))
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::QuadraticProblem;
    use approx::assert_relative_eq;

    fn scalar(lambda: f64) -> QuadraticProblem {
        QuadraticProblem::new(
            DVector::from_element(1, lambda),
            DVector::zeros(1),
            DVector::from_element(1, 1.0),
        )
    }

    #[test]
    fn linear_flow_closed_forms() {
        let (lambda, h, x) = (2.0, 0.1, DVector::from_element(1, 0.7));
        let o = scalar(lambda);
        let hl = h * lambda;
        let step = |k| flow_step(&FlowScheme::new(k), &o, &x, h).unwrap()[0];
        assert_relative_eq!(
            step(SchemeKind::ExplicitEuler),
            (1.0 - hl) * 0.7,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            step(SchemeKind::ImplicitEuler),
            0.7 / (1.0 + hl),
            max_relative = 1e-11
        );
        assert_relative_eq!(
            step(SchemeKind::Midpoint),
            0.7 * (1.0 - hl / 2.0) / (1.0 + hl / 2.0),
            max_relative = 1e-11
        );
        assert_relative_eq!(
            step(SchemeKind::Trapezoidal),
            0.7 * (1.0 - hl / 2.0) / (1.0 + hl / 2.0),
            max_relative = 1e-11
        );
        assert_relative_eq!(
            step(SchemeKind::ExplicitTrapezoidal),
            (1.0 - hl + hl * hl / 2.0) * 0.7,
            max_relative = 1e-14
        );
    }

    #[test]
    fn step_limit_enforced() {
        let o = scalar(10.0);
        let x = DVector::from_element(1, 1.0);
        for kind in SchemeKind::ALL {
            let s = FlowScheme::new(kind);
            assert!(flow_step(&s, &o, &x, 0.05).is_ok());
            assert_eq!(
                flow_step(&s, &o, &x, 0.09).is_ok(),
                !kind.is_implicit(),
                "{kind}"
            );
            assert!(estimate_order(&s, &o, 1.0, &[0.1, 0.05, 0.025]).is_err());
        }
    }

    #[test]
    fn non_convergent_inner_solve_reported() {
        let o = scalar(0.4);
        let scheme = FlowScheme {
            kind: SchemeKind::ImplicitEuler,
            inner: FixedPointParams {
                tol: 1e-12,
                max_iters: 3,
            },
        };
        let err = flow_step(&scheme, &o, &DVector::from_element(1, 1.0), 1.0).unwrap_err();
        assert!(matches!(err, IpcError::NoConvergence { iters: 3, .. }));
    }

    #[test]
    fn order_needs_quadratic_and_good_grid() {
        let general = crate::oracle::FnOracle::new(1, |x| x[0], |_| DVector::from_element(1, 1.0));
        let s = FlowScheme::new(SchemeKind::ExplicitEuler);
        assert!(matches!(
            estimate_order(&s, &general, 1.0, &[0.1, 0.05, 0.025]),
            Err(IpcError::UnsupportedOracle(_))
        ));
        let o = scalar(1.0);
        assert!(estimate_order(&s, &o, 1.0, &[0.1, 0.05]).is_err());
        assert!(estimate_order(&s, &o, 1.0, &[0.05, 0.1, 0.025]).is_err());
        assert!(estimate_order(&s, &o, 1.0, &[0.3, 0.07, 0.025]).is_err());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = [0.1f64, 0.05, 0.025]
            .iter()
            .map(|h| (h.ln(), (3.0 * h * h).ln()))
            .collect();
        assert_relative_eq!(least_squares_slope(&pts), 2.0, max_relative = 1e-12);
    }
}
