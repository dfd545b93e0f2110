use nalgebra::{DMatrix, DVector};

use super::rng::Streams;
use crate::oracle::{Convexity, GradientOracle};

/// `f(x) = G(x)/D(x)` with `G(x) = ½xᵀQx + cᵀx + q` and `D(x) = rᵀx + t`.
///
/// `Q = MMᵀ + I` with `M_ij ~ U(0,1)`, `c, r ~ U(0,2)ⁿ`, `q ~ U(1,2)`,
/// `t = 1 + 4n`. Pseudo-convex wherever `D > 0`, which includes the whole
/// positive orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalProblem {
    pub q_mat: DMatrix<f64>,
    pub c: DVector<f64>,
    pub q_const: f64,
    pub r: DVector<f64>,
    pub t_const: f64,
    pub x0: DVector<f64>,
    pub seed: u64,
}

/// Stream layout: 0 → M, 1 → c, 2 → q, 3 → r, 4 → x⁰.
pub fn make_fractional(n: usize, seed: u64) -> FractionalProblem {
    assert!(n >= 1, "dimension must be positive");
    let s = Streams::new(seed);
    let m = s.stream(0).matrix(n, n, 0.0, 1.0);
    let mut q_mat = &m * m.transpose();
    q_mat = (&q_mat + q_mat.transpose()) * 0.5;
    for i in 0..n {
        q_mat[(i, i)] += 1.0;
    }
    FractionalProblem {
        q_mat,
        c: s.stream(1).vector(n, 0.0, 2.0),
        q_const: s.stream(2).uniform(1.0, 2.0),
        r: s.stream(3).vector(n, 0.0, 2.0),
        t_const: 1.0 + 4.0 * n as f64,
        x0: s.stream(4).vector(n, 1.0, 10.0),
        seed,
    }
}

impl FractionalProblem {
    pub fn numerator(&self, x: &DVector<f64>) -> f64 {
        let qx = &self.q_mat * x;
        0.5 * x.dot(&qx) + self.c.dot(x) + self.q_const
    }

    /// `D(x) = rᵀx + t`.
    pub fn denominator(&self, x: &DVector<f64>) -> f64 {
        self.r.dot(x) + self.t_const
    }
}

impl GradientOracle for FractionalProblem {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.numerator(x) / self.denominator(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.value_and_gradient(x).1
    }

    /// Quotient rule, `∇f = (Qx + c)/D − (G/D)·r/D`, sharing `Qx` and `G/D`.
    fn value_and_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let qx = &self.q_mat * x;
        let g = 0.5 * x.dot(&qx) + self.c.dot(x) + self.q_const;
        let d = self.denominator(x);
        let ratio = g / d;
        let grad = (qx + &self.c - &self.r * ratio) / d;
        (ratio, grad)
    }

    fn convexity(&self) -> Convexity {
        Convexity::PseudoConvex
    }

    fn default_start(&self) -> Option<DVector<f64>> {
        Some(self.x0.clone())
    }

    fn check_domain(&self, x: &DVector<f64>) -> Result<(), String> {
        let d = self.denominator(x);
        if d > 0.0 {
            Ok(())
        } else {
            Err(format!("denominator rᵀx + t = {d:e} is not positive"))
        }
    }
}
