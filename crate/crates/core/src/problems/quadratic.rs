use nalgebra::DVector;

use super::rng::Streams;
use crate::oracle::{Convexity, GradientOracle};

/// `f(x) = ½(x − x*)ᵀH(x − x*)` with diagonal `H`.
///
/// The gradient flow has the closed form `x(t) = x* + e^{−Ht}(x⁰ − x*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProblem {
    pub diag: DVector<f64>,
    pub x_star: DVector<f64>,
    pub x0: DVector<f64>,
    pub lipschitz: f64,
    pub seed: u64,
}

/// Eigenvalues `cond^{i/(n−1)}`, log-spaced over `[1, cond]` (a single `1`
/// when `n = 1`); `x*, x⁰ ~ U(−5,5)ⁿ` from streams 0 and 1. The reported
/// Lipschitz constant is `cond`.
pub fn make_quadratic(n: usize, cond: f64, seed: u64) -> QuadraticProblem {
    assert!(n >= 1, "dimension must be positive");
    assert!(cond >= 1.0, "condition number must be at least 1");
    let diag = if n == 1 {
        DVector::from_element(1, 1.0)
    } else {
        DVector::from_fn(n, |i, _| cond.powf(i as f64 / (n - 1) as f64))
    };
    let s = Streams::new(seed);
    QuadraticProblem {
        diag,
        x_star: s.stream(0).vector(n, -5.0, 5.0),
        x0: s.stream(1).vector(n, -5.0, 5.0),
        lipschitz: cond,
        seed,
    }
}

impl QuadraticProblem {
    /// Lipschitz constant is the largest diagonal entry.
    pub fn new(diag: DVector<f64>, x_star: DVector<f64>, x0: DVector<f64>) -> Self {
        assert_eq!(diag.len(), x_star.len());
        assert_eq!(diag.len(), x0.len());
        let lipschitz = diag.max();
        Self {
            diag,
            x_star,
            x0,
            lipschitz,
            seed: 0,
        }
    }

    /// Exact gradient-flow solution at time `t` from `start`.
    pub fn exact_flow(&self, start: &DVector<f64>, t: f64) -> DVector<f64> {
        DVector::from_fn(start.len(), |i, _| {
            self.x_star[i] + (-self.diag[i] * t).exp() * (start[i] - self.x_star[i])
        })
    }
}

impl GradientOracle for QuadraticProblem {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x
            .iter()
            .zip(self.x_star.iter())
            .zip(self.diag.iter())
            .map(|((xi, si), di)| di * (xi - si) * (xi - si))
            .sum::<f64>()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (x - &self.x_star).component_mul(&self.diag)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }

    fn known_solution(&self) -> Option<&DVector<f64>> {
        Some(&self.x_star)
    }

    fn convexity(&self) -> Convexity {
        Convexity::Convex
    }

    fn default_start(&self) -> Option<DVector<f64>> {
        Some(self.x0.clone())
    }

    fn as_quadratic(&self) -> Option<&QuadraticProblem> {
        Some(self)
    }
}
