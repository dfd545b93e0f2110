//! First-order oracles: the objective, its gradient and what is known about it.

use nalgebra::DVector;

use crate::problems::QuadraticProblem;

/// What the oracle promises about the objective's curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convexity {
    Convex,
    PseudoConvex,
    Unknown,
}

impl Convexity {
    pub fn as_str(self) -> &'static str {
        match self {
            Convexity::Convex => "convex",
            Convexity::PseudoConvex => "pseudo-convex",
            Convexity::Unknown => "unknown",
        }
    }
}

/// Evaluates `f` and `∇f` on `R^dim`.
///
/// Implementations must be immutable and usable from several solver runs at
/// once; every generator in [`crate::problems`] satisfies this.
pub trait GradientOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &DVector<f64>) -> f64;

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Both at once. Oracles that share work between `f` and `∇f` override this.
    fn value_and_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        (self.value(x), self.gradient(x))
    }

    /// Global Lipschitz constant of the gradient, when known.
    fn lipschitz(&self) -> Option<f64> {
        None
    }

    /// A stationary point, when known analytically.
    fn known_solution(&self) -> Option<&DVector<f64>> {
        None
    }

    fn convexity(&self) -> Convexity {
        Convexity::Unknown
    }

    /// Generator-provided starting point.
    fn default_start(&self) -> Option<DVector<f64>> {
        None
    }

    /// Checks that `x` lies where the objective is defined. Solvers call this on
    /// every iterate and abort with the returned diagnostic on failure.
    fn check_domain(&self, _x: &DVector<f64>) -> Result<(), String> {
        Ok(())
    }

    /// The diagonal quadratic behind this oracle, if it is one. Used where a
    /// closed-form gradient flow is required.
    fn as_quadratic(&self) -> Option<&QuadraticProblem> {
        None
    }
}

type ValueFn = dyn Fn(&DVector<f64>) -> f64 + Send + Sync;
type GradFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;

/// Oracle built from a pair of closures.
pub struct FnOracle {
    dim: usize,
    value: Box<ValueFn>,
    grad: Box<GradFn>,
    lipschitz: Option<f64>,
    solution: Option<DVector<f64>>,
    convexity: Convexity,
}

impl FnOracle {
    pub fn new<F, G>(dim: usize, value: F, grad: G) -> Self
    where
        F: Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        G: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            value: Box::new(value),
            grad: Box::new(grad),
            lipschitz: None,
            solution: None,
            convexity: Convexity::Unknown,
        }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn with_solution(mut self, x_star: DVector<f64>) -> Self {
        self.solution = Some(x_star);
        self
    }

    pub fn with_convexity(mut self, c: Convexity) -> Self {
        self.convexity = c;
        self
    }
}

impl GradientOracle for FnOracle {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.grad)(x)
    }
    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
    fn known_solution(&self) -> Option<&DVector<f64>> {
        self.solution.as_ref()
    }
    fn convexity(&self) -> Convexity {
        self.convexity
    }
}

/// Central-difference estimate of `∇f(x)`, one coordinate at a time.
pub fn finite_difference_grad(
    oracle: &dyn GradientOracle,
    x: &DVector<f64>,
    step: f64,
) -> DVector<f64> {
    let mut probe = x.clone();
    DVector::from_fn(x.len(), |i, _| {
        let xi = x[i];
        probe[i] = xi + step;
        let fp = oracle.value(&probe);
        probe[i] = xi - step;
        let fm = oracle.value(&probe);
        probe[i] = xi;
        (fp - fm) / (2.0 * step)
    })
}

/// `‖a − b‖ / max(‖b‖, 1e-300)`.
pub fn relative_error(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
