//! Benchmark oracles: the pseudo-convex fractional program, the monotone
//! arctan-quadratic operator, and diagonal quadratics with known minimizers.
//!
//! Every generator is a pure function of `(n, seed)`.

mod arctan;
mod file;
mod fractional;
mod quadratic;
pub mod rng;

pub use arctan::{make_arctan_quadratic, spectral_norm, ArctanQuadraticProblem};
pub use file::{ProblemFile, Section, FORMAT_VERSION, MAGIC};
pub use fractional::{make_fractional, FractionalProblem};
pub use quadratic::{make_quadratic, QuadraticProblem};

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::IpcError;
use crate::oracle::{Convexity, GradientOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Fractional,
    ArctanQuadratic,
    Quadratic,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Fractional => "fractional",
            ProblemKind::ArctanQuadratic => "arctan-quadratic",
            ProblemKind::Quadratic => "quadratic",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = IpcError;
    fn from_str(s: &str) -> Result<Self, IpcError> {
        match s.to_ascii_lowercase().as_str() {
            "fractional" | "exp1" => Ok(ProblemKind::Fractional),
            "arctan-quadratic" | "arctan" | "exp2" => Ok(ProblemKind::ArctanQuadratic),
            "quadratic" => Ok(ProblemKind::Quadratic),
            other => Err(IpcError::Validation(format!(
                "unknown problem '{other}' (expected fractional, arctan-quadratic or quadratic)"
            ))),
        }
    }
}

/// Any shipped oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Fractional(FractionalProblem),
    ArctanQuadratic(ArctanQuadraticProblem),
    Quadratic(QuadraticProblem),
}

impl Problem {
    /// `cond` is only used by [`ProblemKind::Quadratic`].
    pub fn generate(kind: ProblemKind, n: usize, seed: u64, cond: f64) -> Self {
        match kind {
            ProblemKind::Fractional => Problem::Fractional(make_fractional(n, seed)),
            ProblemKind::ArctanQuadratic => {
                Problem::ArctanQuadratic(make_arctan_quadratic(n, seed))
            }
            ProblemKind::Quadratic => Problem::Quadratic(make_quadratic(n, cond, seed)),
        }
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            Problem::Fractional(_) => ProblemKind::Fractional,
            Problem::ArctanQuadratic(_) => ProblemKind::ArctanQuadratic,
            Problem::Quadratic(_) => ProblemKind::Quadratic,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Problem::Fractional(p) => p.seed,
            Problem::ArctanQuadratic(p) => p.seed,
            Problem::Quadratic(p) => p.seed,
        }
    }

    pub fn oracle(&self) -> &dyn GradientOracle {
        match self {
            Problem::Fractional(p) => p,
            Problem::ArctanQuadratic(p) => p,
            Problem::Quadratic(p) => p,
        }
    }
}

impl GradientOracle for Problem {
    fn dim(&self) -> usize {
        self.oracle().dim()
    }
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.oracle().value(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.oracle().gradient(x)
    }
    fn value_and_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        self.oracle().value_and_gradient(x)
    }
    fn lipschitz(&self) -> Option<f64> {
        self.oracle().lipschitz()
    }
    fn known_solution(&self) -> Option<&DVector<f64>> {
        self.oracle().known_solution()
    }
    fn convexity(&self) -> Convexity {
        self.oracle().convexity()
    }
    fn default_start(&self) -> Option<DVector<f64>> {
        self.oracle().default_start()
    }
    fn check_domain(&self, x: &DVector<f64>) -> Result<(), String> {
        self.oracle().check_domain(x)
    }
    fn as_quadratic(&self) -> Option<&QuadraticProblem> {
        self.oracle().as_quadratic()
    }
}
