//! Prediction-correction first-order methods with a tunable adjustment
//! coefficient `β`.
//!
//! Each iteration predicts with a gradient step `z^k = x^k − h_k∇f(x^k)` and
//! corrects along `∇f(x^k) − β(∇f(x^k) − ∇f(z^k))`. `β = 0` is gradient
//! descent, `β = 1` the extra-gradient step and `β = ½` the explicit
//! trapezoidal discretization of the gradient flow.
//!
//! - [`numerics`]: admissible `β` ranges, contraction constants, the step and `α_k`.
//! - [`solvers`]: constant-step, line-search and convex variants, plus trace verification.
//! - [`problems`]: seeded benchmark oracles and their binary file format.
//! - [`gradient_flow`]: flow discretizations and error-order estimation.

pub mod config;
pub mod error;
pub mod gradient_flow;
pub mod numerics;
pub mod oracle;
pub mod problems;
pub mod solvers;

pub use config::{Algorithm, LineSearchParams, SolverConfig, StepRule};
pub use error::{IpcError, Result};
pub use oracle::{finite_difference_grad, Convexity, FnOracle, GradientOracle};
pub use solvers::{
    solve, verify_trace, IterationRecord, RunTrace, TerminationStatus, VerificationReport,
};
