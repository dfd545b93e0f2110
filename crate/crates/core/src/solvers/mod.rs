//! The three iteration loops and the run trace they produce.
//!
//! All three share one recurrence:
//!
//! ```text
//! z^k     = x^k − h_k ∇f(x^k)
//! x^{k+1} = x^k − s_k h_k (∇f(x^k) − β(∇f(x^k) − ∇f(z^k)))
//! ```
//!
//! and differ in how `h_k` (fixed or backtracked) and `s_k` (one, or `η·α_k`)
//! are chosen.

mod line_search;
mod verify;

pub use line_search::{adaptive_initial_step, line_search, LineSearchOutcome};
pub use verify::{verify_trace, VerificationReport};

use std::fmt;
use std::str::FromStr;

use log::warn;
use nalgebra::DVector;

use crate::config::{Algorithm, SolverConfig, StepRule};
use crate::error::{IpcError, Result};
use crate::numerics::{
    alpha_k, contraction_constants, corrected_direction, ipc_step, IterationState,
};
use crate::oracle::{Convexity, GradientOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationStatus {
    Converged,
    MaxIters,
    LineSearchStall,
    ValidationError,
}

impl TerminationStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationStatus::Converged => "converged",
            TerminationStatus::MaxIters => "max-iters",
            TerminationStatus::LineSearchStall => "line-search-stall",
            TerminationStatus::ValidationError => "validation-error",
        }
    }
}

impl fmt::Display for TerminationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TerminationStatus {
    type Err = IpcError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "converged" => Ok(TerminationStatus::Converged),
            "max-iters" => Ok(TerminationStatus::MaxIters),
            "line-search-stall" => Ok(TerminationStatus::LineSearchStall),
            "validation-error" => Ok(TerminationStatus::ValidationError),
            other => Err(IpcError::Format(format!("unknown status '{other}'"))),
        }
    }
}

/// One row of a run trace. The final row of a run records the point where the
/// solver stopped, so its step fields are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub f: f64,
    pub grad_norm: f64,
    pub h_k: Option<f64>,
    pub alpha_k: Option<f64>,
    pub r_k: Option<f64>,
    pub ls_evals: usize,
    /// `‖x^k − x*‖²` when the oracle knows a solution.
    pub dist_sq: Option<f64>,
    /// Trapezoid mode fell back to the configured `η` because `1/α_k ∉ (0,2)`.
    pub eta_fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub status: TerminationStatus,
    pub final_x: DVector<f64>,
    pub total_grad_evals: usize,
}

impl RunTrace {
    /// Number of completed updates `x^k → x^{k+1}`.
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }

    pub fn final_grad_norm(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.grad_norm)
    }

    pub fn converged(&self) -> bool {
        self.status == TerminationStatus::Converged
    }
}

/// Runs the configured algorithm from `x0`.
pub fn solve(
    oracle: &dyn GradientOracle,
    cfg: &SolverConfig,
    x0: &DVector<f64>,
) -> Result<RunTrace> {
    solve_observed(oracle, cfg, x0, |_| {})
}

pub fn solve_ipc_constant(
    oracle: &dyn GradientOracle,
    cfg: &SolverConfig,
    x0: &DVector<f64>,
) -> Result<RunTrace> {
    expect_algorithm(cfg, Algorithm::IpcConstant)?;
    solve(oracle, cfg, x0)
}

pub fn solve_ipc_adaptive(
    oracle: &dyn GradientOracle,
    cfg: &SolverConfig,
    x0: &DVector<f64>,
) -> Result<RunTrace> {
    expect_algorithm(cfg, Algorithm::IpcAdaptive)?;
    solve(oracle, cfg, x0)
}

pub fn solve_convex_ipc(
    oracle: &dyn GradientOracle,
    cfg: &SolverConfig,
    x0: &DVector<f64>,
) -> Result<RunTrace> {
    expect_algorithm(cfg, Algorithm::ConvexIpc)?;
    solve(oracle, cfg, x0)
}

fn expect_algorithm(cfg: &SolverConfig, alg: Algorithm) -> Result<()> {
    if cfg.algorithm != alg {
        return Err(IpcError::Validation(format!(
            "expected a {alg} configuration, got {}",
            cfg.algorithm
        )));
    }
    Ok(())
}

/// Like [`solve`], handing every completed iteration to `observer`.
pub fn solve_observed<F>(
    oracle: &dyn GradientOracle,
    cfg: &SolverConfig,
    x0: &DVector<f64>,
    mut observer: F,
) -> Result<RunTrace>
where
    F: FnMut(&IterationState),
{
    let lipschitz = oracle.lipschitz();
    cfg.validate(lipschitz)?;
    contraction_constants(cfg, oracle)?;
    if x0.len() != oracle.dim() {
        return Err(IpcError::DimensionMismatch {
            expected: oracle.dim(),
            got: x0.len(),
        });
    }
    if cfg.algorithm == Algorithm::ConvexIpc && oracle.convexity() != Convexity::Convex {
        warn!(
            "convex-ipc applied to a {} oracle; guarantees do not apply",
            oracle.convexity().as_str()
        );
    }

    let x_star = oracle.known_solution();
    let mut gamma0 = cfg.step.line_search().map_or(0.0, |p| p.gamma0_init);
    let mut records = Vec::new();
    let mut total_grad_evals = 0;
    let mut x = x0.clone();
    let mut k = 0;

    let status = loop {
        oracle
            .check_domain(&x)
            .map_err(|detail| IpcError::DomainViolation { k, detail })?;
        let (f, grad_x) = oracle.value_and_gradient(&x);
        total_grad_evals += 1;
        let grad_norm = grad_x.norm();
        if !grad_norm.is_finite() {
            return Err(IpcError::Internal(format!("non-finite gradient at k={k}")));
        }
        let dist_sq = x_star.map(|s| (&x - s).norm_squared());
        let mut record = IterationRecord {
            k,
            f,
            grad_norm,
            h_k: None,
            alpha_k: None,
            r_k: None,
            ls_evals: 0,
            dist_sq,
            eta_fallback: false,
        };

        if grad_norm < cfg.epsilon {
            records.push(record);
            break TerminationStatus::Converged;
        }
        if k >= cfg.max_iters {
            records.push(record);
            break TerminationStatus::MaxIters;
        }

        // prediction
        let (h, z, grad_z, r, ls_evals) = match &cfg.step {
            StepRule::Constant(h) => {
                let z = &x - &grad_x * *h;
                let grad_z = oracle.gradient(&z);
                total_grad_evals += 1;
                let dz = (&z - &x).norm();
                if dz == 0.0 {
                    return Err(IpcError::Internal(format!(
                        "prediction step did not move at k={k}"
                    )));
                }
                let r = h * (&grad_z - &grad_x).norm() / dz;
                (*h, z, grad_z, r, 0)
            }
            StepRule::Adaptive(p) => match line_search(&x, &grad_x, gamma0, p, oracle) {
                Ok(out) => {
                    total_grad_evals += out.evals;
                    (out.h_k, out.z, out.grad_z, out.r_k, out.evals)
                }
                Err(IpcError::LineSearchStall { evals, last_step }) => {
                    total_grad_evals += evals;
                    record.ls_evals = evals;
                    records.push(record);
                    warn!("line search stalled at k={k} after {evals} evaluations (step {last_step:e})");
                    break TerminationStatus::LineSearchStall;
                }
                Err(e) => return Err(e),
            },
        };

        // correction
        let mut eta_fallback = false;
        let (alpha, scale) = match cfg.algorithm {
            Algorithm::IpcConstant | Algorithm::IpcAdaptive => (None, 1.0),
            Algorithm::ConvexIpc => {
                // ConvexIpc validation guarantees a Lipschitz constant
                let l = lipschitz.unwrap_or(f64::NAN);
                let a = alpha_k(&x, &z, &grad_x, &grad_z, h, cfg.beta, l)?;
                if !(a > 0.0 && a.is_finite()) {
                    return Err(IpcError::Internal(format!(
                        "alpha_k = {a:e} at k={k}; the oracle is not convex with the stated Lipschitz constant"
                    )));
                }
                let eta = if cfg.trapezoid_mode {
                    let eta_k = 1.0 / a;
                    if eta_k > 0.0 && eta_k < 2.0 {
                        eta_k
                    } else {
                        eta_fallback = true;
                        cfg.eta
                    }
                } else {
                    cfg.eta
                };
                (Some(a), eta * a)
            }
        };
        let x_next = ipc_step(&x, &grad_x, &grad_z, h, cfg.beta, scale)?;

        record.h_k = Some(h);
        record.r_k = Some(r);
        record.alpha_k = alpha;
        record.ls_evals = ls_evals;
        record.eta_fallback = eta_fallback;
        records.push(record);

        let state = IterationState {
            k,
            d_k: corrected_direction(&grad_x, &grad_z, cfg.beta) * h,
            x,
            z,
            grad_x,
            grad_z,
            h_k: h,
            r_k: r,
            alpha_k: alpha,
            ls_evals,
            x_next,
        };
        observer(&state);

        if let StepRule::Adaptive(p) = &cfg.step {
            gamma0 = adaptive_initial_step(h, r, p);
        }
        x = state.x_next;
        k += 1;
    };

    Ok(RunTrace {
        records,
        status,
        final_x: x,
        total_grad_evals,
    })
}
