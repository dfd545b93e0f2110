//! Solver configuration and its admissibility checks.

use std::fmt;
use std::str::FromStr;

use crate::error::{IpcError, Result};
use crate::numerics::{beta_lower_bound_adaptive, beta_lower_bound_constant};

pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;
pub const DEFAULT_LS_MAX_EVALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Constant step `0 < h < 1/L`, pseudo-convex objectives.
    IpcConstant,
    /// Backtracking step, pseudo-convex objectives, no Lipschitz constant needed.
    IpcAdaptive,
    /// Backtracking prediction step with a computed correction length `η·α_k`.
    ConvexIpc,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::IpcConstant => "ipc-constant",
            Algorithm::IpcAdaptive => "ipc-adaptive",
            Algorithm::ConvexIpc => "convex-ipc",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = IpcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ipc-constant" | "ipc-c" | "constant" => Ok(Algorithm::IpcConstant),
            "ipc-adaptive" | "ipc-a" | "adaptive" => Ok(Algorithm::IpcAdaptive),
            "convex-ipc" | "convex" => Ok(Algorithm::ConvexIpc),
            other => Err(IpcError::Validation(format!(
                "unknown algorithm '{other}' (expected ipc-constant, ipc-adaptive or convex-ipc)"
            ))),
        }
    }
}

/// Parameters of the backtracking line search and the adaptive initial step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchParams {
    /// Expansion threshold: the next initial trial grows when `r_k ≤ mu`.
    pub mu: f64,
    /// Acceptance threshold on the local Lipschitz ratio `r_k`.
    pub nu: f64,
    /// Backtracking factor in `(0, 1)`.
    pub theta: f64,
    /// Expansion factor `> 1`.
    pub tau: f64,
    pub gamma0_init: f64,
    pub h_lo: f64,
    pub h_hi: f64,
    /// Gradient evaluations allowed per line search before giving up.
    pub max_evals: usize,
}

impl LineSearchParams {
    /// Checks the conditions shared by both line-search algorithms.
    pub fn validate(&self) -> Result<()> {
        let p = self;
        let all = [p.mu, p.nu, p.theta, p.tau, p.gamma0_init, p.h_lo, p.h_hi];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(IpcError::Validation(
                "line-search parameters must be finite".into(),
            ));
        }
        if !(0.0 < p.mu && p.mu < p.nu && p.nu < 1.0) {
            return Err(IpcError::Validation(format!(
                "line search requires 0 < mu < nu < 1 (mu={}, nu={})",
                p.mu, p.nu
            )));
        }
        if !(0.0 < p.theta && p.theta < 1.0) {
            return Err(IpcError::Validation(format!(
                "theta must lie in (0,1), got {}",
                p.theta
            )));
        }
        if p.tau <= 1.0 {
            return Err(IpcError::Validation(format!(
                "tau must exceed 1, got {}",
                p.tau
            )));
        }
        if !(0.0 < p.h_lo && p.h_lo < 1.0) {
            return Err(IpcError::Validation(format!(
                "h_lo must lie in (0,1), got {}",
                p.h_lo
            )));
        }
        if !(p.h_lo <= p.gamma0_init && p.gamma0_init <= p.h_hi) {
            return Err(IpcError::Validation(format!(
                "line search requires h_lo <= gamma0 <= h_hi (h_lo={}, gamma0={}, h_hi={})",
                p.h_lo, p.gamma0_init, p.h_hi
            )));
        }
        if p.max_evals == 0 {
            return Err(IpcError::Validation(
                "line-search evaluation cap must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Constant(f64),
    Adaptive(LineSearchParams),
}

impl StepRule {
    /// Largest step the rule can produce.
    pub fn h_max(&self) -> f64 {
        match self {
            StepRule::Constant(h) => *h,
            StepRule::Adaptive(p) => p.h_hi,
        }
    }

    pub fn line_search(&self) -> Option<&LineSearchParams> {
        match self {
            StepRule::Constant(_) => None,
            StepRule::Adaptive(p) => Some(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Adjustment coefficient on `∇f(x) − ∇f(z)`.
    pub beta: f64,
    /// Relaxation of the correction length; [`Algorithm::ConvexIpc`] only.
    pub eta: f64,
    pub step: StepRule,
    /// Stop once `‖∇f(x^k)‖ < epsilon`.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Use `η = 1/α_k` per iteration so the correction length is one.
    pub trapezoid_mode: bool,
}

impl SolverConfig {
    pub fn ipc_constant(h: f64, beta: f64) -> Self {
        Self {
            algorithm: Algorithm::IpcConstant,
            beta,
            eta: 1.0,
            step: StepRule::Constant(h),
            epsilon: DEFAULT_EPSILON,
            max_iters: DEFAULT_MAX_ITERS,
            trapezoid_mode: false,
        }
    }

    pub fn ipc_adaptive(params: LineSearchParams, beta: f64) -> Self {
        Self {
            algorithm: Algorithm::IpcAdaptive,
            step: StepRule::Adaptive(params),
            ..Self::ipc_constant(1.0, beta)
        }
    }

    pub fn convex_ipc(step: StepRule, beta: f64, eta: f64) -> Self {
        Self {
            algorithm: Algorithm::ConvexIpc,
            eta,
            step,
            ..Self::ipc_constant(1.0, beta)
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_trapezoid_mode(mut self, on: bool) -> Self {
        self.trapezoid_mode = on;
        self
    }

    /// Admissible range of `beta` as `(low, open_low, high)`; `open_low` marks
    /// a strict lower bound.
    pub fn beta_range(&self, lipschitz: Option<f64>) -> Result<(f64, bool, f64)> {
        match (self.algorithm, &self.step) {
            (Algorithm::IpcConstant, StepRule::Constant(h)) => {
                let l = require_lipschitz(lipschitz, self.algorithm)?;
                Ok((beta_lower_bound_constant(*h, l)?, true, 1.0))
            }
            (Algorithm::IpcAdaptive, StepRule::Adaptive(p)) => {
                Ok((beta_lower_bound_adaptive(p.nu)?, true, 1.0))
            }
            (Algorithm::ConvexIpc, _) => Ok((0.0, false, 1.0)),
            (alg, _) => Err(IpcError::Validation(format!(
                "{alg} does not accept this step rule"
            ))),
        }
    }

    /// Checks every admissibility condition of the configured algorithm.
    /// `lipschitz` is the oracle's global constant, if known.
    pub fn validate(&self, lipschitz: Option<f64>) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(IpcError::Validation(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iters == 0 {
            return Err(IpcError::Validation("max_iters must be positive".into()));
        }
        if !self.beta.is_finite() {
            return Err(IpcError::Validation("beta must be finite".into()));
        }
        if self.trapezoid_mode && self.algorithm != Algorithm::ConvexIpc {
            return Err(IpcError::Validation(
                "trapezoid mode applies to convex-ipc only".into(),
            ));
        }
        if let Some(l) = lipschitz {
            if !(l > 0.0 && l.is_finite()) {
                return Err(IpcError::Validation(format!(
                    "Lipschitz constant must be positive, got {l}"
                )));
            }
        }

        match (self.algorithm, &self.step) {
            (Algorithm::IpcConstant, StepRule::Constant(h)) => {
                let l = require_lipschitz(lipschitz, self.algorithm)?;
                if !(*h > 0.0 && h * l < 1.0) {
                    return Err(IpcError::Validation(format!(
                        "ipc-constant requires 0 < h < 1/L (h={h}, L={l})"
                    )));
                }
            }
            (Algorithm::IpcAdaptive, StepRule::Adaptive(p)) => {
                p.validate()?;
                if p.gamma0_init < 1.0 {
                    return Err(IpcError::Validation(format!(
                        "ipc-adaptive requires h_lo < 1 <= gamma0 (gamma0={})",
                        p.gamma0_init
                    )));
                }
            }
            (Algorithm::ConvexIpc, step) => {
                let l = require_lipschitz(lipschitz, self.algorithm)?;
                if !(self.eta > 0.0 && self.eta < 2.0) {
                    return Err(IpcError::Validation(format!(
                        "eta must lie in (0,2), got {}",
                        self.eta
                    )));
                }
                if let StepRule::Adaptive(p) = step {
                    p.validate()?;
                }
                let h_max = step.h_max();
                if !(h_max > 0.0 && h_max * l < 4.0) {
                    return Err(IpcError::Validation(format!(
                        "convex-ipc requires the largest step below 4/L (h_max={h_max}, 4/L={})",
                        4.0 / l
                    )));
                }
            }
            (alg, StepRule::Constant(_)) => {
                return Err(IpcError::Validation(format!(
                    "{alg} needs a line search, not a constant step"
                )))
            }
            (alg, StepRule::Adaptive(_)) => {
                return Err(IpcError::Validation(format!(
                    "{alg} needs a constant step, not a line search"
                )))
            }
        }

        let (lo, open, hi) = self.beta_range(lipschitz)?;
        let below = if open {
            self.beta <= lo
        } else {
            self.beta < lo
        };
        if below || self.beta > hi {
            let left = if open { '(' } else { '[' };
            return Err(IpcError::Validation(format!(
                "beta={} outside the admissible range {left}{lo:.4}, {hi}] for {}",
                self.beta, self.algorithm
            )));
        }
        Ok(())
    }
}

fn require_lipschitz(lipschitz: Option<f64>, alg: Algorithm) -> Result<f64> {
    lipschitz
        .ok_or_else(|| IpcError::Validation(format!("{alg} requires a known Lipschitz constant")))
}
