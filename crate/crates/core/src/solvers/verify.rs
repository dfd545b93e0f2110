use crate::config::{Algorithm, SolverConfig};
use crate::error::{IpcError, Result};
use crate::numerics::contraction_constants;
use crate::oracle::GradientOracle;

use super::RunTrace;

/// Slack allowed in the Fejér check, relative to `‖x⁰ − x*‖²`.
pub const FEJER_SLACK: f64 = 1e-10;

/// Outcome of replaying a trace against the descent and rate guarantees.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// `‖x^{k+1}−x*‖² ≤ ‖x^k−x*‖² − κ‖x^k−z^k‖²` at every step.
    pub fejer_ok: bool,
    /// Running mean of `‖∇f(x^k)‖²` stays below `‖x⁰−x*‖² / (K·κ·h²)`.
    pub ergodic_ok: bool,
    /// Every step is at least `h_min`.
    pub h_floor_ok: bool,
    /// Every `α_k ≥ α_min`; `None` outside convex-ipc.
    pub alpha_floor_ok: Option<bool>,
    pub kappa: f64,
    pub h_min: f64,
    pub alpha_min: Option<f64>,
    /// Largest observed `lhs − rhs` of the Fejér inequality.
    pub worst_fejer_excess: f64,
    pub fejer_violations: Vec<usize>,
    pub h_floor_violations: Vec<usize>,
    pub alpha_floor_violations: Vec<usize>,
}

impl VerificationReport {
    pub fn all_ok(&self) -> bool {
        self.fejer_ok && self.ergodic_ok && self.h_floor_ok && self.alpha_floor_ok.unwrap_or(true)
    }
}

/// Checks a finished trace against the guarantees for its configuration.
///
/// Everything is recomputed from stored scalars: `‖x^k − z^k‖ = h_k‖∇f(x^k)‖`
/// because the prediction is a plain gradient step.
pub fn verify_trace(
    trace: &RunTrace,
    oracle: &dyn GradientOracle,
    cfg: &SolverConfig,
) -> Result<VerificationReport> {
    if oracle.known_solution().is_none() {
        return Err(IpcError::MissingSolution);
    }
    let consts = contraction_constants(cfg, oracle)?;
    let kappa = consts
        .fejer_kappa(cfg.algorithm)
        .ok_or_else(|| IpcError::Validation("contraction constant unavailable".into()))?;
    let h_min = consts
        .h_min
        .ok_or_else(|| IpcError::Validation("h_min needs a Lipschitz constant".into()))?;
    let dists: Vec<f64> = trace
        .records
        .iter()
        .map(|r| {
            r.dist_sq.ok_or_else(|| {
                IpcError::Validation(format!("record {} has no distance to x*", r.k))
            })
        })
        .collect::<Result<_>>()?;
    let dist0 = dists.first().copied().unwrap_or(0.0);
    let slack = FEJER_SLACK * dist0;

    // per-iteration κ for trapezoid steps, where η_k = 1/α_k
    let step_kappa = |alpha: Option<f64>, fallback: bool| -> f64 {
        match (
            cfg.algorithm,
            cfg.trapezoid_mode,
            alpha,
            consts.alpha_min,
            consts.kappa3,
        ) {
            (Algorithm::ConvexIpc, true, Some(a), Some(am), Some(k3)) if !fallback => {
                let eta = 1.0 / a;
                eta * (2.0 - eta) * am * k3
            }
            _ => kappa,
        }
    };

    let mut report = VerificationReport {
        fejer_ok: true,
        ergodic_ok: true,
        h_floor_ok: true,
        alpha_floor_ok: None,
        kappa,
        h_min,
        alpha_min: consts.alpha_min,
        worst_fejer_excess: f64::NEG_INFINITY,
        fejer_violations: Vec::new(),
        h_floor_violations: Vec::new(),
        alpha_floor_violations: Vec::new(),
    };
    if cfg.algorithm == Algorithm::ConvexIpc {
        report.alpha_floor_ok = Some(true);
    }

    let mut grad_sq_sum = 0.0;
    let mut ergodic_kappa = kappa;
    for (i, rec) in trace.records.iter().enumerate() {
        let Some(h) = rec.h_k else { continue };
        let Some(&next) = dists.get(i + 1) else {
            continue;
        };

        let xz_sq = (h * rec.grad_norm).powi(2);
        let kap = step_kappa(rec.alpha_k, rec.eta_fallback);
        let excess = next - (dists[i] - kap * xz_sq);
        report.worst_fejer_excess = report.worst_fejer_excess.max(excess);
        if excess > slack {
            report.fejer_ok = false;
            report.fejer_violations.push(rec.k);
        }

        if h < h_min {
            report.h_floor_ok = false;
            report.h_floor_violations.push(rec.k);
        }

        if let (Some(ok), Some(a), Some(am)) = (
            report.alpha_floor_ok.as_mut(),
            rec.alpha_k,
            consts.alpha_min,
        ) {
            if a < am {
                *ok = false;
                report.alpha_floor_violations.push(rec.k);
            }
        }

        // K = i + 1 terms; the bound uses the smallest κ seen so far
        ergodic_kappa = ergodic_kappa.min(kap);
        grad_sq_sum += rec.grad_norm * rec.grad_norm;
        let big_k = (i + 1) as f64;
        let mean = grad_sq_sum / big_k;
        let bound = dist0 / (big_k * ergodic_kappa * h_min * h_min);
        if mean > bound * (1.0 + 1e-12) {
            report.ergodic_ok = false;
        }
    }
    Ok(report)
}
