//! Closed-form pieces of the prediction-correction methods: admissible ranges
//! for `beta`, the contraction constants, the corrected step and `α_k`.
//!
//! Nothing in here iterates. Every function is a pure map from its inputs.

use nalgebra::DVector;

use crate::config::{Algorithm, SolverConfig, StepRule};
use crate::error::{IpcError, Result};
use crate::oracle::GradientOracle;

/// `(1 − √(1 − s)) / s` for `s ∈ (0, 1)`, evaluated as `1 / (1 + √(1 − s))`
/// so that small `s` does not cancel.
fn lower_root(s: f64) -> f64 {
    1.0 / (1.0 + (1.0 - s).sqrt())
}

/// Smallest admissible `beta` (exclusive) for the constant-step method:
/// `(1 − √(1 − h²L²)) / (h²L²)`.
pub fn beta_lower_bound_constant(h: f64, lipschitz: f64) -> Result<f64> {
    let hl = h * lipschitz;
    if !(hl > 0.0 && hl < 1.0) || lipschitz <= 0.0 {
        return Err(IpcError::Domain(format!(
            "need 0 < h·L < 1, got h={h}, L={lipschitz}"
        )));
    }
    Ok(lower_root(hl * hl))
}

/// Smallest admissible `beta` (exclusive) for the line-search method:
/// `(1 − √(1 − ν²)) / ν²`.
pub fn beta_lower_bound_adaptive(nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(IpcError::Domain(format!("need 0 < nu < 1, got {nu}")));
    }
    Ok(lower_root(nu * nu))
}

pub fn kappa1(beta: f64, h: f64, lipschitz: f64) -> f64 {
    let hl = h * lipschitz;
    2.0 * beta - 1.0 - beta * beta * hl * hl
}

pub fn kappa2(beta: f64, nu: f64) -> f64 {
    2.0 * beta - 1.0 - beta * beta * nu * nu
}

/// `(1 − β)(1 − L·h/4) + β(1 − ν)`.
pub fn kappa3(beta: f64, nu: f64, h: f64, lipschitz: f64) -> f64 {
    (1.0 - beta) * (1.0 - lipschitz * h / 4.0) + beta * (1.0 - nu)
}

pub fn alpha_min(beta: f64, nu: f64, h_max: f64, lipschitz: f64) -> f64 {
    kappa3(beta, nu, h_max, lipschitz) / (2.0 + 2.0 * beta * beta * nu * nu)
}

pub fn kappa4(beta: f64, nu: f64, eta: f64, h_max: f64, lipschitz: f64) -> f64 {
    eta * (2.0 - eta) * alpha_min(beta, nu, h_max, lipschitz) * kappa3(beta, nu, h_max, lipschitz)
}

/// Guaranteed floor on accepted line-search steps.
///
/// With `L' = max(L, 1)` this is `min{h_lo, νθ / (L'·max(1, h_hi·L'))}`, which
/// reduces to `min{h_lo, νθ/(h_hi·L'²)}` whenever `h_hi·L' ≥ 1`.
pub fn h_min(h_lo: f64, nu: f64, theta: f64, h_hi: f64, lipschitz: f64) -> f64 {
    let l = lipschitz.max(1.0);
    h_lo.min(nu * theta / (l * (h_hi * l).max(1.0)))
}

/// Constants appearing in the descent and rate guarantees. Entries that need
/// a Lipschitz constant or line-search parameters the configuration does not
/// have are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionConstants {
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
    pub kappa3: Option<f64>,
    pub kappa4: Option<f64>,
    pub alpha_min: Option<f64>,
    pub h_min: Option<f64>,
    pub beta_lo: f64,
    pub beta_hi: f64,
}

impl ContractionConstants {
    /// The constant in `‖x^{k+1}−x*‖² ≤ ‖x^k−x*‖² − κ‖x^k−z^k‖²` for `alg`.
    pub fn fejer_kappa(&self, alg: Algorithm) -> Option<f64> {
        match alg {
            Algorithm::IpcConstant => self.kappa1,
            Algorithm::IpcAdaptive => self.kappa2,
            Algorithm::ConvexIpc => self.kappa4,
        }
    }
}

/// Ratio bound `ν` in force for `step`: the line-search threshold, or `h·L`
/// for a fixed step (since `h‖∇f(z)−∇f(x)‖ ≤ hL‖z−x‖`).
fn effective_nu(step: &StepRule, lipschitz: Option<f64>) -> Option<f64> {
    match step {
        StepRule::Adaptive(p) => Some(p.nu),
        StepRule::Constant(h) => lipschitz.map(|l| h * l),
    }
}

pub fn contraction_constants(
    cfg: &SolverConfig,
    oracle: &dyn GradientOracle,
) -> Result<ContractionConstants> {
    let lip = oracle.lipschitz();
    let beta = cfg.beta;
    let h_max = cfg.step.h_max();
    let nu = effective_nu(&cfg.step, lip);

    let kappa1 = match (cfg.step, lip) {
        (StepRule::Constant(h), Some(l)) => Some(kappa1(beta, h, l)),
        _ => None,
    };
    let kappa2 = cfg.step.line_search().map(|p| kappa2(beta, p.nu));
    let (kappa3, alpha_min, kappa4) = match (lip, nu) {
        (Some(l), Some(nu)) => (
            Some(kappa3(beta, nu, h_max, l)),
            Some(alpha_min(beta, nu, h_max, l)),
            Some(kappa4(beta, nu, cfg.eta, h_max, l)),
        ),
        _ => (None, None, None),
    };
    let h_min = match (cfg.step, lip) {
        (StepRule::Constant(h), _) => Some(h),
        (StepRule::Adaptive(p), Some(l)) => Some(h_min(p.h_lo, p.nu, p.theta, p.h_hi, l)),
        (StepRule::Adaptive(_), None) => None,
    };
    let (beta_lo, _, beta_hi) = cfg.beta_range(lip)?;

    let consts = ContractionConstants {
        kappa1,
        kappa2,
        kappa3,
        kappa4,
        alpha_min,
        h_min,
        beta_lo,
        beta_hi,
    };

    let (name, inequality, value) = match cfg.algorithm {
        Algorithm::IpcConstant => ("kappa1", "2β − 1 − β²h²L² > 0", consts.kappa1),
        Algorithm::IpcAdaptive => ("kappa2", "2β − 1 − β²ν² > 0", consts.kappa2),
        Algorithm::ConvexIpc => ("kappa4", "η(2 − η)·α_min·κ3 > 0", consts.kappa4),
    };
    match value {
        Some(v) if v > 0.0 && v.is_finite() => Ok(consts),
        Some(v) => Err(IpcError::Validation(format!(
            "{name} = {v:e} violates {inequality}"
        ))),
        None => Err(IpcError::Validation(format!(
            "{name} is undefined for this configuration (missing Lipschitz constant or line search)"
        ))),
    }
}

fn check_len(expected: usize, v: &DVector<f64>) -> Result<()> {
    if v.len() != expected {
        return Err(IpcError::DimensionMismatch {
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

/// Corrected direction `∇f(x) − β(∇f(x) − ∇f(z))`, evaluated as
/// `(1−β)∇f(x) + β∇f(z)` so that `β = 0` and `β = 1` give `∇f(x)` and
/// `∇f(z)` exactly.
pub fn corrected_direction(
    grad_x: &DVector<f64>,
    grad_z: &DVector<f64>,
    beta: f64,
) -> DVector<f64> {
    grad_x.zip_map(grad_z, |gx, gz| mix(gx, gz, beta))
}

#[inline]
fn mix(gx: f64, gz: f64, beta: f64) -> f64 {
    (1.0 - beta) * gx + beta * gz
}

/// Left-to-right sum of products; fixed order keeps results reproducible.
fn dot(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc + x * y)
}

/// `x − scale·h·(∇f(x) − β(∇f(x) − ∇f(z)))`.
///
/// `scale` is one for the pseudo-convex methods and `η·α_k` for the convex one.
pub fn ipc_step(
    x: &DVector<f64>,
    grad_x: &DVector<f64>,
    grad_z: &DVector<f64>,
    h: f64,
    beta: f64,
    scale: f64,
) -> Result<DVector<f64>> {
    check_len(x.len(), grad_x)?;
    check_len(x.len(), grad_z)?;
    let s = scale * h;
    Ok(DVector::from_fn(x.len(), |i, _| {
        x[i] - s * mix(grad_x[i], grad_z[i], beta)
    }))
}

/// Correction length of the convex method:
///
/// ```text
///        (1−β)(1 − L·h/4)‖x−z‖² + β⟨x−z, h∇f(z)⟩
/// α = ───────────────────────────────────────────
///           h²‖∇f(x) − β(∇f(x) − ∇f(z))‖²
/// ```
pub fn alpha_k(
    x: &DVector<f64>,
    z: &DVector<f64>,
    grad_x: &DVector<f64>,
    grad_z: &DVector<f64>,
    h: f64,
    beta: f64,
    lipschitz: f64,
) -> Result<f64> {
    let n = x.len();
    check_len(n, z)?;
    check_len(n, grad_x)?;
    check_len(n, grad_z)?;
    let xz = x - z;
    let xz_sq = dot(&xz, &xz);
    if xz_sq == 0.0 {
        return Err(IpcError::StationaryPoint(
            "x^k = z^k, the correction length is 0/0".into(),
        ));
    }
    let num = (1.0 - beta) * (1.0 - lipschitz * h / 4.0) * xz_sq + beta * dot(&xz, &(grad_z * h));
    let d = corrected_direction(grad_x, grad_z, beta);
    let den = h * h * dot(&d, &d);
    if den == 0.0 {
        return Err(IpcError::Internal(
            "corrected direction vanished while x^k ≠ z^k".into(),
        ));
    }
    Ok(num / den)
}

/// Everything computed during one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub k: usize,
    pub x: DVector<f64>,
    pub z: DVector<f64>,
    pub grad_x: DVector<f64>,
    pub grad_z: DVector<f64>,
    pub h_k: f64,
    /// Line-search ratio at the accepted step.
    pub r_k: f64,
    pub alpha_k: Option<f64>,
    /// Gradient evaluations spent in the line search (zero for a fixed step).
    pub ls_evals: usize,
    /// `h_k(∇f(x) − β(∇f(x) − ∇f(z)))`.
    pub d_k: DVector<f64>,
    /// Next iterate.
    pub x_next: DVector<f64>,
}
