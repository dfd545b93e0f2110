use nalgebra::DVector;

use crate::config::LineSearchParams;
use crate::error::{IpcError, Result};
use crate::oracle::GradientOracle;

/// Accepted trial of the backtracking search.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome {
    pub h_k: f64,
    pub z: DVector<f64>,
    pub grad_z: DVector<f64>,
    /// `h_k‖∇f(z) − ∇f(x)‖ / ‖z − x‖` at the accepted step, `≤ ν`.
    pub r_k: f64,
    /// Gradient evaluations, including the accepted trial.
    pub evals: usize,
}

/// Backtracks from `gamma0` until the local Lipschitz ratio
/// `r(γ) = γ‖∇f(z(γ)) − ∇f(x)‖ / ‖z(γ) − x‖`, with `z(γ) = x − γ∇f(x)`,
/// drops to `ν`. A rejected trial shrinks to `γθ·min{1, 1/r(γ)}`.
///
/// The last accepted trial's gradient is `∇f(z^k)`, so callers never
/// re-evaluate it.
pub fn line_search(
    x: &DVector<f64>,
    grad_x: &DVector<f64>,
    gamma0: f64,
    params: &LineSearchParams,
    oracle: &dyn GradientOracle,
) -> Result<LineSearchOutcome> {
    if grad_x.norm() == 0.0 {
        return Err(IpcError::Internal(
            "line search entered at a stationary point".into(),
        ));
    }
    let mut gamma = gamma0;
    let mut evals = 0;
    loop {
        if evals >= params.max_evals {
            return Err(IpcError::LineSearchStall {
                evals,
                last_step: gamma,
            });
        }
        let z = x - grad_x * gamma;
        let grad_z = oracle.gradient(&z);
        evals += 1;
        let dz = (&z - x).norm();
        if dz == 0.0 {
            return Err(IpcError::Internal(format!(
                "trial step {gamma:e} no longer moves the iterate"
            )));
        }
        let r = gamma * (&grad_z - grad_x).norm() / dz;
        if r <= params.nu {
            return Ok(LineSearchOutcome {
                h_k: gamma,
                z,
                grad_z,
                r_k: r,
                evals,
            });
        }
        // NaN ratios (non-finite trial gradients) fall through here and shrink by θ
        gamma = gamma * params.theta * (1.0 / r).min(1.0);
    }
}

/// Next initial trial: grow by `τ` after an easy step (`r_k ≤ μ`), keep
/// otherwise, then project onto `[h_lo, h_hi]`.
pub fn adaptive_initial_step(h_k: f64, r_k: f64, params: &LineSearchParams) -> f64 {
    let candidate = if r_k <= params.mu {
        params.tau * h_k
    } else {
        h_k
    };
    candidate.clamp(params.h_lo, params.h_hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::FnOracle;
    use approx::assert_relative_eq;

    fn params(nu: f64, theta: f64) -> LineSearchParams {
        LineSearchParams {
            mu: 0.3,
            nu,
            theta,
            tau: 1.5,
            gamma0_init: 1.0,
            h_lo: 1e-6,
            h_hi: 3.0,
            max_evals: 100,
        }
    }

    fn isotropic(l: f64, n: usize) -> FnOracle {
        FnOracle::new(n, move |x| 0.5 * l * x.norm_squared(), move |x| x * l).with_lipschitz(l)
    }

    #[test]
    fn hand_simulated_backtracking() {
        // r(γ) = 4γ: trials 1 (r=4), 0.1675 (r=0.67), 0.112225 (r=0.4489)
        let o = isotropic(4.0, 3);
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let g = o.gradient(&x);
        let out = line_search(&x, &g, 1.0, &params(0.5, 0.67), &o).unwrap();
        assert_eq!(out.evals, 3);
        assert_relative_eq!(out.h_k, 0.112225, max_relative = 1e-14);
        assert_relative_eq!(out.r_k, 0.4489, max_relative = 1e-12);
        assert_eq!(out.z, &x - &g * out.h_k);
    }

    #[test]
    fn first_trial_accepted_when_locally_flat() {
        let o = isotropic(0.25, 2);
        let x = DVector::from_vec(vec![3.0, 1.0]);
        let g = o.gradient(&x);
        let out = line_search(&x, &g, 2.0, &params(0.5, 0.67), &o).unwrap();
        assert_eq!(out.evals, 1);
        assert_eq!(out.h_k, 2.0);
    }

    #[test]
    fn stall_is_reported() {
        // sign gradient: every trial that crosses the kink has r = 2
        let o = FnOracle::new(
            1,
            |x| x[0].abs(),
            |x| DVector::from_element(1, if x[0] > 0.0 { 1.0 } else { -1.0 }),
        );
        let x = DVector::from_element(1, 1e-6);
        let g = o.gradient(&x);
        let mut p = params(0.5, 0.67);
        p.max_evals = 7;
        match line_search(&x, &g, 1.0, &p, &o).unwrap_err() {
            IpcError::LineSearchStall { evals, .. } => assert_eq!(evals, 7),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn initial_step_rule() {
        let p = LineSearchParams {
            mu: 0.3,
            tau: 1.5,
            h_lo: 1e-6,
            h_hi: 3.0,
            ..params(0.5, 0.67)
        };
        assert_eq!(adaptive_initial_step(1.0, 0.2, &p), 1.5);
        assert_eq!(adaptive_initial_step(1.0, 0.4, &p), 1.0);
        assert_eq!(adaptive_initial_step(2.5, 0.1, &p), 3.0);
        assert_eq!(adaptive_initial_step(1e-9, 0.4, &p), 1e-6);
    }
}
