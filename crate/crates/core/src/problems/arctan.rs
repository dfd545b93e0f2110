use nalgebra::{DMatrix, DVector};

use super::rng::Streams;
use crate::oracle::{Convexity, GradientOracle};

const POWER_ITERS: usize = 200;
const POWER_RTOL: f64 = 1e-8;

/// Monotone test problem with operator `F(x) = arctan(x) + Mx + q`.
///
/// `M = AᵀA + B` with `A_ij ~ U(−5,5)` and `B = (C − Cᵀ)/2` for
/// `C_ij ~ U(−5,5)`; `q ~ U(−500,500)ⁿ`. The reported value is
/// `xᵀarctan(x) − ½Σ ln(1+x_i²) + ½xᵀMx + qᵀx`, whose true gradient drops
/// the skew part `B`. Solvers consume `F`, not the gradient of the value.
#[derive(Debug, Clone, PartialEq)]
pub struct ArctanQuadraticProblem {
    pub m: DMatrix<f64>,
    pub q: DVector<f64>,
    /// `‖M‖₂ + 1`.
    pub lipschitz: f64,
    pub x0: DVector<f64>,
    pub seed: u64,
}

/// Stream layout: 0 → A, 1 → C, 2 → q, 3 → x⁰.
pub fn make_arctan_quadratic(n: usize, seed: u64) -> ArctanQuadraticProblem {
    assert!(n >= 1, "dimension must be positive");
    let s = Streams::new(seed);
    let a = s.stream(0).matrix(n, n, -5.0, 5.0);
    let c = s.stream(1).matrix(n, n, -5.0, 5.0);
    let b = (&c - c.transpose()) * 0.5;
    let mut ata = a.transpose() * &a;
    ata = (&ata + ata.transpose()) * 0.5;
    let m = ata + b;
    let lipschitz = spectral_norm(&m) + 1.0;
    ArctanQuadraticProblem {
        m,
        q: s.stream(2).vector(n, -500.0, 500.0),
        lipschitz,
        x0: s.stream(3).vector(n, 0.0, 1.0),
        seed,
    }
}

/// Largest singular value by power iteration on `MᵀM`, stopping after 200
/// rounds or once the estimate changes by less than 1e-8 relative.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    let n = m.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut sigma = 0.0;
    for _ in 0..POWER_ITERS {
        let mv = m * &v;
        let next = mv.norm();
        let w = m.tr_mul(&mv);
        let wn = w.norm();
        if wn == 0.0 {
            return next;
        }
        v = w / wn;
        let done = (next - sigma).abs() <= POWER_RTOL * next;
        sigma = next;
        if done {
            break;
        }
    }
    (m * &v).norm().max(sigma)
}

impl ArctanQuadraticProblem {
    /// `arctan(x) + ½(M + Mᵀ)x + q`, the true gradient of [`GradientOracle::value`].
    pub fn symmetric_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let sym = (&self.m * x + self.m.tr_mul(x)) * 0.5;
        x.map(f64::atan) + sym + &self.q
    }
}

impl GradientOracle for ArctanQuadraticProblem {
    fn dim(&self) -> usize {
        self.q.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let atan_part: f64 = x
            .iter()
            .map(|&xi| xi * xi.atan() - 0.5 * xi.mul_add(xi, 1.0).ln())
            .sum();
        atan_part + 0.5 * x.dot(&(&self.m * x)) + self.q.dot(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x.map(f64::atan) + &self.m * x + &self.q
    }

    fn value_and_gradient(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let mx = &self.m * x;
        let atan = x.map(f64::atan);
        let atan_part: f64 = x
            .iter()
            .zip(atan.iter())
            .map(|(&xi, &ai)| xi * ai - 0.5 * xi.mul_add(xi, 1.0).ln())
            .sum();
        let f = atan_part + 0.5 * x.dot(&mx) + self.q.dot(x);
        (f, atan + mx + &self.q)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz)
    }

    fn convexity(&self) -> Convexity {
        Convexity::Convex
    }

    fn default_start(&self) -> Option<DVector<f64>> {
        Some(self.x0.clone())
    }
}
