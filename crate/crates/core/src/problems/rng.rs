//! Seeded random streams for the problem generators.
//!
//! Each generated quantity draws from its own Xoshiro256++ stream: stream `i`
//! is the generator seeded from `seed` (SplitMix64 expansion) advanced by `i`
//! jumps of 2^128 steps. Adding a quantity never perturbs existing ones.
//!
//! A uniform draw on `(lo, hi)` is `lo + (hi − lo)·u` with
//! `u = ((next_u64 >> 11) + 0.5)·2⁻⁵³`, which never hits either endpoint.

use nalgebra::{DMatrix, DVector};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn stream(&self, index: u32) -> Uniform {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(self.seed);
        for _ in 0..index {
            rng.jump();
        }
        Uniform { rng }
    }
}

pub struct Uniform {
    rng: Xoshiro256PlusPlus,
}

impl Uniform {
    /// Uniform on the open interval `(0, 1)`.
    pub fn next_open01(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_open01()
    }

    pub fn vector(&mut self, n: usize, lo: f64, hi: f64) -> DVector<f64> {
        DVector::from_iterator(n, (0..n).map(|_| self.uniform(lo, hi)))
    }

    /// Filled in row-major order.
    pub fn matrix(&mut self, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
        let data: Vec<f64> = (0..rows * cols).map(|_| self.uniform(lo, hi)).collect();
        DMatrix::from_row_slice(rows, cols, &data)
    }
}
