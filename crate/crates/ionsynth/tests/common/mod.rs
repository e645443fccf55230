//! Brute-force oracles shared by the integration tests.
//!
//! Everything here is built from scratch on dense matrices — no calls into
//! the crate's coupling machinery — so it can serve as an independent check
//! of the series-evaluated matrix elements and the block-rotation evolution.

// each test binary compiles its own copy and uses a subset
#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64;

/// Dense `a + a^dag` on a `dim`-level truncated oscillator.
pub fn position_sum(dim: usize) -> Array2<f64> {
    let mut x = Array2::zeros((dim, dim));
    for k in 0..dim - 1 {
        let v = ((k + 1) as f64).sqrt();
        x[(k + 1, k)] = v;
        x[(k, k + 1)] = v;
    }
    x
}

/// Matrix exponential by scaling-and-squaring with a Taylor series.
pub fn expm(a: &Array2<Complex64>) -> Array2<Complex64> {
    let dim = a.nrows();
    let norm1 = (0..dim)
        .map(|j| (0..dim).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.25 {
        (norm1 / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.mapv(|v| v / 2f64.powi(squarings as i32));

    let mut result = Array2::<Complex64>::eye(dim);
    let mut term = Array2::<Complex64>::eye(dim);
    for k in 1..200 {
        term = term.dot(&scaled) / Complex64::from(k as f64);
        result += &term;
        let term_norm: f64 = term.iter().map(|v| v.norm()).sum();
        if term_norm < 1e-20 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

/// `exp(i eta (a + a^dag))` evaluated numerically on a padded space.
pub fn displacement_oracle(eta: f64, dim: usize) -> Array2<Complex64> {
    let x = position_sum(dim);
    let generator = x.mapv(|v| Complex64::new(0.0, eta * v));
    expm(&generator)
}
