//! Direct-summation DFT on `Z_N`, `ĝ(j) = Σ_k g(k) exp(−2πi kj/N)`.
//!
//! Sizes in this crate stay below a few hundred, so the `O(N²)` sum is used
//! everywhere; exponents are reduced mod `N` before evaluating the root of
//! unity to keep the phases exact.

use num_complex::Complex64;
use std::f64::consts::PI;

/// `exp(2πi m / n)` with `m` reduced mod `n`.
pub fn root_of_unity(m: i64, n: usize) -> Complex64 {
    let r = m.rem_euclid(n as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / n as f64)
}

pub fn dft(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    (0..n)
        .map(|j| {
            values
                .iter()
                .enumerate()
                .map(|(k, &g)| g * root_of_unity(-((k * j) as i64), n))
                .sum()
        })
        .collect()
}
