#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Real instance `Ax = y` with `n ≤ 3` rows and `d ≤ 6` columns.
pub struct TinyInstance {
    pub a: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl TinyInstance {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(1..=3usize);
        let d = rng.random_range(n + 1..=6usize);
        let a = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
        let active = rng.random_range(1..=d);
        let mut x0 = DVector::<f64>::zeros(d);
        for i in rand::seq::index::sample(&mut rng, d, active) {
            x0[i] = StandardNormal.sample(&mut rng);
        }
        let y = &a * x0;
        Self { a, y }
    }

    pub fn complex_matrix(&self) -> DMatrix<Complex64> {
        self.a.map(|v| Complex64::new(v, 0.0))
    }

    pub fn complex_y(&self) -> Vec<Complex64> {
        self.y.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }
}

/// Minimum `ℓ1` norm over `{Ax = y}` by enumerating every support of size
/// at most `rows` with linearly independent columns. For real data the
/// complex problem has the same optimum: an imaginary part only adds modulus.
pub fn l1_oracle(a: &DMatrix<f64>, y: &DVector<f64>) -> Option<f64> {
    let (n, d) = a.shape();
    let scale = 1.0 + y.norm();
    let mut best: Option<f64> = None;
    if y.norm() == 0.0 {
        return Some(0.0);
    }
    for mask in 1u32..(1 << d) {
        let cols: Vec<usize> = (0..d).filter(|&c| mask & (1 << c) != 0).collect();
        if cols.len() > n {
            continue;
        }
        let a_s = a.select_columns(&cols);
        let svd = a_s.clone().svd(true, true);
        if svd.singular_values.min() < 1e-10 * svd.singular_values.max() {
            continue;
        }
        let x_s = svd.solve(y, 0.0).ok()?;
        if (&a_s * &x_s - y).norm() > 1e-9 * scale {
            continue;
        }
        let l1 = x_s.iter().map(|v| v.abs()).sum::<f64>();
        best = Some(best.map_or(l1, |b: f64| b.min(l1)));
    }
    best
}

pub fn feasibility_gap(a: &DMatrix<Complex64>, x: &[Complex64], y: &[Complex64]) -> f64 {
    let r = a * DVector::from_column_slice(x) - DVector::from_column_slice(y);
    r.norm() / DVector::from_column_slice(y).norm().max(1.0)
}
