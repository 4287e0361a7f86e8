//! Measurement operator `A_P = {a_ij P_j}` over a Gabor fusion frame.
//!
//! A signal is a family `x = {x_j}`, `x_j ∈ W_j`, and measurement `i` is
//! the ambient vector `y_i = Σ_j a_ij P_j x_j`. Writing `x_j = B_j c_j` with
//! the canonical basis `B_j` of `W_j` turns the problem into a plain linear
//! system in the stacked coefficients `c = (c_0, …, c_{N−1}) ∈ C^{N·K}`:
//! row `i·N + l`, column `j·K + t` holds `a_ij` exactly when coordinate `l`
//! is the `t`-th support element of `W_j`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::BlockStructure;
use crate::error::{Error, Result};
use crate::fusion::GaborFusionFrame;

/// `n × N` matrix of i.i.d. standard normal entries.
pub fn gaussian_measurement_coefficients(n: usize, subspaces: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // fill row by row so the stream order does not depend on storage layout
    let mut m = DMatrix::zeros(n, subspaces);
    for i in 0..n {
        for j in 0..subspaces {
            m[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    m
}

#[derive(Clone, Debug)]
pub struct FusionMeasurementOperator {
    coefficients: DMatrix<Complex64>,
    supports: Vec<Vec<usize>>,
    ambient: usize,
    effective: DMatrix<Complex64>,
}

impl FusionMeasurementOperator {
    pub fn coefficients(&self) -> &DMatrix<Complex64> {
        &self.coefficients
    }

    /// Complex circular coefficients `(a + i·b)/√2` from the current real
    /// coefficients `a` and a second real draw `b` of the same shape.
    pub fn with_imaginary_part(&self, b: &DMatrix<f64>) -> Result<Self> {
        if b.shape() != self.coefficients.shape() {
            return Err(Error::ShapeMismatch(format!(
                "imaginary part has shape {:?}, expected {:?}",
                b.shape(),
                self.coefficients.shape()
            )));
        }
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let coeffs = DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| {
            Complex64::new(self.coefficients[(i, j)].re * scale, b[(i, j)] * scale)
        });
        Ok(build(coeffs, self.supports.clone(), self.ambient))
    }

    /// `(n·N_amb) × (N·K)` matrix acting on stacked subspace coefficients.
    pub fn effective(&self) -> &DMatrix<Complex64> {
        &self.effective
    }

    pub fn measurements(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn blocks(&self) -> BlockStructure {
        let k = self.supports.first().map(Vec::len).unwrap_or(0);
        BlockStructure::new(self.supports.len(), k).expect("subspaces are nonempty")
    }

    pub fn apply(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        (&self.effective * DVector::from_column_slice(coeffs)).as_slice().to_vec()
    }

    /// `x_j = B_j c_j` in the ambient space.
    pub fn lift(&self, coeffs: &[Complex64]) -> Vec<Vec<Complex64>> {
        let k = self.blocks().block_size();
        self.supports
            .iter()
            .enumerate()
            .map(|(j, supp)| {
                let mut x = vec![Complex64::new(0.0, 0.0); self.ambient];
                for (t, &l) in supp.iter().enumerate() {
                    x[l] = coeffs[j * k + t];
                }
                x
            })
            .collect()
    }

    /// Coefficients of `x_j` in the canonical bases; `P_j` is applied first.
    pub fn restrict(&self, xs: &[Vec<Complex64>]) -> Vec<Complex64> {
        self.supports
            .iter()
            .zip(xs)
            .flat_map(|(supp, x)| supp.iter().map(move |&l| x[l]))
            .collect()
    }

    /// Reference path: `y_i = Σ_j a_ij P_j x_j` with dense projections.
    pub fn apply_dense(&self, xs: &[Vec<Complex64>]) -> Vec<Complex64> {
        let n = self.ambient;
        let projections: Vec<DMatrix<Complex64>> = self
            .supports
            .iter()
            .map(|supp| {
                let mut p = DMatrix::zeros(n, n);
                for &l in supp {
                    p[(l, l)] = Complex64::new(1.0, 0.0);
                }
                p
            })
            .collect();
        let mut y = Vec::with_capacity(self.measurements() * n);
        for i in 0..self.measurements() {
            let mut yi = DVector::<Complex64>::zeros(n);
            for (j, (p, x)) in projections.iter().zip(xs).enumerate() {
                yi += p * DVector::from_column_slice(x) * self.coefficients[(i, j)];
            }
            y.extend(yi.iter());
        }
        y
    }
}

pub fn assemble_fusion_operator(a: &DMatrix<f64>, ff: &GaborFusionFrame) -> Result<FusionMeasurementOperator> {
    if a.ncols() != ff.len() {
        return Err(Error::ShapeMismatch(format!(
            "coefficient matrix has {} columns but the fusion frame has {} subspaces",
            a.ncols(),
            ff.len()
        )));
    }
    let dims: Vec<usize> = ff.subspaces().iter().map(|s| s.dim()).collect();
    let k = dims.first().copied().unwrap_or(0);
    if k == 0 || dims.iter().any(|&m| m != k) {
        return Err(Error::ShapeMismatch("subspaces must share one positive dimension".into()));
    }
    let supports: Vec<Vec<usize>> = ff.subspaces().iter().map(|s| s.support().to_vec()).collect();
    let coeffs = a.map(|v| Complex64::new(v, 0.0));
    Ok(build(coeffs, supports, ff.ambient_dim()))
}

fn build(coefficients: DMatrix<Complex64>, supports: Vec<Vec<usize>>, ambient: usize) -> FusionMeasurementOperator {
    let n = coefficients.nrows();
    let k = supports[0].len();
    let mut effective = DMatrix::zeros(n * ambient, supports.len() * k);
    for i in 0..n {
        for (j, supp) in supports.iter().enumerate() {
            for (t, &l) in supp.iter().enumerate() {
                effective[(i * ambient + l, j * k + t)] = coefficients[(i, j)];
            }
        }
    }
    FusionMeasurementOperator { coefficients, supports, ambient, effective }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffset::DifferenceSet;
    use rand::Rng;

    fn fano() -> GaborFusionFrame {
        GaborFusionFrame::new(&DifferenceSet::new(7, &[1, 2, 4]).unwrap())
    }

    #[test]
    fn all_ones_sums_components() {
        let ff = fano();
        let op = assemble_fusion_operator(&DMatrix::from_element(1, 7, 1.0), &ff).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let coeffs: Vec<Complex64> = (0..21).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let xs = op.lift(&coeffs);
        let y = op.apply(&coeffs);
        for l in 0..7 {
            let sum: Complex64 = xs.iter().map(|x| x[l]).sum();
            assert!((y[l] - sum).norm() < 1e-14);
        }
    }

    #[test]
    fn block_path_matches_dense_projections() {
        let ff = fano();
        let a = gaussian_measurement_coefficients(3, 7, 11);
        let op = assemble_fusion_operator(&a, &ff).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let coeffs: Vec<Complex64> = (0..21).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let fast = op.apply(&coeffs);
        let dense = op.apply_dense(&op.lift(&coeffs));
        for (p, q) in fast.iter().zip(&dense) {
            assert!((p - q).norm() < 1e-12);
        }
        assert_eq!(op.restrict(&op.lift(&coeffs)), coeffs);

        let complex = op.with_imaginary_part(&gaussian_measurement_coefficients(3, 7, 12)).unwrap();
        let fast = complex.apply(&coeffs);
        let dense = complex.apply_dense(&complex.lift(&coeffs));
        for (p, q) in fast.iter().zip(&dense) {
            assert!((p - q).norm() < 1e-12);
        }
        assert!(op.with_imaginary_part(&DMatrix::zeros(2, 7)).is_err());
    }

    #[test]
    fn shapes() {
        let ff = fano();
        let op = assemble_fusion_operator(&gaussian_measurement_coefficients(4, 7, 1), &ff).unwrap();
        assert_eq!(op.effective().shape(), (4 * 7, 7 * 3));
        assert!(matches!(
            assemble_fusion_operator(&gaussian_measurement_coefficients(4, 6, 1), &ff),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn gaussian_coefficients_are_seeded() {
        let a = gaussian_measurement_coefficients(5, 8, 3);
        assert_eq!(a, gaussian_measurement_coefficients(5, 8, 3));
        assert_ne!(a, gaussian_measurement_coefficients(5, 8, 4));
    }

    #[test]
    fn gaussian_sample_mean() {
        let a = gaussian_measurement_coefficients(1000, 1000, 2024);
        let mean = a.iter().sum::<f64>() / 1e6;
        assert!(mean.abs() < 0.01, "mean {mean}");
        let var = a.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 1e6;
        assert!((var - 1.0).abs() < 0.01);
    }
}
