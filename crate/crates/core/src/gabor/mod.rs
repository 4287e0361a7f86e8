//! Finite Gabor systems `{M_j T_k g}` on `C^N`.
//!
//! The frame matrix stores column `c(k, j) = k·N + j` for translation `k`
//! and modulation `j`, so the translation blocks `B_0 … B_{N−1}` are
//! contiguous `N × N` submatrices.

mod coherence;
mod table;

pub use coherence::{
    ambiguity_coherence, block_coherence_profile, block_etf, column_coherence, etf_diagnostics,
    is_etf, mutual_coherence, predicted_coherence, welch_bound, BlockProfile, CoherenceReport,
    DiagonalBlockStats, EtfDiagnostics, EtfScope,
};
pub use table::{family_table, Family, TableRow};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dft::root_of_unity;
use crate::diffset::{normalized_generator, DifferenceSet};
use crate::error::{Error, Result};

/// `T_k g(n) = g(n − k mod N)`.
pub fn translate(g: &[Complex64], k: i64) -> Vec<Complex64> {
    let n = g.len() as i64;
    (0..n).map(|i| g[(i - k).rem_euclid(n) as usize]).collect()
}

/// `M_j g(n) = exp(2πi jn/N) g(n)`.
pub fn modulate(g: &[Complex64], j: i64) -> Vec<Complex64> {
    let n = g.len();
    g.iter()
        .enumerate()
        .map(|(i, &v)| v * root_of_unity(j * i as i64, n))
        .collect()
}

pub(crate) fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    DifferenceSet,
    Alltop,
    RandomTorus,
    Custom,
}

impl GeneratorKind {
    pub fn label(&self) -> &'static str {
        match self {
            GeneratorKind::DifferenceSet => "difference_set",
            GeneratorKind::Alltop => "alltop",
            GeneratorKind::RandomTorus => "random_torus",
            GeneratorKind::Custom => "custom",
        }
    }
}

/// Window vector of a Gabor system.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    values: Vec<Complex64>,
    kind: GeneratorKind,
    norm: f64,
    diffset: Option<DifferenceSet>,
}

impl Generator {
    pub fn custom(values: Vec<Complex64>) -> Self {
        let norm = norm2(&values);
        Self { values, kind: GeneratorKind::Custom, norm, diffset: None }
    }

    /// `χ_K / √K`.
    pub fn difference_set(ds: &DifferenceSet) -> Self {
        let values = normalized_generator(ds);
        let norm = norm2(&values);
        Self { values, kind: GeneratorKind::DifferenceSet, norm, diffset: Some(ds.clone()) }
    }

    /// Cubic-phase sequence `N^{-1/2} exp(2πi j³/N)` for prime `N ≥ 5`.
    pub fn alltop(n: usize) -> Result<Self> {
        let prime = n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        if n < 5 || !prime {
            return Err(Error::unsupported(format!("Alltop window needs a prime N >= 5, got {n}")));
        }
        let scale = 1.0 / (n as f64).sqrt();
        let values: Vec<Complex64> = (0..n)
            .map(|j| {
                let cube = (j * j % n) * j % n;
                root_of_unity(cube as i64, n) * scale
            })
            .collect();
        let norm = norm2(&values);
        Ok(Self { values, kind: GeneratorKind::Alltop, norm, diffset: None })
    }

    /// Unimodular entries with i.i.d. uniform phases, scaled to unit norm.
    pub fn random_torus(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (n as f64).sqrt();
        let values: Vec<Complex64> = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                Complex64::from_polar(scale, 2.0 * std::f64::consts::PI * u)
            })
            .collect();
        let norm = norm2(&values);
        Self { values, kind: GeneratorKind::RandomTorus, norm, diffset: None }
    }

    /// Same window multiplied by a scalar; keeps kind and set.
    pub fn scaled(&self, c: Complex64) -> Self {
        let values: Vec<Complex64> = self.values.iter().map(|v| v * c).collect();
        let norm = norm2(&values);
        Self { values, norm, ..self.clone() }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn difference_set_source(&self) -> Option<&DifferenceSet> {
        self.diffset.as_ref()
    }
}

/// The `N × N²` matrix of all time-frequency shifts of a generator.
#[derive(Clone, Debug)]
pub struct GaborFrame {
    generator: Generator,
    columns: DMatrix<Complex64>,
}

impl GaborFrame {
    pub fn new(generator: Generator) -> Result<Self> {
        let n = generator.len();
        if n == 0 || generator.norm() == 0.0 {
            return Err(Error::invalid("Gabor frame needs a nonzero generator"));
        }
        let g = generator.values();
        let mut columns = DMatrix::zeros(n, n * n);
        for k in 0..n {
            for j in 0..n {
                let mut col = columns.column_mut(k * n + j);
                for row in 0..n {
                    let gv = g[(row + n - k) % n];
                    col[row] = root_of_unity((j * row) as i64, n) * gv;
                }
            }
        }
        Ok(Self { generator, columns })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    /// Ambient dimension `N`.
    pub fn dim(&self) -> usize {
        self.generator.len()
    }

    pub fn len(&self) -> usize {
        self.columns.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.ncols() == 0
    }

    pub fn column_index(&self, translation: usize, modulation: usize) -> usize {
        translation * self.dim() + modulation
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.columns
    }

    pub fn column(&self, idx: usize) -> &[Complex64] {
        let n = self.dim();
        &self.columns.as_slice()[idx * n..(idx + 1) * n]
    }

    /// Block `B_k = [M_0 T_k g … M_{N−1} T_k g]`.
    pub fn block(&self, k: usize) -> DMatrix<Complex64> {
        let n = self.dim();
        self.columns.columns(k * n, n).into_owned()
    }

    /// `Φ Φ*`.
    pub fn frame_operator(&self) -> DMatrix<Complex64> {
        &self.columns * self.columns.adjoint()
    }

    /// `max |ΦΦ* − N‖g‖² I|` entrywise.
    pub fn tightness_error(&self) -> f64 {
        let n = self.dim();
        let bound = n as f64 * self.generator.norm().powi(2);
        let s = self.frame_operator();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { bound } else { 0.0 };
                worst = worst.max((s[(r, c)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Shorthand for [`GaborFrame::new`].
pub fn build_gabor_frame(generator: Generator) -> Result<GaborFrame> {
    GaborFrame::new(generator)
}
