//! ADMM solvers for equality-constrained `ℓ1` and mixed `ℓ2/ℓ1` problems
//! over complex vectors, and the fusion measurement operator.

mod admm;
mod fusion_op;
mod projection;

pub use admm::{basis_pursuit, block_basis_pursuit};
pub use fusion_op::{assemble_fusion_operator, gaussian_measurement_coefficients, FusionMeasurementOperator};
pub use projection::{AffineProjector, RankPolicy};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    /// ADMM penalty.
    pub rho: f64,
    pub max_iters: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
    /// Residual balancing: rescale `rho` when one residual dominates.
    pub adaptive_rho: bool,
    /// Accept rank-deficient constraint matrices with consistent data.
    pub allow_rank_deficient: bool,
    /// Attempt a certified support refit every this many iterations; 0 disables.
    pub polish_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            max_iters: 5000,
            tol_primal: 1e-9,
            tol_dual: 1e-9,
            adaptive_rho: false,
            allow_rank_deficient: false,
            polish_every: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.rho.is_finite() || self.rho <= 0.0 {
            return Err(Error::invalid(format!("rho must be positive, got {}", self.rho)));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.tol_primal > 0.0 && self.tol_dual > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        Ok(())
    }

    pub(crate) fn rank_policy(&self) -> RankPolicy {
        if self.allow_rank_deficient {
            RankPolicy::LeastSquares
        } else {
            RankPolicy::FullRowRank
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxItersReached,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveResult {
    pub solution: Vec<Complex64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Stopping thresholds at the final iterate.
    pub primal_tolerance: f64,
    pub dual_tolerance: f64,
    pub status: SolveStatus,
    /// Stopped on a support refit with a strict optimality certificate.
    pub certified: bool,
    /// `(primal, dual)` residual per iteration.
    #[serde(skip)]
    pub history: Vec<(f64, f64)>,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Uniform partition of the coefficient vector into consecutive blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BlockStructure {
    block_count: usize,
    block_size: usize,
}

impl BlockStructure {
    pub fn new(block_count: usize, block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::invalid("block size must be positive"));
        }
        Ok(Self { block_count, block_size })
    }

    /// Blocks of `block_size` covering `dim` coefficients.
    pub fn uniform(dim: usize, block_size: usize) -> Result<Self> {
        if block_size == 0 || !dim.is_multiple_of(block_size) {
            return Err(Error::ShapeMismatch(format!(
                "dimension {dim} is not a multiple of block size {block_size}"
            )));
        }
        Self::new(dim / block_size, block_size)
    }

    /// Every coefficient its own block.
    pub fn singletons(dim: usize) -> Self {
        Self { block_count: dim, block_size: 1 }
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn dim(&self) -> usize {
        self.block_count * self.block_size
    }

    pub fn block_of(&self, index: usize) -> usize {
        index / self.block_size
    }

    pub fn range(&self, block: usize) -> std::ops::Range<usize> {
        block * self.block_size..(block + 1) * self.block_size
    }

    /// `Σ_b ‖x_b‖₂`.
    pub fn mixed_norm(&self, x: &[Complex64]) -> f64 {
        (0..self.block_count)
            .map(|b| x[self.range(b)].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
            .sum()
    }
}

/// Proximal map of `τ|·|` on `C`: `z · max(1 − τ/|z|, 0)`.
pub fn complex_soft_threshold(z: Complex64, tau: f64) -> Complex64 {
    let r = z.norm();
    if r <= tau {
        Complex64::new(0.0, 0.0)
    } else {
        z * (1.0 - tau / r)
    }
}

/// Block shrinkage: each block scaled by `max(1 − τ/‖v_b‖, 0)`.
pub fn block_soft_threshold(v: &mut [Complex64], blocks: &BlockStructure, tau: f64) {
    for b in 0..blocks.block_count() {
        let chunk = &mut v[blocks.range(b)];
        let norm = chunk.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let scale = if norm <= tau { 0.0 } else { 1.0 - tau / norm };
        chunk.iter_mut().for_each(|c| *c *= scale);
    }
}

pub fn l1_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm()).sum()
}
