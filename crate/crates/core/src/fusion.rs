//! Gabor fusion frames: the `N` coordinate subspaces
//! `W_i = span{M_j T_i v} = {x : supp(x) ⊆ K + i}` of a difference set.
//!
//! Projections onto coordinate subspaces are diagonal 0/1 matrices, so they
//! are stored as support bitsets and every trace or product below reduces
//! to counting set intersections. Dense matrices are only built on request
//! for cross-checks.

use bitvec::prelude::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::diffset::DifferenceSet;
use crate::error::{Error, Result};
use crate::gabor::{block_etf, EtfDiagnostics, GaborFrame, Generator};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FusionSubspace {
    index: usize,
    mask: BitVec,
    support: Vec<usize>,
}

impl FusionSubspace {
    fn new(index: usize, n: usize, support: &[usize]) -> Result<Self> {
        let mut mask = bitvec![0; n];
        for &s in support {
            if s >= n {
                return Err(Error::invalid(format!("support index {s} out of range 0..{n}")));
            }
            if mask.replace(s, true) {
                return Err(Error::invalid(format!("duplicate support index {s}")));
            }
        }
        let support = mask.iter_ones().collect();
        Ok(Self { index, mask, support })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn dim(&self) -> usize {
        self.support.len()
    }

    /// Sorted coordinates spanning the subspace.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn contains(&self, coord: usize) -> bool {
        self.mask.get(coord).map(|b| *b).unwrap_or(false)
    }

    /// `Tr[P_a P_b] = |supp_a ∩ supp_b|`.
    pub fn overlap(&self, other: &FusionSubspace) -> usize {
        self.mask.iter_ones().filter(|&i| other.contains(i)).count()
    }

    /// Dense diagonal projection.
    pub fn projection(&self) -> DMatrix<Complex64> {
        let n = self.mask.len();
        DMatrix::from_fn(n, n, |r, c| {
            if r == c && self.mask[r] {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct GaborFusionFrame {
    n: usize,
    diffset: Option<DifferenceSet>,
    subspaces: Vec<FusionSubspace>,
}

impl GaborFusionFrame {
    /// Subspace `i` is supported on `K + i mod N`.
    pub fn new(ds: &DifferenceSet) -> Self {
        let n = ds.n();
        let subspaces = (0..n)
            .map(|i| {
                let shifted = ds.translate(i);
                FusionSubspace::new(i, n, shifted.elements()).expect("translates stay in range")
            })
            .collect();
        Self { n, diffset: Some(ds.clone()), subspaces }
    }

    /// Arbitrary family of coordinate subspaces of `C^n`.
    pub fn from_supports(n: usize, supports: &[Vec<usize>]) -> Result<Self> {
        let subspaces = supports
            .iter()
            .enumerate()
            .map(|(i, s)| FusionSubspace::new(i, n, s))
            .collect::<Result<_>>()?;
        Ok(Self { n, diffset: None, subspaces })
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    pub fn subspaces(&self) -> &[FusionSubspace] {
        &self.subspaces
    }

    pub fn subspace(&self, i: usize) -> &FusionSubspace {
        &self.subspaces[i]
    }

    pub fn diffset(&self) -> Option<&DifferenceSet> {
        self.diffset.as_ref()
    }

    /// Diagonal of `Σ_i P_i`: how many subspaces contain each coordinate.
    pub fn projection_sum(&self) -> Vec<usize> {
        let mut diag = vec![0usize; self.n];
        for s in &self.subspaces {
            for &c in s.support() {
                diag[c] += 1;
            }
        }
        diag
    }
}

pub fn build_fusion_frame(ds: &DifferenceSet) -> GaborFusionFrame {
    GaborFusionFrame::new(ds)
}

/// Optimal fusion frame bounds, the extreme eigenvalues of `Σ_i P_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FrameBounds {
    pub lower: usize,
    pub upper: usize,
}

impl FrameBounds {
    pub fn is_tight(&self) -> bool {
        self.lower == self.upper
    }
}

pub fn fusion_frame_bounds(ff: &GaborFusionFrame) -> FrameBounds {
    let diag = ff.projection_sum();
    FrameBounds {
        lower: diag.iter().copied().min().unwrap_or(0),
        upper: diag.iter().copied().max().unwrap_or(0),
    }
}

/// `d_c² = m − Tr[P_a P_b]`, exact.
pub fn chordal_distance_squared(a: &FusionSubspace, b: &FusionSubspace) -> Result<usize> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!(
            "chordal distance needs equal dimensions, got {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.dim() - a.overlap(b))
}

pub fn chordal_distance(a: &FusionSubspace, b: &FusionSubspace) -> Result<f64> {
    chordal_distance_squared(a, b).map(|d| (d as f64).sqrt())
}

/// Upper bound `m(N−m)M / (N(M−1))` on the minimal squared chordal distance
/// of `M` subspaces of dimension `m` in `C^N`.
pub fn simplex_bound(m: usize, count: usize, n: usize) -> f64 {
    let (m, count, n) = (m as f64, count as f64, n as f64);
    m * (n - m) * count / (n * (count - 1.0))
}

/// All pairwise `d_c²`, row-parallel.
pub fn distance_matrix(ff: &GaborFusionFrame) -> Result<Vec<Vec<usize>>> {
    let subs = ff.subspaces();
    subs.par_iter()
        .map(|a| subs.iter().map(|b| chordal_distance_squared(a, b)).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Equidistance {
    pub equidistant: bool,
    pub distance_squared: Option<f64>,
    pub min_distance_squared: f64,
    pub max_distance_squared: f64,
    /// `K − λ`.
    pub expected_from_lambda: Option<f64>,
    /// `K(N−K)/(N−1)`.
    pub expected_closed_form: Option<f64>,
}

pub fn equidistance_check(ff: &GaborFusionFrame, tol: f64) -> Result<Equidistance> {
    let d = distance_matrix(ff)?;
    let off: Vec<f64> = d
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().filter(move |(j, _)| *j != i).map(|(_, &v)| v as f64))
        .collect();
    let lo = off.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = off.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (from_lambda, closed) = match ff.diffset() {
        Some(ds) => {
            let (n, k) = (ds.n() as f64, ds.k() as f64);
            (Some(k - ds.lambda() as f64), Some(k * (n - k) / (n - 1.0)))
        }
        None => (None, None),
    };
    let uniform = !off.is_empty() && hi - lo <= tol;
    let matches = |target: Option<f64>| target.map(|t| (lo - t).abs() <= tol).unwrap_or(false);
    Ok(Equidistance {
        equidistant: uniform && matches(from_lambda) && matches(closed),
        distance_squared: uniform.then_some(lo),
        min_distance_squared: lo,
        max_distance_squared: hi,
        expected_from_lambda: from_lambda,
        expected_closed_form: closed,
    })
}

/// An associated sparse frame: one canonical vector `e_c` per basis element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SparseFrame {
    pub sparsity: usize,
    /// For each subspace, the coordinates of its canonical orthonormal basis.
    pub bases: Vec<Vec<usize>>,
}

impl SparseFrame {
    pub fn basis_vector(&self, n: usize, subspace: usize, element: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[self.bases[subspace][element]] = Complex64::new(1.0, 0.0);
        v
    }
}

/// Total support size of the canonical bases, `KN` for a Gabor fusion frame.
///
/// Each basis element needs at least one coordinate, so no orthonormal basis
/// system of these subspaces can do better than `Σ dim W_i`.
pub fn sparsity_count(ff: &GaborFusionFrame) -> SparseFrame {
    let bases: Vec<Vec<usize>> = ff.subspaces().iter().map(|s| s.support().to_vec()).collect();
    SparseFrame { sparsity: bases.iter().map(Vec::len).sum(), bases }
}

/// `‖P_a P_b‖₂`: 1 when the supports meet, 0 otherwise.
pub fn projection_product_norm(ff: &GaborFusionFrame, a: usize, b: usize) -> Result<f64> {
    if a == b {
        return Err(Error::invalid("projection product norm is defined for distinct subspaces"));
    }
    if a >= ff.len() || b >= ff.len() {
        return Err(Error::invalid(format!("subspace index out of range 0..{}", ff.len())));
    }
    Ok(if ff.subspace(a).overlap(ff.subspace(b)) > 0 { 1.0 } else { 0.0 })
}

/// Frame-theoretic view of subspace `i` through the Gabor block `B_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubspaceFrameCheck {
    pub subspace: usize,
    /// Every column of `B_i` vanishes off `support(W_i)`.
    pub supported: bool,
    pub block: EtfDiagnostics,
    /// Fusion constant `C` from the lifting identity `N = (N/K)·C`.
    pub lifted_constant: f64,
}

pub fn subspace_frame_check(ff: &GaborFusionFrame, frame: &GaborFrame, i: usize, tol: f64) -> SubspaceFrameCheck {
    let n = ff.ambient_dim();
    let sub = ff.subspace(i);
    let supported = (0..n).all(|j| {
        frame
            .column(frame.column_index(i, j))
            .iter()
            .enumerate()
            .all(|(r, v)| sub.contains(r) || v.norm() == 0.0)
    });
    let block = block_etf(frame, i, tol);
    // full Gabor system of a unit window is N-tight
    let lifted_constant = n as f64 / block.frame_bound;
    SubspaceFrameCheck { subspace: i, supported, block, lifted_constant }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FusionReport {
    pub n: usize,
    pub k: usize,
    pub lambda: usize,
    pub bounds: FrameBounds,
    pub tight: bool,
    pub tight_bound: f64,
    /// Pairwise squared chordal distances.
    pub chordal_distances: Vec<Vec<usize>>,
    pub distance_squared: Option<f64>,
    pub simplex_bound: f64,
    pub equidistant: bool,
    pub sparsity: usize,
    pub optimal_packing: bool,
}

pub fn fusion_report(ds: &DifferenceSet, tol: f64) -> Result<FusionReport> {
    let ff = GaborFusionFrame::new(ds);
    let bounds = fusion_frame_bounds(&ff);
    let eq = equidistance_check(&ff, tol)?;
    let simplex = simplex_bound(ds.k(), ff.len(), ds.n());
    let optimal_packing = eq.equidistant
        && bounds.is_tight()
        && eq.distance_squared.map(|d| (d - simplex).abs() < tol).unwrap_or(false);
    Ok(FusionReport {
        n: ds.n(),
        k: ds.k(),
        lambda: ds.lambda(),
        bounds,
        tight: bounds.is_tight(),
        tight_bound: bounds.upper as f64,
        chordal_distances: distance_matrix(&ff)?,
        distance_squared: eq.distance_squared,
        simplex_bound: simplex,
        equidistant: eq.equidistant,
        sparsity: sparsity_count(&ff).sparsity,
        optimal_packing,
    })
}

/// Builds the Gabor frame that generates `ff`.
pub fn generating_frame(ff: &GaborFusionFrame) -> Result<GaborFrame> {
    let ds = ff
        .diffset()
        .ok_or_else(|| Error::unsupported("fusion frame was not built from a difference set"))?;
    GaborFrame::new(Generator::difference_set(ds))
}
