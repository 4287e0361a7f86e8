//! Mutual coherence, Welch bound and equiangular-tight-frame checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{norm2, GaborFrame, GeneratorKind};
use crate::diffset::DifferenceSetParams;
use crate::error::{Error, Result};

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    // ⟨a, b⟩ = Σ a · conj(b)
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn col(m: &DMatrix<Complex64>, i: usize) -> &[Complex64] {
    let r = m.nrows();
    &m.as_slice()[i * r..(i + 1) * r]
}

/// Running maximum with the lexicographically smallest argmax on ties.
#[derive(Clone, Copy, Debug)]
struct Best {
    value: f64,
    pair: (usize, usize),
}

impl Best {
    const NONE: Best = Best { value: f64::NEG_INFINITY, pair: (usize::MAX, usize::MAX) };

    fn offer(&mut self, value: f64, pair: (usize, usize)) {
        if value > self.value || (value == self.value && pair < self.pair) {
            *self = Best { value, pair };
        }
    }

    fn merge(mut self, other: Best) -> Best {
        self.offer(other.value, other.pair);
        self
    }
}

/// Visits every pair `i < j` of columns with the normalized modulus
/// `|⟨φ_i, φ_j⟩| / (‖φ_i‖ ‖φ_j‖)`, in parallel over `i`.
fn scan_pairs<S, V, M>(m: &DMatrix<Complex64>, init: S, visit: V, merge: M) -> S
where
    S: Clone + Send + Sync,
    V: Fn(&mut S, usize, usize, f64) + Sync,
    M: Fn(S, S) -> S + Sync + Send,
{
    let cols = m.ncols();
    let norms: Vec<f64> = (0..cols).map(|i| norm2(col(m, i))).collect();
    (0..cols)
        .into_par_iter()
        .map(|i| {
            let mut s = init.clone();
            let ci = col(m, i);
            for j in i + 1..cols {
                let g = inner(ci, col(m, j)).norm() / (norms[i] * norms[j]);
                visit(&mut s, i, j, g);
            }
            s
        })
        .reduce(|| init.clone(), merge)
}

/// Brute-force mutual coherence of the columns of an arbitrary matrix.
pub fn column_coherence(m: &DMatrix<Complex64>) -> (f64, (usize, usize)) {
    let best = scan_pairs(m, Best::NONE, |b, i, j, g| b.offer(g, (i, j)), Best::merge);
    (best.value.max(0.0), best.pair)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoherenceReport {
    pub mutual_coherence: f64,
    pub argmax_pair: (usize, usize),
    /// Largest off-diagonal modulus inside the diagonal blocks `B_k* B_k`.
    pub diagonal_block_offdiag_value: f64,
    /// Largest modulus inside the off-diagonal blocks `B_r* B_q`, `r ≠ q`.
    pub offdiag_block_max: f64,
    pub welch_bound: f64,
    /// Closed form, filled for difference-set windows.
    pub predicted: Option<f64>,
}

#[derive(Clone, Copy)]
struct GaborScan {
    overall: Best,
    diag: f64,
    offdiag: f64,
}

/// Brute-force scan of all `N²(N²−1)/2` column pairs.
pub fn mutual_coherence(frame: &GaborFrame) -> CoherenceReport {
    let n = frame.dim();
    let init = GaborScan { overall: Best::NONE, diag: 0.0, offdiag: 0.0 };
    let s = scan_pairs(
        frame.matrix(),
        init,
        |s, i, j, g| {
            s.overall.offer(g, (i, j));
            if i / n == j / n {
                s.diag = s.diag.max(g);
            } else {
                s.offdiag = s.offdiag.max(g);
            }
        },
        |a, b| GaborScan {
            overall: a.overall.merge(b.overall),
            diag: a.diag.max(b.diag),
            offdiag: a.offdiag.max(b.offdiag),
        },
    );
    finish_report(frame, s.overall.value.max(0.0), s.overall.pair, s.diag, s.offdiag)
}

fn finish_report(frame: &GaborFrame, mu: f64, pair: (usize, usize), diag: f64, offdiag: f64) -> CoherenceReport {
    let n = frame.dim();
    let predicted = frame
        .generator()
        .difference_set_source()
        .filter(|_| frame.generator().kind() == GeneratorKind::DifferenceSet)
        .map(|ds| predicted_coherence(&ds.params()));
    CoherenceReport {
        mutual_coherence: mu,
        argmax_pair: pair,
        diagonal_block_offdiag_value: diag,
        offdiag_block_max: offdiag,
        welch_bound: welch_bound(n * n, n).unwrap_or(0.0),
        predicted,
    }
}

/// Coherence through the ambiguity function.
///
/// `|⟨M_l T_q g, M_j T_r g⟩| = |⟨g, M_{j−l} T_{r−q} g⟩|`, so the `N²`
/// values `|⟨g, M_j T_k g⟩|`, `(k, j) ≠ (0, 0)`, carry every Gram modulus.
/// `O(N³)` instead of `O(N⁵)`; the argmax reported is `(0, k·N + j)`.
pub fn ambiguity_coherence(frame: &GaborFrame) -> CoherenceReport {
    let n = frame.dim();
    let g = frame.column(0);
    let gg = norm2(g).powi(2);
    let values: Vec<(usize, f64)> = (1..n * n)
        .into_par_iter()
        .map(|idx| (idx, inner(g, frame.column(idx)).norm() / gg))
        .collect();
    let mut best = Best::NONE;
    let (mut diag, mut offdiag) = (0.0f64, 0.0f64);
    for (idx, v) in values {
        best.offer(v, (0, idx));
        if idx < n {
            diag = diag.max(v);
        } else {
            offdiag = offdiag.max(v);
        }
    }
    finish_report(frame, best.value.max(0.0), best.pair, diag, offdiag)
}

/// `√((N−K)/(K(N−1)))` when `λ = 1`, else the larger of that and `(K−1)/(N−1)`.
pub fn predicted_coherence(params: &DifferenceSetParams) -> f64 {
    let (n, k) = (params.n() as f64, params.k() as f64);
    let within = ((n - k) / (k * (n - 1.0))).sqrt();
    if params.lambda() == 1 {
        within
    } else {
        within.max((k - 1.0) / (n - 1.0))
    }
}

/// Welch lower bound `√((M−N)/(N(M−1)))` for `M` unit vectors in `C^N`.
///
/// Only meaningful for redundant systems; `M ≤ N` is an error.
pub fn welch_bound(m: usize, n: usize) -> Result<f64> {
    if n == 0 || m <= n {
        return Err(Error::invalid(format!(
            "Welch bound needs M > N >= 1 (got M = {m}, N = {n})"
        )));
    }
    let (m, n) = (m as f64, n as f64);
    Ok(((m - n) / (n * (m - 1.0))).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalBlockStats {
    pub block: usize,
    pub offdiag_min: f64,
    pub offdiag_max: f64,
    pub diag_min: f64,
    pub diag_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockProfile {
    pub diagonal_blocks: Vec<DiagonalBlockStats>,
    pub offdiag_block_min: f64,
    pub offdiag_block_max: f64,
    /// `√((N−K)/(K(N−1)))`.
    pub expected_diagonal: f64,
    /// `λ/K`, equal to `1/K` when `λ = 1`.
    pub expected_offdiag_max: f64,
}

/// Gram moduli of a difference-set Gabor frame split by block.
pub fn block_coherence_profile(frame: &GaborFrame, params: &DifferenceSetParams) -> Result<BlockProfile> {
    if frame.generator().kind() != GeneratorKind::DifferenceSet {
        return Err(Error::unsupported("block profile requires a difference-set generator"));
    }
    let n = frame.dim();
    if params.n() != n {
        return Err(Error::invalid(format!("params {params} do not match dimension {n}")));
    }
    let g2 = frame.generator().norm().powi(2);

    #[derive(Clone)]
    struct Acc {
        diag_min: Vec<f64>,
        diag_max: Vec<f64>,
        off_min: f64,
        off_max: f64,
    }
    let init = Acc {
        diag_min: vec![f64::INFINITY; n],
        diag_max: vec![0.0; n],
        off_min: f64::INFINITY,
        off_max: 0.0,
    };
    let acc = scan_pairs(
        frame.matrix(),
        init,
        |a, i, j, g| {
            let (bi, bj) = (i / n, j / n);
            if bi == bj {
                a.diag_min[bi] = a.diag_min[bi].min(g);
                a.diag_max[bi] = a.diag_max[bi].max(g);
            } else {
                a.off_min = a.off_min.min(g);
                a.off_max = a.off_max.max(g);
            }
        },
        |mut a, b| {
            for k in 0..a.diag_min.len() {
                a.diag_min[k] = a.diag_min[k].min(b.diag_min[k]);
                a.diag_max[k] = a.diag_max[k].max(b.diag_max[k]);
            }
            a.off_min = a.off_min.min(b.off_min);
            a.off_max = a.off_max.max(b.off_max);
            a
        },
    );

    let diagonal_blocks = (0..n)
        .map(|k| {
            let self_products = (0..n).map(|j| {
                let c = frame.column(k * n + j);
                inner(c, c).re / g2
            });
            let (dmin, dmax) = self_products.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
            DiagonalBlockStats {
                block: k,
                offdiag_min: acc.diag_min[k],
                offdiag_max: acc.diag_max[k],
                diag_min: dmin,
                diag_max: dmax,
            }
        })
        .collect();
    let (nf, kf) = (n as f64, params.k() as f64);
    Ok(BlockProfile {
        diagonal_blocks,
        offdiag_block_min: acc.off_min,
        offdiag_block_max: acc.off_max,
        expected_diagonal: ((nf - kf) / (kf * (nf - 1.0))).sqrt(),
        expected_offdiag_max: params.lambda() as f64 / kf,
    })
}

/// Tightness relative to the whole space or to the span of the vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EtfScope {
    Whole,
    Span,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtfDiagnostics {
    pub is_etf: bool,
    pub equal_norms: bool,
    pub tight: bool,
    pub equiangular: bool,
    pub frame_bound: f64,
    pub span_dimension: usize,
    pub tightness_error: f64,
    pub min_abs_inner: f64,
    pub max_abs_inner: f64,
}

/// Equal norms, tightness and equiangularity of the columns of `m`.
///
/// With [`EtfScope::Span`], tightness means `S = ΦΦ*` is a multiple `c` of
/// an orthogonal projection, i.e. `S² = cS` with `c = tr(S²)/tr(S)`.
pub fn etf_diagnostics(m: &DMatrix<Complex64>, tol: f64, scope: EtfScope) -> EtfDiagnostics {
    let cols = m.ncols();
    let norms: Vec<f64> = (0..cols).map(|i| norm2(col(m, i))).collect();
    let nmax = norms.iter().cloned().fold(0.0, f64::max);
    let nmin = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let equal_norms = nmax - nmin <= tol;

    let s = m * m.adjoint();
    let trace = s.trace().re;
    let (frame_bound, tightness_error, span_dimension) = match scope {
        EtfScope::Whole => {
            let c = trace / m.nrows() as f64;
            let err = max_modulus(&(&s - DMatrix::identity(m.nrows(), m.nrows()) * Complex64::new(c, 0.0)));
            (c, err, m.nrows())
        }
        EtfScope::Span => {
            let s2 = &s * &s;
            let c = if trace > 0.0 { s2.trace().re / trace } else { 0.0 };
            let err = max_modulus(&(&s2 - &s * Complex64::new(c, 0.0)));
            let dim = if c > 0.0 { (trace / c).round() as usize } else { 0 };
            (c, err, dim)
        }
    };
    let tight = tightness_error <= tol * frame_bound.max(1.0);

    #[derive(Clone, Copy)]
    struct Range(f64, f64);
    let Range(lo, hi) = scan_pairs(
        m,
        Range(f64::INFINITY, 0.0),
        |r, _, _, g| {
            r.0 = r.0.min(g);
            r.1 = r.1.max(g);
        },
        |a, b| Range(a.0.min(b.0), a.1.max(b.1)),
    );
    let (lo, hi) = if cols < 2 { (0.0, 0.0) } else { (lo, hi) };
    let equiangular = hi - lo <= tol;
    EtfDiagnostics {
        is_etf: equal_norms && tight && equiangular,
        equal_norms,
        tight,
        equiangular,
        frame_bound,
        span_dimension,
        tightness_error,
        min_abs_inner: lo,
        max_abs_inner: hi,
    }
}

/// ETF test for the whole Gabor frame in `C^N`.
pub fn is_etf(frame: &GaborFrame, tol: f64) -> EtfDiagnostics {
    etf_diagnostics(frame.matrix(), tol, EtfScope::Whole)
}

/// ETF test of block `B_k` as a frame for its own span.
pub fn block_etf(frame: &GaborFrame, k: usize, tol: f64) -> EtfDiagnostics {
    etf_diagnostics(&frame.block(k), tol, EtfScope::Span)
}

fn max_modulus(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}
