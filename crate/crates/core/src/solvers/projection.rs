//! Euclidean projection onto the affine set `{x : Ax = y}`.
//!
//! The matrix is split into independent components of its sparsity
//! pattern (rows and columns linked by a nonzero entry). Each component is
//! projected on its own, either with the scalar shortcut
//! `x + A*(y − Ax)/c` when `AA* = cI` (tight frames) or with a precomputed
//! pseudo-inverse. Gabor frames hit the scalar path; the stacked fusion
//! operator splits into one tiny component per ambient coordinate.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Compressed sparse columns restricted to one component, local indices.
#[derive(Clone, Debug)]
struct SparseColumns {
    rows: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseColumns {
    fn mul(&self, x: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = ZERO);
        for (c, &xc) in x.iter().enumerate() {
            if xc == ZERO {
                continue;
            }
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                out[self.row_idx[p]] += self.values[p] * xc;
            }
        }
    }

    fn mul_adjoint(&self, r: &[Complex64], out: &mut [Complex64]) {
        for (c, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                acc += self.values[p].conj() * r[self.row_idx[p]];
            }
            *o = acc;
        }
    }

    fn to_dense(&self) -> DMatrix<Complex64> {
        let cols = self.col_ptr.len() - 1;
        let mut m = DMatrix::zeros(self.rows, cols);
        for c in 0..cols {
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                m[(self.row_idx[p], c)] = self.values[p];
            }
        }
        m
    }
}

#[derive(Clone, Debug)]
enum Solve {
    /// `AA* = scale⁻¹ I`.
    Scaled(f64),
    /// Dense pseudo-inverse, `cols × rows`.
    Pinv(DMatrix<Complex64>),
    /// No rows touch these columns: they are free.
    Free,
}

#[derive(Clone, Debug)]
struct Component {
    rows: Vec<usize>,
    cols: Vec<usize>,
    a: SparseColumns,
    solve: Solve,
    rank: usize,
}

/// How rank deficiency is treated when factorizing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankPolicy {
    /// `AA*` must be invertible.
    FullRowRank,
    /// Pseudo-inverse; `y` must still lie in the range of `A`.
    LeastSquares,
}

#[derive(Clone, Debug)]
pub struct AffineProjector {
    rows: usize,
    cols: usize,
    y: Vec<Complex64>,
    components: Vec<Component>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

impl AffineProjector {
    pub fn new(a: &DMatrix<Complex64>, y: &[Complex64], policy: RankPolicy) -> Result<Self> {
        let (m, d) = a.shape();
        if y.len() != m {
            return Err(Error::ShapeMismatch(format!("matrix has {m} rows but y has {}", y.len())));
        }
        // union-find over rows 0..m and columns m..m+d
        let mut parent: Vec<usize> = (0..m + d).collect();
        for c in 0..d {
            for r in 0..m {
                if a[(r, c)] != ZERO {
                    let (pr, pc) = (find(&mut parent, r), find(&mut parent, m + c));
                    if pr != pc {
                        parent[pr.max(pc)] = pr.min(pc);
                    }
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
        for r in 0..m {
            groups.entry(find(&mut parent, r)).or_default().0.push(r);
        }
        for c in 0..d {
            groups.entry(find(&mut parent, m + c)).or_default().1.push(c);
        }

        let mut components = Vec::with_capacity(groups.len());
        for (_, (rows, cols)) in groups {
            let mut local_row = vec![usize::MAX; m];
            for (i, &r) in rows.iter().enumerate() {
                local_row[r] = i;
            }
            let mut sc = SparseColumns { rows: rows.len(), col_ptr: vec![0], row_idx: vec![], values: vec![] };
            for &c in &cols {
                for &r in &rows {
                    let v = a[(r, c)];
                    if v != ZERO {
                        sc.row_idx.push(local_row[r]);
                        sc.values.push(v);
                    }
                }
                sc.col_ptr.push(sc.row_idx.len());
            }
            let (solve, rank) = if rows.is_empty() {
                (Solve::Free, 0)
            } else {
                factorize(&sc, policy, &rows)?
            };
            components.push(Component { rows, cols, a: sc, solve, rank });
        }

        let proj = Self { rows: m, cols: d, y: y.to_vec(), components };
        if policy == RankPolicy::LeastSquares {
            let x = proj.project(&vec![ZERO; d]);
            let residual = proj.residual_norm(&x);
            let scale = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1.0);
            if residual > 1e-8 * scale {
                return Err(Error::invalid(format!(
                    "measurements are not in the range of the matrix (residual {residual:.3e})"
                )));
            }
        }
        Ok(proj)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// True when every constrained component uses the `AA* = cI` shortcut.
    pub fn is_scaled(&self) -> bool {
        self.components.iter().all(|c| matches!(c.solve, Solve::Scaled(_) | Solve::Free))
    }

    /// True when `A` has trivial null space, so `{Ax = y}` is a single point.
    pub fn is_injective(&self) -> bool {
        self.components.iter().all(|c| c.rank == c.cols.len())
    }

    /// `A* r`.
    pub fn apply_adjoint(&self, r: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.cols];
        for comp in &self.components {
            let rc: Vec<Complex64> = comp.rows.iter().map(|&i| r[i]).collect();
            let mut v = vec![ZERO; comp.cols.len()];
            comp.a.mul_adjoint(&rc, &mut v);
            for (&c, val) in comp.cols.iter().zip(v) {
                out[c] = val;
            }
        }
        out
    }

    /// `x + A⁺(y − Ax)`.
    pub fn project(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = x.to_vec();
        self.project_into(x, &mut out);
        out
    }

    pub fn project_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        for comp in &self.components {
            let xc: Vec<Complex64> = comp.cols.iter().map(|&c| x[c]).collect();
            let mut r = vec![ZERO; comp.rows.len()];
            comp.a.mul(&xc, &mut r);
            for (ri, &row) in r.iter_mut().zip(&comp.rows) {
                *ri = self.y[row] - *ri;
            }
            let mut corr = vec![ZERO; comp.cols.len()];
            match &comp.solve {
                Solve::Free => {}
                Solve::Scaled(s) => {
                    comp.a.mul_adjoint(&r, &mut corr);
                    corr.iter_mut().for_each(|v| *v *= *s);
                }
                Solve::Pinv(p) => {
                    for (i, ci) in corr.iter_mut().enumerate() {
                        *ci = (0..r.len()).map(|j| p[(i, j)] * r[j]).sum();
                    }
                }
            }
            for ((&c, xv), dv) in comp.cols.iter().zip(&xc).zip(&corr) {
                out[c] = xv + dv;
            }
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.rows];
        for comp in &self.components {
            let xc: Vec<Complex64> = comp.cols.iter().map(|&c| x[c]).collect();
            let mut r = vec![ZERO; comp.rows.len()];
            comp.a.mul(&xc, &mut r);
            for (&row, v) in comp.rows.iter().zip(r) {
                out[row] = v;
            }
        }
        out
    }

    /// `‖Ax − y‖₂`.
    pub fn residual_norm(&self, x: &[Complex64]) -> f64 {
        self.apply(x)
            .iter()
            .zip(&self.y)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Solver for one component and the rank of its block.
fn factorize(sc: &SparseColumns, policy: RankPolicy, rows: &[usize]) -> Result<(Solve, usize)> {
    let a = sc.to_dense();
    let gram = &a * a.adjoint();
    let m = gram.nrows();
    let c = gram.trace().re / m as f64;
    if c > 0.0 {
        let dev = max_modulus(&(&gram - DMatrix::<Complex64>::identity(m, m) * Complex64::new(c, 0.0)));
        if dev <= 1e-12 * c {
            return Ok((Solve::Scaled(1.0 / c), m));
        }
    }
    match policy {
        RankPolicy::FullRowRank => {
            let chol = gram.clone().cholesky().ok_or_else(|| {
                Error::Singular(format!("AA* is not positive definite on rows {rows:?}"))
            })?;
            let inv = chol.inverse();
            // reject numerically singular Gram matrices that slip through Cholesky
            let cond = max_modulus(&inv) * max_modulus(&gram);
            if !cond.is_finite() || cond > 1e12 {
                return Err(Error::Singular(format!("AA* is ill-conditioned (≈{cond:.2e})")));
            }
            Ok((Solve::Pinv(a.adjoint() * inv), m))
        }
        RankPolicy::LeastSquares => {
            let svd = a.clone().svd(true, true);
            let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
            let cut = 1e-10 * smax.max(f64::MIN_POSITIVE);
            let rank = svd.singular_values.iter().filter(|&&s| s > cut).count();
            let pinv = svd.pseudo_inverse(cut).map_err(|e| Error::Singular(e.to_string()))?;
            Ok((Solve::Pinv(pinv), rank))
        }
    }
}

fn max_modulus(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}
