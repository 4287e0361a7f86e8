//! Monte-Carlo recovery experiments.
//!
//! Two protocols: classical sparse recovery by basis pursuit from Gabor
//! measurements, and fusion-sparse recovery by mixed-norm minimization from
//! random Gaussian combinations of projections onto a Gabor fusion frame.
//!
//! Every trial draws from its own `ChaCha8Rng`, seeded by [`derive_seed`]
//! from the master seed and a tuple of labels, so results do not depend on
//! the number of worker threads.

mod seed;

pub use seed::derive_seed;

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffset::{catalog_lookup, DifferenceSet};
use crate::error::{Error, Result};
use crate::fusion::GaborFusionFrame;
use crate::gabor::{GaborFrame, Generator};
use crate::solvers::{
    assemble_fusion_operator, basis_pursuit, block_basis_pursuit, gaussian_measurement_coefficients, BlockStructure,
    SolverConfig,
};

pub const DEFAULT_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorChoice {
    Alltop,
    RandomTorus,
    DifferenceSet,
}

impl GeneratorChoice {
    pub const ALL: [GeneratorChoice; 3] = [Self::Alltop, Self::RandomTorus, Self::DifferenceSet];

    pub fn label(&self) -> &'static str {
        match self {
            Self::Alltop => "alltop",
            Self::RandomTorus => "random_torus",
            Self::DifferenceSet => "difference_set",
        }
    }
}

impl std::str::FromStr for GeneratorChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown generator {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicExperimentConfig {
    pub n: usize,
    /// Size of the catalog difference set used by the `difference_set` generator.
    pub set_k: usize,
    pub generators: Vec<GeneratorChoice>,
    pub sparsities: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub threshold: f64,
    pub solver: SolverConfig,
}

impl Default for ClassicExperimentConfig {
    fn default() -> Self {
        Self {
            n: 43,
            set_k: 21,
            generators: GeneratorChoice::ALL.to_vec(),
            sparsities: (1..=43).collect(),
            trials: 50,
            seed: 0,
            threshold: DEFAULT_THRESHOLD,
            solver: SolverConfig::default(),
        }
    }
}

impl ClassicExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.generators.is_empty() {
            return Err(Error::Config("no generators requested".into()));
        }
        let dim = self.n * self.n;
        if let Some(&k) = self.sparsities.iter().find(|&&k| k == 0 || k > dim) {
            return Err(Error::Config(format!("sparsity {k} outside 1..={dim}")));
        }
        if self.threshold.is_nan() || self.threshold <= 0.0 {
            return Err(Error::Config("threshold must be positive".into()));
        }
        self.solver.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FusionExperimentConfig {
    pub n: usize,
    pub k: usize,
    /// Measurement counts; one curve each.
    pub measurements: Vec<usize>,
    /// Fusion sparsity levels (number of active subspaces).
    pub sparsities: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub threshold: f64,
    /// Draw the mixing coefficients `a_ij` as complex circular Gaussians.
    pub complex_coefficients: bool,
    /// Draw signal coefficients as real Gaussians.
    pub real_signal: bool,
    pub solver: SolverConfig,
}

impl Default for FusionExperimentConfig {
    fn default() -> Self {
        Self {
            n: 40,
            k: 13,
            measurements: vec![5, 10, 15, 20],
            sparsities: (1..=40).collect(),
            trials: 50,
            seed: 0,
            threshold: DEFAULT_THRESHOLD,
            complex_coefficients: false,
            real_signal: false,
            solver: SolverConfig { allow_rank_deficient: true, ..SolverConfig::default() },
        }
    }
}

impl FusionExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.measurements.is_empty() || self.measurements.contains(&0) {
            return Err(Error::Config("measurement counts must be positive".into()));
        }
        if let Some(&k) = self.sparsities.iter().find(|&&k| k == 0 || k > self.n) {
            return Err(Error::Config(format!("sparsity {k} outside 1..={}", self.n)));
        }
        if self.threshold.is_nan() || self.threshold <= 0.0 {
            return Err(Error::Config("threshold must be positive".into()));
        }
        self.solver.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: usize,
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
}

impl CurvePoint {
    fn new(x: usize, successes: usize, trials: usize) -> Self {
        Self { x, successes, trials, rate: successes as f64 / trials as f64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveryCurve {
    pub experiment: String,
    pub label: String,
    pub points: Vec<CurvePoint>,
}

impl RecoveryCurve {
    pub fn rate_at(&self, x: usize) -> Option<f64> {
        self.points.iter().find(|p| p.x == x).map(|p| p.rate)
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `k` nonzero entries `r e^{2πiθ}` on a uniform random support, with
/// `r ~ N(0,1)` and `θ ~ U[0,1)`.
pub fn random_k_sparse_signal(dim: usize, k: usize, seed: u64) -> Result<Vec<Complex64>> {
    if k == 0 || k > dim {
        return Err(Error::invalid(format!("sparsity {k} outside 1..={dim}")));
    }
    let mut rng = rng_for(seed);
    let mut support = sample(&mut rng, dim, k).into_vec();
    support.sort_unstable();
    let mut x = vec![Complex64::new(0.0, 0.0); dim];
    for i in support {
        let mut r: f64 = StandardNormal.sample(&mut rng);
        // a zero draw would silently lower the sparsity
        while r == 0.0 {
            r = StandardNormal.sample(&mut rng);
        }
        let theta: f64 = rng.random();
        x[i] = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * theta);
    }
    Ok(x)
}

/// Stacked subspace coefficients with `k` active blocks chosen uniformly;
/// active coefficients are complex circular Gaussian, or real with `real`.
pub fn random_fusion_sparse_signal(blocks: &BlockStructure, k: usize, seed: u64, real: bool) -> Result<Vec<Complex64>> {
    let count = blocks.block_count();
    if k == 0 || k > count {
        return Err(Error::invalid(format!("fusion sparsity {k} outside 1..={count}")));
    }
    let mut rng = rng_for(seed);
    let mut active = sample(&mut rng, count, k).into_vec();
    active.sort_unstable();
    let mut x = vec![Complex64::new(0.0, 0.0); blocks.dim()];
    for b in active {
        loop {
            for c in &mut x[blocks.range(b)] {
                *c = if real { Complex64::new(StandardNormal.sample(&mut rng), 0.0) } else { complex_gaussian(&mut rng) };
            }
            if x[blocks.range(b)].iter().any(|c| c.norm_sqr() > 0.0) {
                break;
            }
        }
    }
    Ok(x)
}

/// `‖x̂ − x‖² / ‖x‖²`.
pub fn normalized_squared_error(estimate: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    if estimate.len() != reference.len() {
        return Err(Error::ShapeMismatch(format!(
            "estimate has length {} but reference has {}",
            estimate.len(),
            reference.len()
        )));
    }
    let den: f64 = reference.iter().map(|c| c.norm_sqr()).sum();
    if den == 0.0 {
        return Err(Error::invalid("reference signal is zero"));
    }
    let num: f64 = estimate.iter().zip(reference).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(num / den)
}

/// Seed for the signal of classic trial `(k, t)`; shared by all generators
/// so every frame sees the same signal.
pub fn classic_signal_seed(master: u64, k: usize, t: usize) -> u64 {
    derive_seed(master, &["classic", "signal"], &[k as u64, t as u64])
}

/// Seed for the per-trial random-torus generator.
pub fn classic_generator_seed(master: u64, k: usize, t: usize) -> u64 {
    derive_seed(master, &["classic", "generator", GeneratorChoice::RandomTorus.label()], &[k as u64, t as u64])
}

pub fn fusion_coefficient_seed(master: u64, n: usize, k: usize, t: usize) -> u64 {
    derive_seed(master, &["fusion", "coefficients"], &[n as u64, k as u64, t as u64])
}

pub fn fusion_signal_seed(master: u64, n: usize, k: usize, t: usize) -> u64 {
    derive_seed(master, &["fusion", "signal"], &[n as u64, k as u64, t as u64])
}

fn lookup(n: usize, k: usize) -> Result<DifferenceSet> {
    catalog_lookup(n, k).ok_or_else(|| Error::Config(format!("no catalog difference set with N={n}, K={k}")))
}

fn recovered(frame: &GaborFrame, x: &[Complex64], cfg: &SolverConfig, threshold: f64) -> Result<bool> {
    let y = frame.matrix() * DVector::from_column_slice(x);
    let res = basis_pursuit(frame.matrix(), y.as_slice(), cfg)?;
    Ok(normalized_squared_error(&res.solution, x)? < threshold)
}

/// One curve per generator, success rate against sparsity `k`.
pub fn run_classic_experiment(cfg: &ClassicExperimentConfig) -> Result<Vec<RecoveryCurve>> {
    cfg.validate()?;
    let n = cfg.n;
    let mut fixed: Vec<Option<GaborFrame>> = Vec::with_capacity(cfg.generators.len());
    for g in &cfg.generators {
        fixed.push(match g {
            GeneratorChoice::Alltop => {
                Some(GaborFrame::new(Generator::alltop(n).map_err(|e| Error::Config(e.to_string()))?)?)
            }
            GeneratorChoice::DifferenceSet => Some(GaborFrame::new(Generator::difference_set(&lookup(n, cfg.set_k)?))?),
            GeneratorChoice::RandomTorus => None,
        });
    }

    let jobs: Vec<(usize, usize)> =
        (0..cfg.sparsities.len()).flat_map(|ki| (0..cfg.trials).map(move |t| (ki, t))).collect();
    let outcomes: Vec<Vec<bool>> = jobs
        .par_iter()
        .map(|&(ki, t)| {
            let k = cfg.sparsities[ki];
            let x = random_k_sparse_signal(n * n, k, classic_signal_seed(cfg.seed, k, t))?;
            fixed
                .iter()
                .map(|frame| match frame {
                    Some(f) => recovered(f, &x, &cfg.solver, cfg.threshold),
                    None => {
                        let f = GaborFrame::new(Generator::random_torus(n, classic_generator_seed(cfg.seed, k, t)))?;
                        recovered(&f, &x, &cfg.solver, cfg.threshold)
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut counts = vec![vec![0usize; cfg.sparsities.len()]; cfg.generators.len()];
    for (&(ki, _), row) in jobs.iter().zip(&outcomes) {
        for (gi, &ok) in row.iter().enumerate() {
            counts[gi][ki] += ok as usize;
        }
    }
    Ok(cfg
        .generators
        .iter()
        .zip(counts)
        .map(|(g, c)| RecoveryCurve {
            experiment: "classic".into(),
            label: g.label().into(),
            points: cfg.sparsities.iter().zip(c).map(|(&k, s)| CurvePoint::new(k, s, cfg.trials)).collect(),
        })
        .collect())
}

/// One curve per measurement count `n`, success rate against fusion sparsity.
pub fn run_fusion_experiment(cfg: &FusionExperimentConfig) -> Result<Vec<RecoveryCurve>> {
    cfg.validate()?;
    let ds = lookup(cfg.n, cfg.k)?;
    let ff = GaborFusionFrame::new(&ds);
    let solver = SolverConfig { allow_rank_deficient: true, ..cfg.solver.clone() };

    let jobs: Vec<(usize, usize, usize)> = (0..cfg.measurements.len())
        .flat_map(|mi| (0..cfg.sparsities.len()).flat_map(move |ki| (0..cfg.trials).map(move |t| (mi, ki, t))))
        .collect();
    let outcomes: Vec<bool> = jobs
        .par_iter()
        .map(|&(mi, ki, t)| {
            let (m, k) = (cfg.measurements[mi], cfg.sparsities[ki]);
            let a = gaussian_measurement_coefficients(m, ff.len(), fusion_coefficient_seed(cfg.seed, m, k, t));
            let mut op = assemble_fusion_operator(&a, &ff)?;
            if cfg.complex_coefficients {
                let b = gaussian_measurement_coefficients(m, ff.len(), fusion_coefficient_seed(cfg.seed ^ 1, m, k, t));
                op = op.with_imaginary_part(&b)?;
            }
            let blocks = op.blocks();
            let x = random_fusion_sparse_signal(&blocks, k, fusion_signal_seed(cfg.seed, m, k, t), cfg.real_signal)?;
            let y = op.apply(&x);
            let res = block_basis_pursuit(op.effective(), &y, &blocks, &solver)?;
            Ok(normalized_squared_error(&res.solution, &x)? < cfg.threshold)
        })
        .collect::<Result<_>>()?;

    let mut counts = vec![vec![0usize; cfg.sparsities.len()]; cfg.measurements.len()];
    for (&(mi, ki, _), &ok) in jobs.iter().zip(&outcomes) {
        counts[mi][ki] += ok as usize;
    }
    Ok(cfg
        .measurements
        .iter()
        .zip(counts)
        .map(|(&m, c)| RecoveryCurve {
            experiment: "fusion".into(),
            label: format!("n={m}"),
            points: cfg.sparsities.iter().zip(c).map(|(&k, s)| CurvePoint::new(k, s, cfg.trials)).collect(),
        })
        .collect())
}

pub const CSV_HEADER: &str = "experiment,label,x,successes,trials,rate";

pub fn format_curves(curves: &[RecoveryCurve]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in curves {
        for p in &c.points {
            writeln!(out, "{},{},{},{},{},{:.6}", c.experiment, c.label, p.x, p.successes, p.trials, p.rate).unwrap();
        }
    }
    out
}

pub fn emit_curves(curves: &[RecoveryCurve], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_curves(curves))?;
    Ok(())
}

/// Points where a curve rises in `x` by more than `slack`; recovery should
/// get harder as sparsity grows.
pub fn sparsity_monotonicity_warnings(curve: &RecoveryCurve, slack: f64) -> Vec<String> {
    let mut pts = curve.points.clone();
    pts.sort_by_key(|p| p.x);
    pts.windows(2)
        .filter(|w| w[1].rate > w[0].rate + slack)
        .map(|w| {
            format!(
                "{} {}: rate rises from {:.3} at x={} to {:.3} at x={}",
                curve.experiment, curve.label, w[0].rate, w[0].x, w[1].rate, w[1].x
            )
        })
        .collect()
}

/// Fusion curves ordered by measurement count: flags any sparsity where more
/// measurements did worse by more than `slack`.
pub fn measurement_monotonicity_warnings(curves: &[(usize, &RecoveryCurve)], slack: f64) -> Vec<String> {
    let mut sorted = curves.to_vec();
    sorted.sort_by_key(|(m, _)| *m);
    let mut out = Vec::new();
    for w in sorted.windows(2) {
        let ((m0, c0), (m1, c1)) = (w[0], w[1]);
        for p in &c0.points {
            if let Some(r1) = c1.rate_at(p.x) {
                if r1 + slack < p.rate {
                    out.push(format!("fusion x={}: n={m1} rate {r1:.3} below n={m0} rate {:.3}", p.x, p.rate));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_signal_has_exact_support_size() {
        for k in [1, 5, 49] {
            let x = random_k_sparse_signal(49, k, 3).unwrap();
            assert_eq!(x.iter().filter(|c| c.norm() > 0.0).count(), k);
        }
        assert_eq!(random_k_sparse_signal(49, 4, 9).unwrap(), random_k_sparse_signal(49, 4, 9).unwrap());
        assert!(random_k_sparse_signal(4, 5, 0).is_err());
        assert!(random_k_sparse_signal(4, 0, 0).is_err());
    }

    #[test]
    fn support_is_uniform() {
        let (dim, k, draws) = (20usize, 3usize, 10_000u64);
        let mut hits = vec![0f64; dim];
        for s in 0..draws {
            for (i, c) in random_k_sparse_signal(dim, k, s).unwrap().iter().enumerate() {
                if c.norm() > 0.0 {
                    hits[i] += 1.0;
                }
            }
        }
        let p = k as f64 / dim as f64;
        let mean = draws as f64 * p;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for h in hits {
            assert!((h - mean).abs() < 3.0 * sd + 1.0, "{h} vs {mean}±{sd}");
        }
    }

    #[test]
    fn fusion_signal_blocks() {
        let blocks = BlockStructure::uniform(21, 3).unwrap();
        for k in 1..=7 {
            let x = random_fusion_sparse_signal(&blocks, k, 4, false).unwrap();
            let active = (0..7).filter(|&b| x[blocks.range(b)].iter().any(|c| c.norm() > 0.0)).count();
            assert_eq!(active, k);
        }
        let r = random_fusion_sparse_signal(&blocks, 2, 4, true).unwrap();
        assert!(r.iter().all(|c| c.im == 0.0));
        assert_eq!(r, random_fusion_sparse_signal(&blocks, 2, 4, true).unwrap());
    }

    #[test]
    fn nse_examples() {
        let x = vec![Complex64::new(1.0, 2.0), Complex64::new(0.0, -1.0)];
        let zero = vec![Complex64::new(0.0, 0.0); 2];
        let double: Vec<_> = x.iter().map(|c| c * 2.0).collect();
        assert_eq!(normalized_squared_error(&x, &x).unwrap(), 0.0);
        assert_eq!(normalized_squared_error(&zero, &x).unwrap(), 1.0);
        assert_eq!(normalized_squared_error(&double, &x).unwrap(), 1.0);
        assert!(normalized_squared_error(&x, &zero).is_err());
    }

    #[test]
    fn small_classic_run() {
        let cfg = ClassicExperimentConfig {
            n: 7,
            set_k: 3,
            generators: vec![GeneratorChoice::DifferenceSet],
            sparsities: vec![1],
            trials: 20,
            seed: 5,
            ..Default::default()
        };
        let curves = run_classic_experiment(&cfg).unwrap();
        assert_eq!(curves.len(), 1);
        assert_eq!(curves[0].points[0].successes, 20);
    }

    #[test]
    fn missing_catalog_entry_is_config_error() {
        let cfg = ClassicExperimentConfig { n: 9, set_k: 4, generators: vec![GeneratorChoice::DifferenceSet], sparsities: vec![1], trials: 1, ..Default::default() };
        assert!(matches!(run_classic_experiment(&cfg), Err(Error::Config(_))));
        let cfg = FusionExperimentConfig { n: 9, k: 4, sparsities: vec![1], ..Default::default() };
        assert!(matches!(run_fusion_experiment(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn csv_format() {
        assert_eq!(format_curves(&[]), format!("{CSV_HEADER}\n"));
        let c = RecoveryCurve { experiment: "classic".into(), label: "alltop".into(), points: vec![CurvePoint::new(3, 2, 3)] };
        assert_eq!(format_curves(&[c]), format!("{CSV_HEADER}\nclassic,alltop,3,2,3,0.666667\n"));
    }

    #[test]
    fn monotonicity_diagnostics() {
        let c = RecoveryCurve {
            experiment: "classic".into(),
            label: "g".into(),
            points: vec![CurvePoint::new(1, 10, 10), CurvePoint::new(2, 2, 10), CurvePoint::new(3, 8, 10)],
        };
        assert_eq!(sparsity_monotonicity_warnings(&c, 0.1).len(), 1);
        assert!(sparsity_monotonicity_warnings(&c, 0.7).is_empty());
    }
}
