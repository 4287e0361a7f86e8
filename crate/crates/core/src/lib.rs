//! Gabor frames and fusion frames generated by cyclic difference sets.
//!
//! The crate is organised bottom-up:
//!
//! * [`diffset`] constructs, verifies, searches and catalogs `(N, K, λ)`
//!   difference sets in `Z_N`.
//! * [`gabor`] builds the `N × N²` Gabor system of a generator and measures
//!   its mutual coherence against closed forms and the Welch bound.
//! * [`fusion`] views the translates of a difference set as a fusion frame of
//!   coordinate subspaces and checks tightness, equidistance and packing
//!   optimality with exact integer arithmetic.
//! * [`solvers`] holds the ADMM solvers for basis pursuit and mixed `ℓ2/ℓ1`
//!   minimization over complex vectors.
//! * [`experiments`] runs the seeded Monte-Carlo recovery experiments.
//!
//! All vectors are `Complex64`; the DFT convention is
//! `ĝ(j) = Σ_k g(k) exp(−2πi kj/N)` everywhere.

pub mod dft;
pub mod diffset;
pub mod error;
pub mod experiments;
pub mod fusion;
pub mod gabor;
pub mod io;
pub mod solvers;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Crate version, embedded in every machine-readable report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
