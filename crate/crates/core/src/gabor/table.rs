//! Coherence of Gabor systems across the classical difference-set families.

use serde::Serialize;

use super::{ambiguity_coherence, predicted_coherence, GaborFrame, Generator};
use crate::diffset::{catalog_lookup, quadratic_residue_set, DifferenceSet};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `((q^{d+1}−1)/(q−1), (q^d−1)/(q−1), (q^{d−1}−1)/(q−1))`, from the catalog.
    Singer { q: usize, d: u32 },
    /// Quadratic residues mod a prime `q ≡ 3 (mod 4)`.
    Quadratic { q: usize },
    /// Quartic residues mod a prime `p`, from the catalog.
    Quartic { p: usize },
}

impl Family {
    /// Family-level closed form of `μ²`.
    pub fn table_mu_squared(&self) -> f64 {
        match *self {
            Family::Singer { q, d } => {
                let qf = q as f64;
                if d == 2 {
                    qf / (qf + 1.0).powi(2)
                } else {
                    let qd = qf.powi(d as i32);
                    (qd - qf).powi(2) / (qf * qf * (qd - 1.0).powi(2))
                }
            }
            Family::Quadratic { q } => {
                let q = q as f64;
                (q - 3.0).powi(2) / (4.0 * (q - 1.0).powi(2))
            }
            Family::Quartic { p } => {
                let p = p as f64;
                if p < 57.0 {
                    (3.0 * p + 1.0) / (p - 1.0).powi(2)
                } else {
                    (p - 5.0).powi(2) / (16.0 * (p - 1.0).powi(2))
                }
            }
        }
    }

    pub fn difference_set(&self) -> Result<DifferenceSet> {
        match *self {
            Family::Quadratic { q } => quadratic_residue_set(q),
            Family::Singer { q, d } => {
                if q < 2 || d < 2 {
                    return Err(Error::unsupported(format!(
                        "Singer family needs q >= 2, d >= 2 (got q={q}, d={d})"
                    )));
                }
                let geometric = |e: u32| (0..e).map(|i| q.pow(i)).sum::<usize>();
                let (n, k) = (geometric(d + 1), geometric(d));
                catalog_lookup(n, k)
                    .ok_or_else(|| Error::Config(format!("no catalog entry for Singer ({n},{k})")))
            }
            Family::Quartic { p } => {
                if p < 5 || p % 4 != 1 {
                    return Err(Error::unsupported(format!("quartic family needs p = 1 mod 4, got {p}")));
                }
                let k = (p - 1) / 4;
                catalog_lookup(p, k).ok_or_else(|| Error::Config(format!("no catalog entry for ({p},{k})")))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    #[serde(flatten)]
    pub family: Family,
    pub n: usize,
    pub k: usize,
    pub lambda: usize,
    pub mu_squared_measured: f64,
    pub mu_squared_closed_form: f64,
    pub mu_squared_table: f64,
    /// `1/(N+1)`, the squared Welch bound for `N²` vectors in `C^N`.
    pub welch_squared: f64,
}

/// One row per family member, with the coherence measured from the frame.
pub fn family_table(families: &[Family]) -> Result<Vec<TableRow>> {
    families
        .iter()
        .map(|fam| {
            let ds = fam.difference_set()?;
            let frame = GaborFrame::new(Generator::difference_set(&ds))?;
            let measured = ambiguity_coherence(&frame).mutual_coherence;
            Ok(TableRow {
                family: *fam,
                n: ds.n(),
                k: ds.k(),
                lambda: ds.lambda(),
                mu_squared_measured: measured * measured,
                mu_squared_closed_form: predicted_coherence(&ds.params()).powi(2),
                mu_squared_table: fam.table_mu_squared(),
                welch_squared: 1.0 / (ds.n() as f64 + 1.0),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_agree_with_family_formulas() {
        let fams = [
            Family::Quadratic { q: 11 },
            Family::Quadratic { q: 43 },
            Family::Singer { q: 2, d: 2 },
            Family::Singer { q: 3, d: 2 },
            Family::Singer { q: 2, d: 3 },
            Family::Singer { q: 3, d: 3 },
            Family::Quartic { p: 37 },
            Family::Quartic { p: 101 },
        ];
        for row in family_table(&fams).unwrap() {
            assert!((row.mu_squared_measured - row.mu_squared_table).abs() < 1e-12, "{row:?}");
            assert!((row.mu_squared_closed_form - row.mu_squared_table).abs() < 1e-12, "{row:?}");
            assert!(row.mu_squared_measured > row.welch_squared);
        }
    }

    #[test]
    fn missing_catalog_entry() {
        assert!(matches!(Family::Singer { q: 7, d: 2 }.difference_set(), Err(Error::Config(_))));
        assert!(Family::Quartic { p: 7 }.difference_set().is_err());
    }
}
