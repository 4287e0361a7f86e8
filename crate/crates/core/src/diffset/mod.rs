//! Cyclic `(N, K, λ)` difference sets.
//!
//! A subset `K ⊂ Z_N` of size `K` is a difference set when every nonzero
//! residue occurs as `(u − w) mod N`, `u ≠ w ∈ K`, exactly `λ` times.
//! Verification is exact integer counting.

mod catalog;
mod search;

pub use catalog::{catalog_lookup, Catalog, CatalogEntry};
pub use search::{exhaustive_search, search_parameters, SearchOutcome};

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft::dft;
use crate::error::{Error, Result};

/// Certified `(N, K, λ)` triple: `K(K−1) = λ(N−1)` and `1 ≤ λ ≤ K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DifferenceSetParams {
    n: usize,
    k: usize,
    lambda: usize,
}

impl DifferenceSetParams {
    pub fn new(n: usize, k: usize, lambda: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("modulus must be at least 2, got {n}")));
        }
        if k == 0 || k > n {
            return Err(Error::invalid(format!("set size {k} outside 1..={n}")));
        }
        if lambda == 0 || lambda > k {
            return Err(Error::invalid(format!("lambda {lambda} outside 1..={k}")));
        }
        if k * (k - 1) != lambda * (n - 1) {
            return Err(Error::invalid(format!(
                "K(K-1) = {} but lambda(N-1) = {}",
                k * (k - 1),
                lambda * (n - 1)
            )));
        }
        Ok(Self { n, k, lambda })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }
}

impl std::fmt::Display for DifferenceSetParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.n, self.k, self.lambda)
    }
}

/// The only admissible parameters for a `K`-subset of `Z_N`, if any.
pub fn derive_params(n: usize, k: usize) -> Option<DifferenceSetParams> {
    if n < 2 || k == 0 || k > n {
        return None;
    }
    let num = k * (k - 1);
    if !num.is_multiple_of(n - 1) {
        return None;
    }
    DifferenceSetParams::new(n, k, num / (n - 1)).ok()
}

/// Outcome of counting the pairwise differences of a subset of `Z_N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub n: usize,
    pub k: usize,
    pub is_difference_set: bool,
    /// Multiplicity of every nonzero residue `1..N`.
    pub difference_counts: BTreeMap<usize, usize>,
    pub inferred_lambda: Option<usize>,
    /// Whether `(N, K, inferred_lambda)` also satisfies the counting identities.
    pub params_consistent: bool,
}

fn check_subset(n: usize, subset: &[usize]) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("modulus must be at least 2, got {n}")));
    }
    let mut seen = vec![false; n];
    for &e in subset {
        if e >= n {
            return Err(Error::invalid(format!("residue {e} out of range 0..{n}")));
        }
        if std::mem::replace(&mut seen[e], true) {
            return Err(Error::invalid(format!("duplicate element {e}")));
        }
    }
    Ok(())
}

pub fn verify_difference_set(n: usize, subset: &[usize]) -> Result<VerificationReport> {
    check_subset(n, subset)?;
    let mut counts = vec![0usize; n];
    for &u in subset {
        for &w in subset {
            if u != w {
                counts[(u + n - w) % n] += 1;
            }
        }
    }
    let difference_counts: BTreeMap<usize, usize> = (1..n).map(|d| (d, counts[d])).collect();
    let first = counts[1];
    let uniform = counts[1..].iter().all(|&c| c == first);
    // λ = 0 (a single element) is not a difference set.
    let inferred_lambda = (uniform && first > 0).then_some(first);
    let params_consistent = inferred_lambda
        .map(|l| DifferenceSetParams::new(n, subset.len(), l).is_ok())
        .unwrap_or(false);
    Ok(VerificationReport {
        n,
        k: subset.len(),
        is_difference_set: inferred_lambda.is_some(),
        difference_counts,
        inferred_lambda,
        params_consistent,
    })
}

/// A verified cyclic difference set with sorted elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DifferenceSet {
    elements: Vec<usize>,
    params: DifferenceSetParams,
}

impl DifferenceSet {
    /// Verifies `elements` and certifies its parameters.
    pub fn new(n: usize, elements: &[usize]) -> Result<Self> {
        let report = verify_difference_set(n, elements)?;
        let lambda = report.inferred_lambda.ok_or_else(|| {
            Error::invalid(format!("{elements:?} is not a difference set mod {n}"))
        })?;
        let params = DifferenceSetParams::new(n, elements.len(), lambda)?;
        let mut elements = elements.to_vec();
        elements.sort_unstable();
        Ok(Self { elements, params })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn lambda(&self) -> usize {
        self.params.lambda
    }

    pub fn params(&self) -> DifferenceSetParams {
        self.params
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn contains(&self, e: usize) -> bool {
        self.elements.binary_search(&(e % self.n())).is_ok()
    }

    /// `K + t mod N`, again a difference set with the same parameters.
    pub fn translate(&self, t: usize) -> DifferenceSet {
        let n = self.n();
        let mut elements: Vec<usize> = self.elements.iter().map(|&e| (e + t) % n).collect();
        elements.sort_unstable();
        DifferenceSet { elements, params: self.params }
    }

    pub fn characteristic(&self) -> Vec<Complex64> {
        let mut chi = vec![Complex64::new(0.0, 0.0); self.n()];
        for &e in &self.elements {
            chi[e] = Complex64::new(1.0, 0.0);
        }
        chi
    }
}

impl std::fmt::Display for DifferenceSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let elems: Vec<String> = self.elements.iter().map(|e| e.to_string()).collect();
        write!(f, "{} {} {} : {}", self.n(), self.k(), self.lambda(), elems.join(","))
    }
}

fn is_prime(q: usize) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

/// Nonzero quadratic residues mod a prime `q ≡ 3 (mod 4)`, a
/// `(q, (q−1)/2, (q−3)/4)` difference set.
pub fn quadratic_residue_set(q: usize) -> Result<DifferenceSet> {
    if !is_prime(q) || q % 4 != 3 {
        return Err(Error::unsupported(format!("{q} is not a prime congruent to 3 mod 4")));
    }
    if q < 7 {
        // q = 3 gives the single residue {1}, λ = 0.
        return Err(Error::unsupported(format!("q = {q} yields a degenerate set")));
    }
    let mut residues: Vec<usize> = (1..q).map(|x| x * x % q).collect();
    residues.sort_unstable();
    residues.dedup();
    DifferenceSet::new(q, &residues)
}

/// `χ_K / √K`.
pub fn normalized_generator(ds: &DifferenceSet) -> Vec<Complex64> {
    let scale = 1.0 / (ds.k() as f64).sqrt();
    ds.characteristic().into_iter().map(|c| c * scale).collect()
}

/// `|χ̂_K(j)|` for every `j`; equals `K` at zero and `√(K−λ)` elsewhere.
pub fn dft_magnitudes(ds: &DifferenceSet) -> Vec<f64> {
    dft(&ds.characteristic()).into_iter().map(|c| c.norm()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seven_three_one_all_counts_one() {
        let r = verify_difference_set(7, &[1, 2, 4]).unwrap();
        assert!(r.is_difference_set);
        assert_eq!(r.inferred_lambda, Some(1));
        assert_eq!(r.difference_counts.len(), 6);
        assert!(r.difference_counts.values().all(|&c| c == 1));
    }

    #[test]
    fn one_two_three_is_not_a_difference_set() {
        let r = verify_difference_set(7, &[1, 2, 3]).unwrap();
        assert!(!r.is_difference_set);
        assert_eq!(r.difference_counts[&1], 2);
        assert_eq!(r.difference_counts[&3], 0);
        assert_eq!(r.difference_counts[&2], 1);
        assert_eq!(r.inferred_lambda, None);
    }

    #[test]
    fn whole_group_mod_two() {
        let r = verify_difference_set(2, &[0, 1]).unwrap();
        assert!(r.is_difference_set);
        assert_eq!(r.inferred_lambda, Some(2));
        // (2,2,2): 2·1 = 2·1 and λ ≤ K both hold.
        assert!(r.params_consistent);
    }

    #[test]
    fn singleton_is_rejected() {
        let r = verify_difference_set(5, &[3]).unwrap();
        assert!(!r.is_difference_set);
        assert!(DifferenceSet::new(5, &[3]).is_err());
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(verify_difference_set(7, &[1, 1, 2]), Err(Error::InvalidInput(_))));
        assert!(matches!(verify_difference_set(7, &[1, 7]), Err(Error::InvalidInput(_))));
        assert!(matches!(verify_difference_set(1, &[0]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn derive_params_examples() {
        assert_eq!(derive_params(7, 3).unwrap().lambda(), 1);
        assert_eq!(derive_params(43, 21).unwrap().lambda(), 10);
        assert_eq!(derive_params(7, 4).unwrap().lambda(), 2);
        assert!(derive_params(6, 3).is_none());
        assert!(derive_params(10, 4).is_none());
        assert!(derive_params(7, 1).is_none());
        assert!(derive_params(7, 8).is_none());
    }

    #[test]
    fn params_constructor_rejects_broken_identity() {
        assert!(DifferenceSetParams::new(10, 4, 1).is_err());
        assert!(DifferenceSetParams::new(7, 3, 1).is_ok());
    }

    #[test]
    fn quadratic_residues() {
        assert_eq!(quadratic_residue_set(7).unwrap().elements(), &[1, 2, 4]);
        let qr11 = quadratic_residue_set(11).unwrap();
        assert_eq!(qr11.elements(), &[1, 3, 4, 5, 9]);
        assert_eq!((qr11.k(), qr11.lambda()), (5, 2));
        let qr43 = quadratic_residue_set(43).unwrap();
        assert_eq!((qr43.n(), qr43.k(), qr43.lambda()), (43, 21, 10));
    }

    #[test]
    fn quadratic_residue_rejects() {
        for q in [3, 4, 13, 15, 21] {
            assert!(
                matches!(quadratic_residue_set(q), Err(Error::UnsupportedParameters(_))),
                "q = {q}"
            );
        }
    }

    #[test]
    fn quadratic_residues_verify_up_to_200() {
        for q in (7..200).filter(|&q| is_prime(q) && q % 4 == 3) {
            let ds = quadratic_residue_set(q).unwrap();
            assert_eq!(ds.lambda(), (q - 3) / 4);
            assert_eq!(derive_params(q, ds.k()), Some(ds.params()));
        }
    }

    #[test]
    fn generator_values() {
        let ds = DifferenceSet::new(7, &[1, 2, 4]).unwrap();
        let v = normalized_generator(&ds);
        let s = 1.0 / 3f64.sqrt();
        let expected = [0.0, s, s, 0.0, s, 0.0, 0.0];
        for (a, b) in v.iter().zip(expected) {
            assert_eq!(a.im, 0.0);
            assert!((a.re - b).abs() < 1e-15);
        }
        let ds3 = DifferenceSet::new(3, &[0, 1]).unwrap();
        let v3 = normalized_generator(&ds3);
        let h = 1.0 / 2f64.sqrt();
        assert!((v3[0].re - h).abs() < 1e-15 && (v3[1].re - h).abs() < 1e-15);
        assert_eq!(v3[2].norm(), 0.0);
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dft_magnitudes_match_closed_form() {
        let ds = DifferenceSet::new(7, &[1, 2, 4]).unwrap();
        let m = dft_magnitudes(&ds);
        assert!((m[0] - 3.0).abs() < 1e-12);
        for &x in &m[1..] {
            assert!((x - 2f64.sqrt()).abs() < 1e-10);
        }
        let ds = quadratic_residue_set(11).unwrap();
        for &x in &dft_magnitudes(&ds)[1..] {
            assert!((x * x - 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn translate_keeps_params() {
        let ds = DifferenceSet::new(7, &[1, 2, 4]).unwrap();
        let t = ds.translate(5);
        assert_eq!(t.elements(), &[0, 2, 6]);
        assert!(verify_difference_set(7, t.elements()).unwrap().is_difference_set);
    }
}
