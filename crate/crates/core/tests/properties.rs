use diffset_frames::diffset::{verify_difference_set, Catalog};
use diffset_frames::fusion::{chordal_distance_squared, GaborFusionFrame};
use diffset_frames::gabor::{ambiguity_coherence, predicted_coherence, GaborFrame, Generator};
use diffset_frames::solvers::{block_soft_threshold, complex_soft_threshold, BlockStructure};
use num_complex::Complex64;
use proptest::prelude::*;

fn catalog_index() -> impl Strategy<Value = usize> {
    0..Catalog::builtin().entries().len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn translates_are_difference_sets(i in catalog_index(), t in 0usize..200) {
        let ds = &Catalog::builtin().entries()[i];
        let shifted = ds.translate(t);
        let report = verify_difference_set(ds.n(), shifted.elements()).unwrap();
        prop_assert!(report.is_difference_set);
        prop_assert_eq!(report.inferred_lambda, Some(ds.lambda()));
    }

    #[test]
    fn gram_is_hermitian(n in 2usize..12, seed in any::<u64>()) {
        let f = GaborFrame::new(Generator::random_torus(n, seed)).unwrap();
        let g = f.matrix().adjoint() * f.matrix();
        for i in 0..g.nrows() {
            for j in 0..i {
                prop_assert!((g[(i, j)] - g[(j, i)].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn every_window_gives_a_tight_frame(n in 2usize..=64, seed in any::<u64>(), scale in 0.1f64..10.0) {
        let g = Generator::random_torus(n, seed).scaled(Complex64::new(scale, 0.0));
        let f = GaborFrame::new(g).unwrap();
        prop_assert!(f.tightness_error() < 1e-9 * scale * scale * n as f64);
    }

    #[test]
    fn fusion_distances_are_constant(i in catalog_index(), a in 0usize..200, b in 0usize..200) {
        let ds = &Catalog::builtin().entries()[i];
        let ff = GaborFusionFrame::new(ds);
        let (a, b) = (a % ds.n(), b % ds.n());
        prop_assume!(a != b);
        let d = chordal_distance_squared(ff.subspace(a), ff.subspace(b)).unwrap();
        prop_assert_eq!(d, ds.k() - ds.lambda());
    }

    #[test]
    fn soft_threshold_is_a_prox(re in -5.0f64..5.0, im in -5.0f64..5.0, tau in 0.0f64..3.0) {
        // prox minimizes τ|w| + ½|w − z|²; compare against nearby points
        let z = Complex64::new(re, im);
        let w = complex_soft_threshold(z, tau);
        let obj = |v: Complex64| tau * v.norm() + 0.5 * (v - z).norm_sqr();
        for dv in [Complex64::new(1e-3, 0.0), Complex64::new(0.0, 1e-3), Complex64::new(-1e-3, 5e-4)] {
            prop_assert!(obj(w) <= obj(w + dv) + 1e-12);
        }
        prop_assert!(w.norm() <= z.norm());
    }

    #[test]
    fn block_threshold_shrinks_norms(vals in prop::collection::vec(-3.0f64..3.0, 6), tau in 0.0f64..2.0) {
        let orig: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v, -v / 2.0)).collect();
        let mut v = orig.clone();
        let blocks = BlockStructure::uniform(6, 3).unwrap();
        block_soft_threshold(&mut v, &blocks, tau);
        for b in 0..2 {
            let r = blocks.range(b);
            let n0: f64 = orig[r.clone()].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let n1: f64 = v[r.clone()].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!((n1 - (n0 - tau).max(0.0)).abs() < 1e-12);
        }
    }
}

#[test]
fn closed_form_holds_across_catalog() {
    for ds in Catalog::builtin().entries() {
        let f = GaborFrame::new(Generator::difference_set(ds)).unwrap();
        let mu = ambiguity_coherence(&f).mutual_coherence;
        let expected = predicted_coherence(&ds.params());
        assert!((mu - expected).abs() < 1e-10, "{ds}: {mu} vs {expected}");
    }
}
