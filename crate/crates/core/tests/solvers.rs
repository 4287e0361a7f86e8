mod common;

use common::{feasibility_gap, l1_oracle, TinyInstance};
use diffset_frames::diffset::DifferenceSet;
use diffset_frames::experiments::{normalized_squared_error, random_k_sparse_signal};
use diffset_frames::gabor::{GaborFrame, Generator};
use diffset_frames::solvers::*;
use nalgebra::DVector;
use num_complex::Complex64;

#[test]
fn tiny_instances_match_enumeration_oracle() {
    for seed in 0..40 {
        let inst = TinyInstance::random(seed);
        let best = l1_oracle(&inst.a, &inst.y).expect("instances are consistent");
        let a = inst.complex_matrix();
        let y = inst.complex_y();
        let res = basis_pursuit(&a, &y, &SolverConfig::default()).unwrap();
        assert!(res.converged(), "seed {seed}: {:?}", res.status);
        assert!(feasibility_gap(&a, &res.solution, &y) < 1e-8, "seed {seed}");
        let obj = l1_norm(&res.solution);
        assert!((obj - best).abs() < 1e-6, "seed {seed}: admm {obj} vs oracle {best}");
    }
}

#[test]
fn tiny_instances_without_refit() {
    let cfg = SolverConfig { polish_every: 0, max_iters: 20_000, ..Default::default() };
    for seed in 100..110 {
        let inst = TinyInstance::random(seed);
        let best = l1_oracle(&inst.a, &inst.y).unwrap();
        let res = basis_pursuit(&inst.complex_matrix(), &inst.complex_y(), &cfg).unwrap();
        assert!((l1_norm(&res.solution) - best).abs() < 1e-6, "seed {seed}");
    }
}

#[test]
fn combined_residual_is_monotone() {
    let cfg = SolverConfig { polish_every: 0, ..Default::default() };
    for seed in 0..10 {
        let inst = TinyInstance::random(seed);
        let res = basis_pursuit(&inst.complex_matrix(), &inst.complex_y(), &cfg).unwrap();
        let combined: Vec<f64> = res
            .history
            .iter()
            .step_by(10)
            .map(|(r, s)| (r * r + (s / cfg.rho).powi(2)).sqrt())
            .collect();
        for w in combined.windows(2) {
            assert!(w[1] <= 1.1 * w[0] + 1e-15, "seed {seed}: {} after {}", w[1], w[0]);
        }
    }
}

#[test]
fn singleton_blocks_reduce_to_basis_pursuit() {
    let frame = GaborFrame::new(Generator::alltop(7).unwrap()).unwrap();
    for seed in 0..5 {
        let x = random_k_sparse_signal(49, 2, seed).unwrap();
        let y = (frame.matrix() * DVector::from_column_slice(&x)).as_slice().to_vec();
        let cfg = SolverConfig::default();
        let plain = basis_pursuit(frame.matrix(), &y, &cfg).unwrap();
        let block = block_basis_pursuit(frame.matrix(), &y, &BlockStructure::singletons(49), &cfg).unwrap();
        for (p, q) in plain.solution.iter().zip(&block.solution) {
            assert!((p - q).norm() < 1e-8);
        }
    }
}

#[test]
fn block_solver_matches_oracle_on_coordinate_blocks() {
    // blocks of size 2 over a diagonal system decouple into per-block norms
    let a = nalgebra::DMatrix::from_row_slice(2, 4, &[
        1.0, 0.0, 1.0, 0.0,
        0.0, 1.0, 0.0, 2.0,
    ])
    .map(|v| Complex64::new(v, 0.0));
    let y = [Complex64::new(3.0, 0.0), Complex64::new(4.0, 0.0)];
    let res = block_basis_pursuit(&a, &y, &BlockStructure::uniform(4, 2).unwrap(), &SolverConfig::default()).unwrap();
    assert!(res.converged());
    let mixed = BlockStructure::uniform(4, 2).unwrap().mixed_norm(&res.solution);
    // minimize ‖(3−s, 4−2t)‖ + ‖(s, t)‖ over (s,t): the second block scales y by
    // (1, 1/2), so all mass goes there: ‖(3, 2)‖ = √13
    assert!((mixed - 13f64.sqrt()).abs() < 1e-6, "{mixed}");
    assert!(feasibility_gap(&a, &res.solution, &y) < 1e-8);
}

#[test]
fn guaranteed_regime_on_small_frame() {
    // (7,3,1): μ = √(4/18), so k = 1 lies below (1 + 1/μ)/2
    let ds = DifferenceSet::new(7, &[1, 2, 4]).unwrap();
    let frame = GaborFrame::new(Generator::difference_set(&ds)).unwrap();
    for seed in 0..30 {
        let x = random_k_sparse_signal(49, 1, seed).unwrap();
        let y = (frame.matrix() * DVector::from_column_slice(&x)).as_slice().to_vec();
        let res = basis_pursuit(frame.matrix(), &y, &SolverConfig::default()).unwrap();
        assert!(normalized_squared_error(&res.solution, &x).unwrap() < 1e-8);
    }
}

#[test]
fn fusion_recovery_when_overdetermined() {
    use diffset_frames::experiments::random_fusion_sparse_signal;
    use diffset_frames::fusion::GaborFusionFrame;
    let ff = GaborFusionFrame::new(&DifferenceSet::new(7, &[1, 2, 4]).unwrap());
    let op = assemble_fusion_operator(&gaussian_measurement_coefficients(7, 7, 3), &ff).unwrap();
    let blocks = op.blocks();
    let cfg = SolverConfig { allow_rank_deficient: true, ..Default::default() };
    for k in 1..=7 {
        let x = random_fusion_sparse_signal(&blocks, k, k as u64, false).unwrap();
        let y = op.apply(&x);
        let res = block_basis_pursuit(op.effective(), &y, &blocks, &cfg).unwrap();
        assert!(normalized_squared_error(&res.solution, &x).unwrap() < 1e-10);
    }
}

#[test]
fn rank_deficient_matrix_needs_flag() {
    let a = nalgebra::DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0]).map(|v| Complex64::new(v, 0.0));
    let y = [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)];
    assert!(basis_pursuit(&a, &y, &SolverConfig::default()).is_err());
    let cfg = SolverConfig { allow_rank_deficient: true, ..Default::default() };
    let res = basis_pursuit(&a, &y, &cfg).unwrap();
    assert!((l1_norm(&res.solution) - 1.0).abs() < 1e-6);
    let bad = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    assert!(basis_pursuit(&a, &bad, &cfg).is_err());
}
