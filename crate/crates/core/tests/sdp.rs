mod common;

use common::*;
use freecomp::linalg::{self, HermitianMatrix};
use freecomp::sdp::{self, SdpProblem, SdpStatus, SolverOptions};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    let g = ginibre(rng, n, n);
    HermitianMatrix::new((&g + &g.adjoint()).scale(0.5)).unwrap()
}

/// `maximize b·y s.t. −I ⪯ Σ yᵢFᵢ ⪯ F0` with `F0` positive definite, so
/// `y = 0` is strictly feasible and the feasible set is bounded.
fn random_problem(rng: &mut ChaCha8Rng, m: usize, n: usize) -> SdpProblem {
    let coeffs: Vec<HermitianMatrix> = (0..m).map(|_| random_hermitian(rng, n)).collect();
    let f0 = random_state(rng, n, n).into_matrix().add(&HermitianMatrix::identity(n).scale(0.1));
    let mut p = SdpProblem::new((0..m).map(|_| rng.gen_range(-1.0..1.0)).collect());
    p.add_block(f0, coeffs.clone());
    p.add_block(HermitianMatrix::identity(n), coeffs.iter().map(|f| f.scale(-1.0)).collect());
    p
}

fn relative_gap(sol: &sdp::SdpSolution) -> f64 {
    (sol.primal_value - sol.dual_value) / (1.0 + sol.primal_value.abs() + sol.dual_value.abs())
}

proptest! {
    #![proptest_config(ProptestConfig {
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..ProptestConfig::with_cases(48)
    })]

    #[test]
    fn weak_duality_and_feasibility(seed in any::<u64>(), m in 1usize..=6, n in 2usize..=4) {
        let mut rng = rng(seed);
        // more than n² coefficient matrices would leave a null direction
        let p = random_problem(&mut rng, m.min(n * n), n);
        let opts = SolverOptions::default();
        let sol = sdp::solve(&p, &opts).unwrap();
        prop_assert_eq!(sol.status, SdpStatus::Optimal);
        prop_assert!(relative_gap(&sol) <= opts.gap_tol, "primal {} dual {}", sol.primal_value, sol.dual_value);
        for b in &p.blocks {
            prop_assert!(linalg::is_psd(&b.slack(&sol.y), opts.feas_tol).unwrap());
        }
        // y = 0 is feasible, so the optimum is at least 0
        prop_assert!(sol.primal_value >= -1e-8);
    }

    #[test]
    fn scaling_the_objective(seed in any::<u64>(), c in 0.1f64..10.0) {
        let mut rng = rng(seed);
        let d = rng.gen_range(2..=4);
        let rho = random_state(&mut rng, d, d);
        let sigma = random_state(&mut rng, d, d);
        let p = sdp::singleton_gamma_problem(rho.matrix(), sigma.matrix());
        let mut scaled = p.clone();
        scaled.objective.iter_mut().for_each(|b| *b *= c);
        let opts = SolverOptions::default();
        let a = sdp::solve(&p, &opts).unwrap();
        let b = sdp::solve(&scaled, &opts).unwrap();
        prop_assert!(a.is_optimal() && b.is_optimal());
        prop_assert!((b.primal_value - c * a.primal_value).abs() <= 1e-7 * c.max(1.0));
        prop_assert!((a.y[0] - b.y[0]).abs() <= 1e-7);
    }

    #[test]
    fn equality_elimination_lifts_to_feasible_points(seed in any::<u64>(), m in 2usize..=6, rows in 1usize..=3) {
        let mut rng = rng(seed);
        let rows = rows.min(m - 1);
        let mut p = random_problem(&mut rng, m, 3);
        for _ in 0..rows {
            let a: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            // right-hand sides consistent with y = 0
            p.add_equality(a, 0.0);
        }
        let red = sdp::eliminate_equalities(&p).unwrap();
        prop_assert_eq!(red.problem.num_vars(), m - rows);
        let t: Vec<f64> = (0..m - rows).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = red.lift(&t);
        for e in &p.equalities {
            let lhs: f64 = e.a.iter().zip(&y).map(|(a, b)| a * b).sum();
            prop_assert!((lhs - e.c).abs() <= 1e-12);
        }
        let sol = sdp::solve(&p, &SolverOptions::default()).unwrap();
        prop_assert_eq!(sol.status, SdpStatus::Optimal);
        for e in &p.equalities {
            let lhs: f64 = e.a.iter().zip(&sol.y).map(|(a, b)| a * b).sum();
            prop_assert!((lhs - e.c).abs() <= 1e-9);
        }
    }
}

#[test]
fn json_dump_solves_identically() {
    let mut rng = rng(3);
    for _ in 0..10 {
        let p = random_problem(&mut rng, 4, 3);
        let back = SdpProblem::from_json(&p.to_json()).unwrap();
        let opts = SolverOptions::default();
        let a = sdp::solve(&p, &opts).unwrap();
        let b = sdp::solve(&back, &opts).unwrap();
        assert!((a.primal_value - b.primal_value).abs() < 1e-9);
    }
}

#[test]
fn complex_blocks_use_the_imaginary_part() {
    // maximize y s.t. [[1, −iy], [iy, 1]] ⪰ 0 has optimum 1
    let f = HermitianMatrix::new(freecomp::linalg::ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => freecomp::linalg::C64::new(0.0, 1.0),
        (1, 0) => freecomp::linalg::C64::new(0.0, -1.0),
        _ => freecomp::linalg::C64::new(0.0, 0.0),
    }))
    .unwrap();
    let mut p = SdpProblem::new(vec![1.0]);
    p.add_block(HermitianMatrix::identity(2), vec![f]);
    let sol = sdp::solve(&p, &SolverOptions::default()).unwrap();
    assert!(sol.is_optimal());
    assert!((sol.primal_value - 1.0).abs() < 1e-7);
}
