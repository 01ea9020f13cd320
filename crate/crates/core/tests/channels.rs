mod common;

use common::*;
use freecomp::channels::{compose, diamond_distance, tensor, Channel};
use freecomp::linalg::{ComplexMatrix, C64};
use freecomp::states::{DensityMatrix, PureState};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random channel `din → dout` from a random isometry into `dout ⊗ env`.
fn random_rect_channel(rng: &mut ChaCha8Rng, din: usize, dout: usize) -> Channel {
    let env = (din + dout - 1) / dout + rng.gen_range(0..2);
    let v = orthonormalize(ginibre(rng, dout * env, din));
    let kraus: Vec<ComplexMatrix> =
        (0..env).map(|e| ComplexMatrix::from_fn(dout, din, |o, i| v[(o * env + e, i)])).collect();
    Channel::from_kraus(&kraus).unwrap()
}

fn pure(amps: Vec<C64>) -> DensityMatrix {
    PureState::normalized(amps).unwrap().density()
}

/// `N(|i⟩⟨j|)` from outputs on the states |i⟩, |j⟩, |i⟩+|j⟩, |i⟩+i|j⟩.
fn action(apply: &dyn Fn(&DensityMatrix) -> ComplexMatrix, d: usize, i: usize, j: usize) -> ComplexMatrix {
    let basis = |k: usize| pure((0..d).map(|m| C64::new(if m == k { 1.0 } else { 0.0 }, 0.0)).collect());
    if i == j {
        return apply(&basis(i));
    }
    let mut plus = vec![C64::new(0.0, 0.0); d];
    plus[i] = C64::new(1.0, 0.0);
    plus[j] = C64::new(1.0, 0.0);
    let mut y = plus.clone();
    y[j] = C64::new(0.0, 1.0);
    let diag = &apply(&basis(i)) + &apply(&basis(j));
    let combo = &apply(&pure(plus)) + &apply(&pure(y)).scale_c(C64::new(0.0, 1.0));
    &combo - &diag.scale_c(C64::new(0.5, 0.5))
}

/// Unnormalized Choi matrix `Σ N(|i⟩⟨j|) ⊗ |i⟩⟨j|` assembled from state outputs.
fn tomography(apply: &dyn Fn(&DensityMatrix) -> ComplexMatrix, din: usize, dout: usize) -> ComplexMatrix {
    let mut choi = ComplexMatrix::zeros(dout * din, dout * din);
    for i in 0..din {
        for j in 0..din {
            let out = action(apply, din, i, j);
            for o in 0..dout {
                for op in 0..dout {
                    choi[(o * din + i, op * din + j)] = out[(o, op)];
                }
            }
        }
    }
    choi
}

fn apply_fn(n: &Channel) -> impl Fn(&DensityMatrix) -> ComplexMatrix + '_ {
    move |rho| n.apply(rho).unwrap().matrix().matrix().clone()
}

proptest! {
    #![proptest_config(ProptestConfig {
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..ProptestConfig::with_cases(48)
    })]

    #[test]
    fn tomography_of_a_channel_is_its_choi(seed in any::<u64>(), din in 1usize..=3, dout in 1usize..=3) {
        let mut rng = rng(seed);
        let n = random_rect_channel(&mut rng, din, dout);
        let rebuilt = tomography(&apply_fn(&n), din, dout);
        prop_assert!((&rebuilt - n.choi_unnormalized().matrix()).max_abs() <= 1e-9);
    }

    #[test]
    fn composition_matches_tomography(seed in any::<u64>(), d1 in 1usize..=3, d2 in 1usize..=3, d3 in 1usize..=3) {
        let mut rng = rng(seed);
        let n1 = random_rect_channel(&mut rng, d1, d2);
        let n2 = random_rect_channel(&mut rng, d2, d3);
        let sequential = |rho: &DensityMatrix| n2.apply(&n1.apply(rho).unwrap()).unwrap().matrix().matrix().clone();
        let rebuilt = tomography(&sequential, d1, d3);
        let composed = compose(&n2, &n1).unwrap();
        prop_assert_eq!((composed.dim_in(), composed.dim_out()), (d1, d3));
        prop_assert!((&rebuilt - composed.choi_unnormalized().matrix()).max_abs() <= 1e-9);
    }

    #[test]
    fn tensor_matches_tomography(seed in any::<u64>(), a in 1usize..=2, b in 1usize..=3, c in 1usize..=2, e in 1usize..=2) {
        let mut rng = rng(seed);
        let n1 = random_rect_channel(&mut rng, a, b);
        let n2 = random_rect_channel(&mut rng, c, e);
        let t = tensor(&n1, &n2);
        let (din, dout) = (a * c, b * e);
        let mut choi = ComplexMatrix::zeros(dout * din, dout * din);
        for i in 0..a {
            for j in 0..a {
                let x = action(&apply_fn(&n1), a, i, j);
                for k in 0..c {
                    for l in 0..c {
                        let out = x.kron(&action(&apply_fn(&n2), c, k, l));
                        let (row_in, col_in) = (i * c + k, j * c + l);
                        for o in 0..dout {
                            for op in 0..dout {
                                choi[(o * din + row_in, op * din + col_in)] = out[(o, op)];
                            }
                        }
                    }
                }
            }
        }
        prop_assert!((&choi - t.choi_unnormalized().matrix()).max_abs() <= 1e-9);
    }

    #[test]
    fn reference_action_on_maximally_entangled_gives_choi(seed in any::<u64>(), d in 1usize..=3) {
        let mut rng = rng(seed);
        let n = random_channel(&mut rng, d, 2);
        let phi = PureState::maximally_entangled(d).density();
        let out = n.apply_with_reference(&phi, d).unwrap();
        prop_assert!(max_entry_diff(out.matrix(), n.choi().matrix()) <= 1e-12);
    }

    #[test]
    fn mixing_is_linear_in_the_output(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let mut rng = rng(seed);
        let n1 = random_channel(&mut rng, 2, 2);
        let n2 = random_channel(&mut rng, 2, 3);
        let rho = random_state(&mut rng, 2, 2);
        let mixed = n1.mix(p, &n2).unwrap().apply(&rho).unwrap();
        let expected = n1.apply(&rho).unwrap().matrix().scale(p).add(&n2.apply(&rho).unwrap().matrix().scale(1.0 - p));
        prop_assert!(max_entry_diff(mixed.matrix(), &expected) <= 1e-12);
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = random_rect_channel(&mut rng, 2, 3);
        let back = Channel::from_json(&n.to_json()).unwrap();
        prop_assert!(max_entry_diff(back.choi().matrix(), n.choi().matrix()) <= 1e-15);
    }
}

#[test]
fn diamond_distance_of_phase_gates() {
    let id = Channel::identity(2);
    for theta in [0.1, 0.7, 1.5, 2.5, std::f64::consts::PI] {
        let u = ComplexMatrix::diag(&[C64::new(1.0, 0.0), C64::from_polar(1.0, theta)]);
        let d = diamond_distance(&id, &Channel::unitary(&u).unwrap()).unwrap();
        assert!((d - (theta / 2.0).sin().abs()).abs() < 1e-6, "θ = {theta}: {d}");
    }
}

#[test]
fn diamond_distance_bounds_output_distinguishability() {
    let mut rng = rng(5);
    for _ in 0..20 {
        let n = random_channel(&mut rng, 2, 2);
        let m = random_channel(&mut rng, 2, 3);
        let dd = diamond_distance(&n, &m).unwrap();
        assert!((0.0..=1.0 + 1e-7).contains(&dd));
        assert!(diamond_distance(&n, &n).unwrap() < 1e-6);
        let phi = PureState::maximally_entangled(2).density();
        let t = freecomp::states::trace_distance(
            &n.apply_with_reference(&phi, 2).unwrap(),
            &m.apply_with_reference(&phi, 2).unwrap(),
        )
        .unwrap();
        assert!(t <= dd + 1e-6, "{t} > {dd}");
    }
}
