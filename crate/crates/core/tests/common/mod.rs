//! Seeded random objects and independent oracles shared by the
//! integration tests. Nothing here calls the eigen-solver or the SDP solver.

#![allow(dead_code)]

use freecomp::channels::Channel;
use freecomp::linalg::{ComplexMatrix, HermitianMatrix, C64};
use freecomp::states::{DensityMatrix, PureState};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Random state of dimension `d` and rank at most `rank`.
pub fn random_state(rng: &mut ChaCha8Rng, d: usize, rank: usize) -> DensityMatrix {
    let g = ginibre(rng, d, rank);
    let m = HermitianMatrix::new(&g * &g.adjoint()).unwrap();
    DensityMatrix::normalized(m).unwrap()
}

pub fn random_pure(rng: &mut ChaCha8Rng, d: usize) -> PureState {
    PureState::normalized((0..d).map(|_| gaussian(rng)).collect()).unwrap()
}

/// Orthonormalizes the columns of a tall matrix (modified Gram–Schmidt).
pub fn orthonormalize(mut a: ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = (a.rows(), a.cols());
    for j in 0..cols {
        for k in 0..j {
            let mut dot = C64::new(0.0, 0.0);
            for i in 0..rows {
                dot += a[(i, k)].conj() * a[(i, j)];
            }
            for i in 0..rows {
                let v = a[(i, k)];
                a[(i, j)] -= dot * v;
            }
        }
        let norm = (0..rows).map(|i| a[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..rows {
            a[(i, j)] /= norm;
        }
    }
    a
}

pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    orthonormalize(ginibre(rng, d, d))
}

/// Random channel `d → d` from a random isometry into `d ⊗ env`.
pub fn random_channel(rng: &mut ChaCha8Rng, d: usize, env: usize) -> Channel {
    let v = orthonormalize(ginibre(rng, d * env, d));
    let kraus: Vec<ComplexMatrix> =
        (0..env).map(|e| ComplexMatrix::from_fn(d, d, |o, i| v[(o * env + e, i)])).collect();
    Channel::from_kraus(&kraus).unwrap()
}

/// Positive definiteness by complex Cholesky, `M = LL†`.
pub fn cholesky_pd(m: &ComplexMatrix) -> bool {
    let n = m.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = m[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if !(diag > 0.0) {
            return false;
        }
        let ljj = diag.sqrt();
        l[(j, j)] = C64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    true
}

/// `M + tol·I` is positive definite.
pub fn psd_within(m: &ComplexMatrix, tol: f64) -> bool {
    let shifted = m + &ComplexMatrix::identity(m.rows()).scale(tol);
    cholesky_pd(&shifted)
}

/// `max{γ ∈ [0, 1] : ρ − γσ ⪰ 0}` by bisection on a Cholesky test.
pub fn bisection_gamma(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    if cholesky_pd(&(rho - sigma)) {
        return 1.0;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if cholesky_pd(&(rho - &sigma.scale(mid))) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn max_entry_diff(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    (a.matrix() - b.matrix()).max_abs()
}

/// Prints a one-line verdict and returns whether it passed.
pub fn report(id: &str, title: &str, ok: bool, detail: &str) -> bool {
    use std::io::Write;
    // written to the handle so libtest does not capture it
    let line = format!("[{}] criterion {id}: {title} ({detail})\n", if ok { "PASS" } else { "FAIL" });
    std::io::stdout().lock().write_all(line.as_bytes()).ok();
    ok
}
