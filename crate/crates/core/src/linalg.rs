//! Dense complex linear algebra: matrices, Hermitian eigendecomposition,
//! Kronecker products, partial trace and partial transpose.
//!
//! Everything here is dense and sized for desk-scale problems (dimension up
//! to a few dozen). Matrices are immutable values once built.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Relative asymmetry beyond which a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-8;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-14;

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real rows; convenient for literals in tests.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(*v, 0.0);
        }
        m
    }

    /// Outer product |u⟩⟨v|.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_c(C64::new(s, 0.0))
    }

    pub fn scale_c(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Hilbert–Schmidt inner product tr(A† B).
    pub fn inner(&self, other: &Self) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Matrix–vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// ⟨u|M|v⟩.
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> C64 {
        let mv = self.apply(v);
        u.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Partial trace over one factor of a `dims.0 × dims.1` bipartite operator.
    pub fn partial_trace(&self, dims: (usize, usize), keep: Subsystem) -> Result<Self> {
        let (da, db) = dims;
        check_bipartite(self, da, db)?;
        Ok(match keep {
            Subsystem::A => Self::from_fn(da, da, |i, j| {
                (0..db).map(|k| self[(i * db + k, j * db + k)]).sum()
            }),
            Subsystem::B => Self::from_fn(db, db, |i, j| {
                (0..da).map(|k| self[(k * db + i, k * db + j)]).sum()
            }),
        })
    }

    /// Transpose of one tensor factor of a bipartite operator.
    pub fn partial_transpose(&self, dims: (usize, usize), on: Subsystem) -> Result<Self> {
        let (da, db) = dims;
        check_bipartite(self, da, db)?;
        Ok(Self::from_fn(da * db, da * db, |r, c| {
            let (a, b) = (r / db, r % db);
            let (a2, b2) = (c / db, c % db);
            match on {
                Subsystem::A => self[(a2 * db + b, a * db + b2)],
                Subsystem::B => self[(a * db + b2, a2 * db + b)],
            }
        }))
    }

    /// Reorders tensor factors. `perm[k]` names the old factor placed at
    /// new position `k`. Only square operators on a product space.
    pub fn permute_subsystems(&self, dims: &[usize], perm: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !self.is_square() || self.rows != total || perm.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot permute {}x{} over factors {dims:?}",
                self.rows, self.cols
            )));
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
        let map = |idx: usize| -> usize {
            // idx in the new ordering -> idx in the old ordering
            let mut digits = vec![0; dims.len()];
            let mut rem = idx;
            for k in (0..new_dims.len()).rev() {
                digits[perm[k]] = rem % new_dims[k];
                rem /= new_dims[k];
            }
            digits.iter().zip(dims).fold(0, |acc, (d, n)| acc * n + d)
        };
        let index: Vec<usize> = (0..total).map(map).collect();
        Ok(Self::from_fn(total, total, |i, j| self[(index[i], index[j])]))
    }
}

fn check_bipartite(m: &ComplexMatrix, da: usize, db: usize) -> Result<()> {
    if !m.is_square() || m.rows != da * db {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator is not on a {da}x{db} bipartite space",
            m.rows, m.cols
        )));
    }
    Ok(())
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>9.5}{:+.5}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Which factor of a bipartite space an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Square complex matrix equal to its conjugate transpose.
///
/// Construction symmetrizes `(M + M†)/2`; inputs whose asymmetry exceeds
/// [`HERMITIAN_TOL`] relative to their largest entry are rejected.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        let defect = m.hermitian_defect();
        if defect > HERMITIAN_TOL * m.max_abs().max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without checking; for matrices Hermitian by construction.
    pub(crate) fn symmetrized(m: ComplexMatrix) -> Self {
        let n = m.rows;
        let sym = ComplexMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
        Self(sym)
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(ComplexMatrix::zeros(n, n))
    }

    pub fn diag(values: &[f64]) -> Self {
        Self(ComplexMatrix::diag_real(values))
    }

    /// Rank-one projector-like matrix |v⟩⟨v| (not normalized).
    pub fn outer(v: &[C64]) -> Self {
        Self::symmetrized(ComplexMatrix::outer(v, v))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Real Hilbert–Schmidt inner product tr(A B).
    pub fn inner(&self, other: &Self) -> f64 {
        self.0.inner(&other.0).re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kron(&other.0))
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// U M U†.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self::symmetrized(&(u * &self.0) * &u.adjoint())
    }

    pub fn partial_trace(&self, dims: (usize, usize), keep: Subsystem) -> Result<Self> {
        self.0.partial_trace(dims, keep).map(Self::symmetrized)
    }

    pub fn partial_transpose(&self, dims: (usize, usize), on: Subsystem) -> Result<Self> {
        self.0.partial_transpose(dims, on).map(Self::symmetrized)
    }

    pub fn permute_subsystems(&self, dims: &[usize], perm: &[usize]) -> Result<Self> {
        self.0.permute_subsystems(dims, perm).map(Self)
    }

    pub fn eig(&self) -> Result<Spectrum> {
        eig_hermitian(self)
    }

    /// Applies a real function to the spectrum: V f(Λ) V†.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let spec = self.eig()?;
        Ok(spec.reconstruct_with(f))
    }

    /// Square root of a PSD matrix; eigenvalues down to −1e-10 are clamped.
    pub fn sqrt_psd(&self) -> Result<Self> {
        self.map_spectrum(|x| if x > 0.0 { x.sqrt() } else { 0.0 })
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hermitian{:?}", self.0)
    }
}

/// Eigenvalues in descending order with the matching unitary of column eigenvectors.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Spectrum {
    pub fn max(&self) -> f64 {
        self.values[0]
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("empty spectrum")
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vi * v[(j, k)].conj();
                }
            }
        }
        HermitianMatrix::symmetrized(out)
    }

    /// Projector onto eigenvectors with eigenvalue above `cutoff`.
    pub fn support_projector(&self, cutoff: f64) -> HermitianMatrix {
        self.reconstruct_with(|x| if x > cutoff { 1.0 } else { 0.0 })
    }

    /// Columns spanning the eigenspaces with eigenvalue above `cutoff`.
    pub fn support_basis(&self, cutoff: f64) -> ComplexMatrix {
        let n = self.values.len();
        let keep: Vec<usize> = (0..n).filter(|&k| self.values[k] > cutoff).collect();
        ComplexMatrix::from_fn(n, keep.len(), |i, j| self.vectors[(i, keep[j])])
    }
}

/// Full spectral decomposition by cyclic complex Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius mass drops below
/// `1e-14·‖M‖_F`; fails after 100 sweeps.
pub fn eig_hermitian(m: &HermitianMatrix) -> Result<Spectrum> {
    let n = m.dim();
    let mut a = m.0.clone();
    let mut v = ComplexMatrix::identity(n);
    let norm = a.frobenius_norm();
    let target = JACOBI_REL_TOL * norm;

    let off = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = norm == 0.0 || n < 2;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                rotate(&mut a, &mut v, p, q, apq, mag);
            }
        }
        converged = off(&a) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(Spectrum { values, vectors })
}

// One two-sided rotation zeroing a[p][q]: phase-align the pair, then a real
// Jacobi rotation. A ← U†AU, V ← VU with U = diag(1, e^{-iφ})·R.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, apq: C64, mag: f64) {
    let n = a.rows;
    let phase = apq / mag;
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let e = phase.conj();
    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = e * (-s);
    let u_qq = e * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

pub fn partial_trace(m: &HermitianMatrix, dims: (usize, usize), keep: Subsystem) -> Result<HermitianMatrix> {
    m.partial_trace(dims, keep)
}

pub fn partial_transpose(m: &HermitianMatrix, dims: (usize, usize), on: Subsystem) -> Result<HermitianMatrix> {
    m.partial_transpose(dims, on)
}

pub fn min_eigenvalue(m: &HermitianMatrix) -> Result<f64> {
    Ok(eig_hermitian(m)?.min())
}

pub fn max_eigenvalue(m: &HermitianMatrix) -> Result<f64> {
    Ok(eig_hermitian(m)?.max())
}

/// `min_eigenvalue(m) ≥ −tol`.
pub fn is_psd(m: &HermitianMatrix, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(m)? >= -tol)
}

/// On-disk matrix format: `{"dim": n, "re": [[...]], "im": [[...]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &HermitianMatrix) -> Self {
        let n = m.dim();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        Self { dim: n, re, im }
    }

    pub fn to_matrix(&self) -> Result<HermitianMatrix> {
        let n = self.dim;
        let rows_ok = self.re.len() == n && self.re.iter().all(|r| r.len() == n);
        let im_ok = self.im.is_empty() || (self.im.len() == n && self.im.iter().all(|r| r.len() == n));
        if n == 0 || !rows_ok || !im_ok {
            return Err(Error::DimensionMismatch(format!("matrix JSON rows do not match dim {n}")));
        }
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            let im = if self.im.is_empty() { 0.0 } else { self.im[i][j] };
            C64::new(self.re[i][j], im)
        });
        HermitianMatrix::new(m)
    }

    pub fn parse(text: &str) -> Result<HermitianMatrix> {
        let json: Self = serde_json::from_str(text)?;
        json.to_matrix()
    }

    pub fn render(m: &HermitianMatrix) -> String {
        serde_json::to_string(&Self::from_matrix(m)).expect("matrix serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pauli_y() -> HermitianMatrix {
        HermitianMatrix::new(ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, -1.0),
            (1, 0) => C64::new(0.0, 1.0),
            _ => ZERO,
        }))
        .unwrap()
    }

    #[test]
    fn identity_and_pauli_spectra() {
        let spec = HermitianMatrix::identity(2).eig().unwrap();
        assert_eq!(spec.values, vec![1.0, 1.0]);
        let z = HermitianMatrix::diag(&[1.0, -1.0]);
        let spec = z.eig().unwrap();
        assert_abs_diff_eq!(spec.values[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(spec.values[1], -1.0, epsilon = 1e-15);
        let spec = pauli_y().eig().unwrap();
        assert_abs_diff_eq!(spec.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(spec.values[1], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn amplitude_damped_plus_min_eigenvalue() {
        let nu: f64 = 0.5;
        let off = (1.0 - nu).sqrt() / 2.0;
        let rho = HermitianMatrix::new(ComplexMatrix::from_real_rows(&[
            &[(1.0 + nu) / 2.0, off],
            &[off, (1.0 - nu) / 2.0],
        ]))
        .unwrap();
        let expected = (1.0 - (1.0 - nu + nu * nu).sqrt()) / 2.0;
        assert_abs_diff_eq!(min_eigenvalue(&rho).unwrap(), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 0.066_987_298_107_780_67, epsilon = 1e-15);
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let a = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let b = ComplexMatrix::diag_real(&[0.0, 1.0]);
        assert_eq!(kron(&a, &b), ComplexMatrix::diag_real(&[0.0, 1.0, 0.0, 0.0]));
    }

    fn bell() -> HermitianMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = vec![C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)];
        HermitianMatrix::outer(&v)
    }

    #[test]
    fn maximally_entangled_marginals_and_partial_transpose() {
        let phi = bell();
        let half = HermitianMatrix::diag(&[0.5, 0.5]);
        for keep in [Subsystem::A, Subsystem::B] {
            let m = partial_trace(&phi, (2, 2), keep).unwrap();
            assert!((m.matrix() - half.matrix()).max_abs() < 1e-15);
        }
        let pt = partial_transpose(&phi, (2, 2), Subsystem::B).unwrap();
        assert_abs_diff_eq!(min_eigenvalue(&pt).unwrap(), -0.5, epsilon = 1e-14);
        let back = partial_transpose(&pt, (2, 2), Subsystem::B).unwrap();
        assert!((back.matrix() - phi.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn partial_transpose_of_product_transposes_factor() {
        let rho = HermitianMatrix::diag(&[0.3, 0.7]);
        let sigma = pauli_y().scale(0.2).add(&HermitianMatrix::identity(2).scale(0.5));
        let pt = rho.kron(&sigma).partial_transpose((2, 2), Subsystem::B).unwrap();
        let expected = rho.kron(&sigma.transpose());
        assert!((pt.matrix() - expected.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = HermitianMatrix::identity(6);
        assert!(matches!(m.partial_trace((4, 2), Subsystem::A), Err(Error::DimensionMismatch(_))));
        assert!(m.partial_transpose((3, 3), Subsystem::B).is_err());
    }

    #[test]
    fn psd_predicate() {
        assert!(is_psd(&HermitianMatrix::identity(3), 1e-9).unwrap());
        let rho = HermitianMatrix::diag(&[0.25, 0.75]);
        assert!(!is_psd(&rho.sub(&rho.scale(1.01)), 1e-9).unwrap());
    }

    #[test]
    fn hermiticity_is_enforced() {
        let bad = ComplexMatrix::from_real_rows(&[&[1.0, 0.5], &[0.0, 1.0]]);
        assert!(matches!(HermitianMatrix::new(bad), Err(Error::NotHermitian(_))));
        let slightly = ComplexMatrix::from_real_rows(&[&[1.0, 0.5 + 1e-12], &[0.5, 1.0]]);
        let h = HermitianMatrix::new(slightly).unwrap();
        assert_eq!(h[(0, 1)], h[(1, 0)].conj());
    }

    #[test]
    fn permute_swaps_factors() {
        let a = HermitianMatrix::diag(&[1.0, 2.0]);
        let b = HermitianMatrix::diag(&[3.0, 5.0, 7.0]);
        let ab = a.kron(&b);
        let ba = ab.permute_subsystems(&[2, 3], &[1, 0]).unwrap();
        assert!((ba.matrix() - b.kron(&a).matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let m = pauli_y().add(&HermitianMatrix::diag(&[0.5, -0.25]));
        let text = MatrixJson::render(&m);
        let back = MatrixJson::parse(&text).unwrap();
        assert!((back.matrix() - m.matrix()).max_abs() < 1e-15);
        let bad = r#"{"dim": 2, "re": [[1, 2], [0, 1]], "im": [[0,0],[0,0]]}"#;
        assert!(matches!(MatrixJson::parse(bad), Err(Error::NotHermitian(_))));
        let short = r#"{"dim": 3, "re": [[1, 0], [0, 1]]}"#;
        assert!(MatrixJson::parse(short).is_err());
    }
}
