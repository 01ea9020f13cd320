//! Small dense semidefinite-program solver.
//!
//! Problems are posed in inequality form
//!
//! ```text
//!   maximize    b·y
//!   subject to  F0 − Σᵢ yᵢ Fᵢ ⪰ 0          (one such LMI per block)
//!               yᵢ ≥ 0                     (for nonnegative variables)
//!               a·y = c                    (equalities)
//! ```
//!
//! with Hermitian block data. Nonnegative variables become 1×1 blocks,
//! equalities are eliminated by row reduction, Hermitian blocks are embedded
//! as real symmetric blocks, and the result is handed to a primal-dual
//! interior-point method on the homogeneous self-dual embedding with
//! Nesterov–Todd scaling and a Mehrotra predictor-corrector.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, HermitianMatrix, MatrixJson, C64};

pub const DEFAULT_GAP_TOL: f64 = 1e-8;
pub const DEFAULT_FEAS_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 200;
const STEP_FRACTION: f64 = 0.98;
const PIVOT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarSign {
    Free,
    Nonnegative,
}

/// One linear matrix inequality `F0 − Σ yᵢ Fᵢ ⪰ 0`; `coeffs[i]` is `Fᵢ`.
#[derive(Clone, Debug)]
pub struct LmiBlock {
    pub f0: HermitianMatrix,
    pub coeffs: Vec<HermitianMatrix>,
}

impl LmiBlock {
    pub fn dim(&self) -> usize {
        self.f0.dim()
    }

    /// `F0 − Σ yᵢ Fᵢ`.
    pub fn slack(&self, y: &[f64]) -> HermitianMatrix {
        let mut m = self.f0.matrix().clone();
        for (f, &yi) in self.coeffs.iter().zip(y) {
            if yi != 0.0 {
                m = &m - &f.matrix().scale(yi);
            }
        }
        HermitianMatrix::symmetrized(m)
    }
}

/// `a·y = c`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Equality {
    pub a: Vec<f64>,
    pub c: f64,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub objective: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
    pub signs: Vec<VarSign>,
    pub equalities: Vec<Equality>,
}

impl SdpProblem {
    /// Problem with `num_vars` free variables and no constraints yet.
    pub fn new(objective: Vec<f64>) -> Self {
        let m = objective.len();
        Self { objective, blocks: Vec::new(), signs: vec![VarSign::Free; m], equalities: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_block(&mut self, f0: HermitianMatrix, coeffs: Vec<HermitianMatrix>) -> &mut Self {
        self.blocks.push(LmiBlock { f0, coeffs });
        self
    }

    pub fn add_equality(&mut self, a: Vec<f64>, c: f64) -> &mut Self {
        self.equalities.push(Equality { a, c });
        self
    }

    pub fn set_nonnegative(&mut self, i: usize) -> &mut Self {
        self.signs[i] = VarSign::Nonnegative;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.num_vars();
        if m == 0 {
            return Err(Error::Domain("SDP needs at least one variable".into()));
        }
        if self.signs.len() != m {
            return Err(Error::DimensionMismatch(format!("{} sign flags for {m} variables", self.signs.len())));
        }
        for (k, b) in self.blocks.iter().enumerate() {
            if b.coeffs.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "block {k} has {} coefficient matrices for {m} variables",
                    b.coeffs.len()
                )));
            }
            if b.coeffs.iter().any(|f| f.dim() != b.dim()) {
                return Err(Error::DimensionMismatch(format!("block {k} mixes matrix dimensions")));
            }
        }
        if let Some(e) = self.equalities.iter().find(|e| e.a.len() != m) {
            return Err(Error::DimensionMismatch(format!("equality row of length {} for {m} variables", e.a.len())));
        }
        Ok(())
    }

    /// Replaces sign constraints with 1×1 blocks `yᵢ ≥ 0`.
    pub fn encode_signs(&self) -> SdpProblem {
        let m = self.num_vars();
        let mut out = self.clone();
        for (i, s) in self.signs.iter().enumerate() {
            if *s == VarSign::Nonnegative {
                let coeffs = (0..m)
                    .map(|j| HermitianMatrix::diag(&[if i == j { -1.0 } else { 0.0 }]))
                    .collect();
                out.blocks.push(LmiBlock { f0: HermitianMatrix::zeros(1), coeffs });
            }
        }
        out.signs = vec![VarSign::Free; m];
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SdpProblemJson::from(self)).expect("problem serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SdpProblemJson = serde_json::from_str(text)?;
        let p = raw.into_problem()?;
        p.validate()?;
        Ok(p)
    }
}

#[derive(Serialize, Deserialize)]
struct BlockJson {
    f0: MatrixJson,
    coeffs: Vec<MatrixJson>,
}

/// Debug dump format; mirrors [`SdpProblem`] field by field.
#[derive(Serialize, Deserialize)]
struct SdpProblemJson {
    objective: Vec<f64>,
    blocks: Vec<BlockJson>,
    signs: Vec<VarSign>,
    equalities: Vec<Equality>,
}

impl From<&SdpProblem> for SdpProblemJson {
    fn from(p: &SdpProblem) -> Self {
        Self {
            objective: p.objective.clone(),
            blocks: p
                .blocks
                .iter()
                .map(|b| BlockJson {
                    f0: MatrixJson::from_matrix(&b.f0),
                    coeffs: b.coeffs.iter().map(MatrixJson::from_matrix).collect(),
                })
                .collect(),
            signs: p.signs.clone(),
            equalities: p.equalities.clone(),
        }
    }
}

impl SdpProblemJson {
    fn into_problem(self) -> Result<SdpProblem> {
        let blocks = self
            .blocks
            .into_iter()
            .map(|b| {
                Ok(LmiBlock {
                    f0: b.f0.to_matrix()?,
                    coeffs: b.coeffs.iter().map(MatrixJson::to_matrix).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(SdpProblem { objective: self.objective, blocks, signs: self.signs, equalities: self.equalities })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub y: Vec<f64>,
    /// `b·y` at the returned point.
    pub primal_value: f64,
    /// Objective of the conic dual; an upper bound on the optimum.
    pub dual_value: f64,
    pub gap: f64,
    pub status: SdpStatus,
    /// Minimum eigenvalue of `F0 − Σ yᵢ Fᵢ` per block, original blocks first,
    /// then one entry per nonnegative variable.
    pub certificate: Vec<f64>,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }

    /// Converts a non-optimal status into an error.
    pub fn require_optimal(self) -> Result<Self> {
        match self.status {
            SdpStatus::Optimal => Ok(self),
            s => Err(Error::Solver(format!(
                "status {s:?} after {} iterations (gap {:.2e})",
                self.iterations, self.gap
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Duality gap tolerance, relative to `1 + |primal| + |dual|`.
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { gap_tol: DEFAULT_GAP_TOL, feas_tol: DEFAULT_FEAS_TOL, max_iter: DEFAULT_MAX_ITER }
    }
}

impl SolverOptions {
    /// Defaults, with `SOLVER_GAP_TOL` from the environment when set.
    pub fn from_env() -> Self {
        let mut o = Self::default();
        if let Some(tol) = std::env::var("SOLVER_GAP_TOL").ok().and_then(|v| v.parse::<f64>().ok()) {
            if tol > 0.0 && tol.is_finite() {
                o.gap_tol = tol;
            }
        }
        o
    }
}

/// Affine reparametrization `y = offset + basis·t` of the equality-feasible set.
#[derive(Clone, Debug)]
pub struct Reduction {
    /// Equivalent problem in the free parameters `t`, no equalities left.
    pub problem: SdpProblem,
    pub offset: Vec<f64>,
    /// `basis[i][k]`: coefficient of `t_k` in `y_i`.
    pub basis: Vec<Vec<f64>>,
    /// `b·offset`, the constant dropped from the reduced objective.
    pub objective_offset: f64,
}

impl Reduction {
    pub fn lift(&self, t: &[f64]) -> Vec<f64> {
        self.offset
            .iter()
            .zip(&self.basis)
            .map(|(o, row)| o + row.iter().zip(t).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }
}

/// Eliminates the equality constraints of `p` via row reduction with
/// partial pivoting. Sign flags must already be encoded as blocks.
pub fn eliminate_equalities(p: &SdpProblem) -> Result<Reduction> {
    if p.signs.iter().any(|s| *s == VarSign::Nonnegative) {
        return Err(Error::Domain("encode sign constraints before eliminating equalities".into()));
    }
    let m = p.num_vars();
    let rows = p.equalities.len();
    let scale = p
        .equalities
        .iter()
        .flat_map(|e| e.a.iter().map(|x| x.abs()))
        .fold(1.0_f64, f64::max);

    // augmented matrix [A | c]
    let mut a: Vec<Vec<f64>> = p.equalities.iter().map(|e| {
        let mut r = e.a.clone();
        r.push(e.c);
        r
    }).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m {
        if row == rows {
            break;
        }
        let (best, val) = (row..rows)
            .map(|r| (r, a[r][col].abs()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= PIVOT_TOL * scale {
            continue;
        }
        a.swap(row, best);
        let piv = a[row][col];
        for v in a[row].iter_mut() {
            *v /= piv;
        }
        for r in 0..rows {
            if r != row {
                let f = a[r][col];
                if f != 0.0 {
                    for k in 0..=m {
                        a[r][k] -= f * a[row][k];
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let rhs_scale = p.equalities.iter().map(|e| e.c.abs()).fold(1.0_f64, f64::max);
    if a[row..].iter().any(|r| r[m].abs() > 1e-9 * rhs_scale) {
        return Err(Error::Solver("inconsistent equality constraints (Infeasible)".into()));
    }

    let free: Vec<usize> = (0..m).filter(|c| !pivots.contains(c)).collect();
    let mut offset = vec![0.0; m];
    for (r, &pc) in pivots.iter().enumerate() {
        offset[pc] = a[r][m];
    }
    // y_pivot = c_r − Σ_free a[r][f] t_f ; y_free = t_f
    let mut basis = vec![vec![0.0; free.len()]; m];
    for (k, &f) in free.iter().enumerate() {
        basis[f][k] = 1.0;
        for (r, &pc) in pivots.iter().enumerate() {
            basis[pc][k] = -a[r][f];
        }
    }

    let combine = |mats: &[HermitianMatrix], w: &[f64]| -> ComplexMatrix {
        let n = mats[0].dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (mat, &wi) in mats.iter().zip(w) {
            if wi != 0.0 {
                out = &out + &mat.matrix().scale(wi);
            }
        }
        out
    };

    let blocks = p
        .blocks
        .iter()
        .map(|b| {
            let shift = combine(&b.coeffs, &offset);
            let f0 = HermitianMatrix::symmetrized(b.f0.matrix() - &shift);
            let coeffs = (0..free.len())
                .map(|k| {
                    let w: Vec<f64> = basis.iter().map(|row| row[k]).collect();
                    HermitianMatrix::symmetrized(combine(&b.coeffs, &w))
                })
                .collect();
            LmiBlock { f0, coeffs }
        })
        .collect();
    let objective: Vec<f64> = (0..free.len())
        .map(|k| basis.iter().zip(&p.objective).map(|(row, bi)| row[k] * bi).sum())
        .collect();
    let objective_offset = offset.iter().zip(&p.objective).map(|(a, b)| a * b).sum();
    let nv = objective.len();
    Ok(Reduction {
        problem: SdpProblem { objective, blocks, signs: vec![VarSign::Free; nv], equalities: Vec::new() },
        offset,
        basis,
        objective_offset,
    })
}

/// `H ↦ [[Re H, −Im H], [Im H, Re H]]`.
pub fn real_embed(h: &HermitianMatrix) -> DMatrix<f64> {
    let n = h.dim();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// A real symmetric LMI block; `coeffs` holds only the nonzero `Fᵢ`.
#[derive(Clone, Debug)]
pub struct RealLmiBlock {
    pub f0: DMatrix<f64>,
    pub coeffs: Vec<(usize, DMatrix<f64>)>,
}

/// Embeds a Hermitian block. Real blocks (no imaginary parts) are kept at
/// their original size since the doubled copy carries no information.
pub fn real_embed_block(block: &LmiBlock) -> RealLmiBlock {
    let is_real = std::iter::once(&block.f0)
        .chain(&block.coeffs)
        .all(|h| h.matrix().as_slice().iter().all(|z| z.im == 0.0));
    let embed = |h: &HermitianMatrix| -> DMatrix<f64> {
        if is_real {
            let n = h.dim();
            DMatrix::from_fn(n, n, |i, j| h[(i, j)].re)
        } else {
            real_embed(h)
        }
    };
    let coeffs = block
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, f)| f.matrix().max_abs() > 0.0)
        .map(|(i, f)| (i, embed(f)))
        .collect();
    RealLmiBlock { f0: embed(&block.f0), coeffs }
}

/// Solves `p`. Non-optimal outcomes are reported through `status`; only
/// malformed input is an `Err`.
pub fn solve(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    p.validate()?;
    let encoded = p.encode_signs();
    let reduction = match eliminate_equalities(&encoded) {
        Ok(r) => r,
        Err(Error::Solver(_)) => {
            return Ok(SdpSolution {
                y: vec![0.0; p.num_vars()],
                primal_value: f64::NEG_INFINITY,
                dual_value: f64::NEG_INFINITY,
                gap: f64::INFINITY,
                status: SdpStatus::Infeasible,
                certificate: Vec::new(),
                iterations: 0,
            })
        }
        Err(e) => return Err(e),
    };
    let reduced = &reduction.problem;

    let (t, dual_reduced, status, iterations) = if reduced.num_vars() == 0 {
        // fully pinned: only a feasibility check remains
        let feasible = reduced
            .blocks
            .iter()
            .map(|b| linalg::min_eigenvalue(&b.f0))
            .collect::<Result<Vec<_>>>()?
            .iter()
            .all(|&v| v >= -opts.feas_tol);
        let st = if feasible { SdpStatus::Optimal } else { SdpStatus::Infeasible };
        (Vec::new(), 0.0, st, 0)
    } else {
        let blocks: Vec<RealLmiBlock> = reduced.blocks.iter().map(real_embed_block).collect();
        let out = ConeSolver::new(&reduced.objective, &blocks, opts).run();
        (out.x, out.dual_value, out.status, out.iterations)
    };

    let y = if t.is_empty() { reduction.offset.clone() } else { reduction.lift(&t) };
    let certificate = encoded
        .blocks
        .iter()
        .map(|b| linalg::min_eigenvalue(&b.slack(&y)))
        .collect::<Result<Vec<_>>>()?;
    let primal_value: f64 = y.iter().zip(&p.objective).map(|(a, b)| a * b).sum();
    let dual_value = dual_reduced + reduction.objective_offset;
    let dual_value = if reduced.num_vars() == 0 { primal_value } else { dual_value };
    let gap = (dual_value - primal_value).abs();

    let mut status = status;
    if status == SdpStatus::Optimal
        && (gap > opts.gap_tol * (1.0 + primal_value.abs() + dual_value.abs())
            || certificate.iter().any(|&c| c < -opts.feas_tol))
    {
        status = SdpStatus::IterLimit;
    }
    Ok(SdpSolution { y, primal_value, dual_value, gap, status, certificate, iterations })
}

struct ConeOutcome {
    x: Vec<f64>,
    dual_value: f64,
    status: SdpStatus,
    iterations: usize,
}

/// Per-block Nesterov–Todd scaling: `s = R Λ Rᵀ`, `z = R⁻ᵀ Λ R⁻¹`.
struct Scaling {
    r: DMatrix<f64>,
    rinv: DMatrix<f64>,
    lambda: DVector<f64>,
}

impl Scaling {
    fn new(s: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<Self> {
        let ls = s.clone().cholesky()?.l();
        let lz = z.clone().cholesky()?.l();
        let prod = lz.transpose() * &ls;
        let svd = prod.svd(true, true);
        let u = svd.u?;
        let vt = svd.v_t?;
        let lambda = svd.singular_values;
        if lambda.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
            return None;
        }
        let inv_sqrt = DMatrix::from_diagonal(&lambda.map(|l| 1.0 / l.sqrt()));
        let r = &ls * vt.transpose() * &inv_sqrt;
        let rinv = &inv_sqrt * u.transpose() * lz.transpose();
        Some(Self { r, rinv, lambda })
    }

    /// Solves `λ∘S = rc` for symmetric `S` (λ diagonal).
    fn lyap_div(&self, rc: &DMatrix<f64>) -> DMatrix<f64> {
        let l = &self.lambda;
        DMatrix::from_fn(rc.nrows(), rc.ncols(), |i, j| 2.0 * rc[(i, j)] / (l[i] + l[j]))
    }

    fn scale_z(&self, dz: &DMatrix<f64>) -> DMatrix<f64> {
        self.r.transpose() * dz * &self.r
    }

    fn unscale_s(&self, ds: &DMatrix<f64>) -> DMatrix<f64> {
        &self.r * ds * self.r.transpose()
    }

    /// `P⁻¹ M P⁻¹` with `P = R Rᵀ`.
    fn pinv_sandwich(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let inner = &self.rinv * m * self.rinv.transpose();
        self.rinv.transpose() * inner * &self.rinv
    }
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn jordan(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    (a * b + b * a) * 0.5
}

fn dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

fn blocks_dot(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| dot(x, y)).sum()
}

fn blocks_norm(a: &[DMatrix<f64>]) -> f64 {
    blocks_dot(a, a).sqrt()
}

/// Largest step `α ≤ 1/STEP` keeping `Λ + α·D` PSD; `D` in scaled coordinates.
fn max_step(lambda: &DVector<f64>, d: &DMatrix<f64>) -> f64 {
    let n = lambda.len();
    let m = DMatrix::from_fn(n, n, |i, j| d[(i, j)] / (lambda[i] * lambda[j]).sqrt());
    let emin = SymmetricEigen::new(sym(m)).eigenvalues.min();
    if emin < 0.0 {
        -1.0 / emin
    } else {
        f64::INFINITY
    }
}

struct Direction {
    dx: DVector<f64>,
    ds_t: Vec<DMatrix<f64>>,
    dz_t: Vec<DMatrix<f64>>,
    ds: Vec<DMatrix<f64>>,
    dz: Vec<DMatrix<f64>>,
    dtau: f64,
    dkappa: f64,
}

/// Interior-point method for `min cᵀx s.t. Gx + s = h, s ⪰ 0` where
/// `Gx = Σ xᵢ Aᵢ` (per block) and `h = F0`; here `c = −b`.
struct ConeSolver<'a> {
    c: DVector<f64>,
    blocks: &'a [RealLmiBlock],
    opts: &'a SolverOptions,
    m: usize,
}

impl<'a> ConeSolver<'a> {
    fn new(objective: &[f64], blocks: &'a [RealLmiBlock], opts: &'a SolverOptions) -> Self {
        let m = objective.len();
        let c = DVector::from_iterator(m, objective.iter().map(|b| -b));
        Self { c, blocks, opts, m }
    }

    fn g(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.blocks
            .iter()
            .map(|b| {
                let n = b.f0.nrows();
                let mut acc = DMatrix::zeros(n, n);
                for (i, a) in &b.coeffs {
                    if x[*i] != 0.0 {
                        acc += a * x[*i];
                    }
                }
                acc
            })
            .collect()
    }

    fn gt(&self, z: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (b, zk) in self.blocks.iter().zip(z) {
            for (i, a) in &b.coeffs {
                out[*i] += dot(a, zk);
            }
        }
        out
    }

    fn h(&self) -> Vec<DMatrix<f64>> {
        self.blocks.iter().map(|b| b.f0.clone()).collect()
    }

    fn run(&self) -> ConeOutcome {
        let m = self.m;
        let h = self.h();
        let nu: usize = self.blocks.iter().map(|b| b.f0.nrows()).sum();
        let resx0 = self.c.norm().max(1.0);
        let resz0 = blocks_norm(&h).max(1.0);

        let mut x = DVector::<f64>::zeros(m);
        let mut s: Vec<DMatrix<f64>> = h.iter().map(|hk| DMatrix::identity(hk.nrows(), hk.nrows())).collect();
        let mut z = s.clone();
        let mut tau = 1.0;
        let mut kappa = 1.0;

        let mut best: Option<(DVector<f64>, f64)> = None;
        let mut best_merit: Option<(f64, (DVector<f64>, f64))> = None;
        let mut status = SdpStatus::IterLimit;
        let mut iterations = 0;
        // smallest-gap iterate that is feasible to tolerance
        let mut best_near: Option<(f64, (DVector<f64>, f64))> = None;

        for it in 0..=self.opts.max_iter {
            iterations = it;
            let gx = self.g(&x);
            let rx = self.gt(&z) + &self.c * tau;
            let rz: Vec<DMatrix<f64>> =
                gx.iter().zip(&s).zip(&h).map(|((g, sk), hk)| g + sk - hk * tau).collect();
            let cx = self.c.dot(&x);
            let hz = blocks_dot(&h, &z);
            let rt = cx + hz + kappa;
            let sz = blocks_dot(&s, &z);
            let mu = (sz + tau * kappa) / (nu as f64 + 1.0);

            let pcost = cx / tau;
            let dcost = -hz / tau;
            let pres = blocks_norm(&rz) / tau / resz0;
            let dres = rx.norm() / tau / resx0;
            let gap = (pcost - dcost).abs();
            let compl = sz / (tau * tau);

            if pres <= self.opts.feas_tol
                && dres <= self.opts.feas_tol
                && gap <= self.opts.gap_tol * 0.5
                && compl <= self.opts.gap_tol * 0.5
            {
                best = Some((&x / tau, dcost));
                status = SdpStatus::Optimal;
                break;
            }
            // once the residuals start growing again the linear algebra has
            // run out of precision; keep the best iterate seen
            let merit = pres.max(dres).max(gap).max(compl);
            // primal feasibility is rechecked on the slack eigenvalues afterwards
            let near = tau >= kappa
                && pres <= 10.0 * self.opts.feas_tol
                && dres <= 10.0 * self.opts.feas_tol
                && gap <= self.opts.gap_tol * (1.0 + pcost.abs() + dcost.abs());
            if near && best_near.as_ref().map_or(true, |(g, _)| gap < *g) {
                best_near = Some((gap, (&x / tau, dcost)));
            }
            match best_merit {
                _ if tau < kappa => {}
                Some((bm, _)) if merit > 1e3 * bm => break,
                Some((bm, _)) if merit >= bm => {}
                _ => best_merit = Some((merit, (&x / tau, dcost))),
            }
            // infeasibility certificates (unnormalized iterates)
            if hz < 0.0 {
                let pinf = self.gt(&z).norm() / resx0 / (-hz);
                if pinf <= self.opts.feas_tol && tau < kappa {
                    status = SdpStatus::Infeasible;
                    break;
                }
            }
            if cx < 0.0 {
                let dinf = blocks_norm(&gx.iter().zip(&s).map(|(g, sk)| g + sk).collect::<Vec<_>>()) / resz0 / (-cx);
                if dinf <= self.opts.feas_tol && tau < kappa {
                    status = SdpStatus::Unbounded;
                    break;
                }
            }
            if it == self.opts.max_iter {
                break;
            }

            let Some(scalings) = s.iter().zip(&z).map(|(sk, zk)| Scaling::new(sk, zk)).collect::<Option<Vec<_>>>()
            else {
                break;
            };
            let Some(kkt) = self.factor(&scalings, &h) else { break };

            // predictor
            let rc_aff: Vec<DMatrix<f64>> =
                scalings.iter().map(|sc| DMatrix::from_diagonal(&sc.lambda.map(|l| -l * l))).collect();
            let aff = kkt.solve(self, &scalings, &h, &(-&rx), &neg(&rz), -rt, &rc_aff, -tau * kappa, tau, kappa);
            let alpha_aff = self.step_length(&scalings, &aff, tau, kappa).min(1.0);
            let sigma = (1.0 - alpha_aff).clamp(0.0, 1.0).powi(3);

            // corrector
            let rc: Vec<DMatrix<f64>> = scalings
                .iter()
                .zip(aff.ds_t.iter().zip(&aff.dz_t))
                .map(|(sc, (ds, dz))| {
                    let n = sc.lambda.len();
                    let mut r = DMatrix::from_diagonal(&sc.lambda.map(|l| -l * l));
                    for i in 0..n {
                        r[(i, i)] += sigma * mu;
                    }
                    r - jordan(ds, dz)
                })
                .collect();
            let f = 1.0 - sigma;
            let rk = sigma * mu - tau * kappa - aff.dtau * aff.dkappa;
            let dir = kkt.solve(self, &scalings, &h, &(-&rx * f), &scaled(&rz, -f), -rt * f, &rc, rk, tau, kappa);
            let alpha = (STEP_FRACTION * self.step_length(&scalings, &dir, tau, kappa)).min(1.0);
            if !(alpha > 1e-12) {
                break;
            }

            x += &dir.dx * alpha;
            for k in 0..s.len() {
                s[k] = sym(&s[k] + &dir.ds[k] * alpha);
                z[k] = sym(&z[k] + &dir.dz[k] * alpha);
            }
            tau += alpha * dir.dtau;
            kappa += alpha * dir.dkappa;
            if !(tau > 0.0 && kappa > 0.0) || !x.iter().all(|v| v.is_finite()) {
                break;
            }
        }

        // stalled with feasible iterates and a closed gap
        if status == SdpStatus::IterLimit && best.is_none() {
            if let Some((_, b)) = best_near {
                best = Some(b);
                status = SdpStatus::Optimal;
            }
        }
        let (x, dual) = best
            .or_else(|| best_merit.map(|(_, b)| b))
            .unwrap_or((DVector::zeros(m), f64::NAN));
        // dual of the max problem is −(dual of the min problem)
        ConeOutcome { x: x.iter().copied().collect(), dual_value: -dual, status, iterations }
    }

    fn factor(&self, scalings: &[Scaling], h: &[DMatrix<f64>]) -> Option<Kkt> {
        let m = self.m;
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for (b, sc) in self.blocks.iter().zip(scalings) {
            let scaled: Vec<(usize, DMatrix<f64>)> =
                b.coeffs.iter().map(|(i, a)| (*i, &sc.rinv * a * sc.rinv.transpose())).collect();
            for (p, (i, ai)) in scaled.iter().enumerate() {
                for (j, aj) in &scaled[p..] {
                    let v = dot(ai, aj);
                    schur[(*i, *j)] += v;
                    if i != j {
                        schur[(*j, *i)] += v;
                    }
                }
            }
        }
        let diag_max = schur.diagonal().max().max(1e-300);
        let chol = match schur.clone().cholesky() {
            Some(c) => c,
            None => {
                let mut reg = schur;
                for i in 0..m {
                    reg[(i, i)] += 1e-13 * diag_max;
                }
                reg.cholesky()?
            }
        };
        let hp: Vec<DMatrix<f64>> = h.iter().zip(scalings).map(|(hk, sc)| sc.pinv_sandwich(hk)).collect();
        let x2 = chol.solve(&(-&self.c + self.gt(&hp)));
        let gx2 = self.g(&x2);
        let z2: Vec<DMatrix<f64>> = gx2
            .iter()
            .zip(h)
            .zip(scalings)
            .map(|((g, hk), sc)| sc.pinv_sandwich(&(g - hk)))
            .collect();
        let denom_base = self.c.dot(&x2) + blocks_dot(h, &z2);
        Some(Kkt { chol, x2, z2, denom_base })
    }

    fn step_length(&self, scalings: &[Scaling], d: &Direction, tau: f64, kappa: f64) -> f64 {
        let mut a = f64::INFINITY;
        for (sc, (ds, dz)) in scalings.iter().zip(d.ds_t.iter().zip(&d.dz_t)) {
            a = a.min(max_step(&sc.lambda, ds)).min(max_step(&sc.lambda, dz));
        }
        if d.dtau < 0.0 {
            a = a.min(-tau / d.dtau);
        }
        if d.dkappa < 0.0 {
            a = a.min(-kappa / d.dkappa);
        }
        a
    }
}

fn neg(v: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    scaled(v, -1.0)
}

fn scaled(v: &[DMatrix<f64>], f: f64) -> Vec<DMatrix<f64>> {
    v.iter().map(|m| m * f).collect()
}

struct Kkt {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    x2: DVector<f64>,
    z2: Vec<DMatrix<f64>>,
    denom_base: f64,
}

impl Kkt {
    /// Solves the linearized embedding system
    ///
    /// ```text
    ///   Gᵀ Δz + c Δτ        = dx
    ///   G Δx + Δs − h Δτ    = dz
    ///   cᵀΔx + ⟨h,Δz⟩ + Δκ  = dt
    ///   λ∘(Δs̃ + Δz̃)        = rc
    ///   κ Δτ + τ Δκ         = rk
    /// ```
    #[allow(clippy::too_many_arguments)]
    fn solve(
        &self,
        solver: &ConeSolver<'_>,
        scalings: &[Scaling],
        h: &[DMatrix<f64>],
        dx: &DVector<f64>,
        dz: &[DMatrix<f64>],
        dt: f64,
        rc: &[DMatrix<f64>],
        rk: f64,
        tau: f64,
        kappa: f64,
    ) -> Direction {
        let s_dir: Vec<DMatrix<f64>> = scalings.iter().zip(rc).map(|(sc, r)| sc.lyap_div(r)).collect();
        let ez: Vec<DMatrix<f64>> = dz
            .iter()
            .zip(scalings.iter().zip(&s_dir))
            .map(|(d, (sc, sd))| d - sc.unscale_s(sd))
            .collect();
        let pez: Vec<DMatrix<f64>> = ez.iter().zip(scalings).map(|(e, sc)| sc.pinv_sandwich(e)).collect();
        let x1 = self.chol.solve(&(dx + solver.gt(&pez)));
        let gx1 = solver.g(&x1);
        let z1: Vec<DMatrix<f64>> = gx1
            .iter()
            .zip(&ez)
            .zip(scalings)
            .map(|((g, e), sc)| sc.pinv_sandwich(&(g - e)))
            .collect();
        let num = dt - rk / tau - solver.c.dot(&x1) - blocks_dot(h, &z1);
        let dtau = num / (self.denom_base - kappa / tau);
        let dkappa = (rk - kappa * dtau) / tau;
        let dxv = &x1 + &self.x2 * dtau;
        let mut ds_t = Vec::with_capacity(scalings.len());
        let mut dz_t = Vec::with_capacity(scalings.len());
        let mut ds_u = Vec::with_capacity(scalings.len());
        let mut dz_u = Vec::with_capacity(scalings.len());
        // Δs from the primal equation keeps the primal residual exact
        let gdx = solver.g(&dxv);
        for (k, sc) in scalings.iter().enumerate() {
            let dzk = sym(&z1[k] + &self.z2[k] * dtau);
            let ds = sym(&dz[k] - &gdx[k] + &h[k] * dtau);
            ds_t.push(sym(&sc.rinv * &ds * sc.rinv.transpose()));
            dz_t.push(sym(sc.scale_z(&dzk)));
            ds_u.push(ds);
            dz_u.push(dzk);
        }
        Direction { dx: dxv, ds_t, dz_t, ds: ds_u, dz: dz_u, dtau, dkappa }
    }
}

/// Basis of the real vector space of `n×n` Hermitian matrices: diagonal
/// units, then symmetric and antisymmetric-imaginary pairs for `j < k`.
pub fn hermitian_basis(n: usize) -> Vec<HermitianMatrix> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut m = ComplexMatrix::zeros(n, n);
        m[(i, i)] = C64::new(1.0, 0.0);
        out.push(HermitianMatrix::symmetrized(m));
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut re = ComplexMatrix::zeros(n, n);
            re[(j, k)] = C64::new(1.0, 0.0);
            re[(k, j)] = C64::new(1.0, 0.0);
            out.push(HermitianMatrix::symmetrized(re));
            let mut im = ComplexMatrix::zeros(n, n);
            im[(j, k)] = C64::new(0.0, 1.0);
            im[(k, j)] = C64::new(0.0, -1.0);
            out.push(HermitianMatrix::symmetrized(im));
        }
    }
    out
}

/// Coordinates of `h` in [`hermitian_basis`].
pub fn hermitian_coords(h: &HermitianMatrix) -> Vec<f64> {
    let n = h.dim();
    let mut out: Vec<f64> = (0..n).map(|i| h[(i, i)].re).collect();
    for j in 0..n {
        for k in j + 1..n {
            out.push(h[(j, k)].re);
            out.push(h[(j, k)].im);
        }
    }
    out
}

/// Inverse of [`hermitian_coords`].
pub fn assemble_hermitian(n: usize, coords: &[f64]) -> HermitianMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C64::new(coords[i], 0.0);
    }
    let mut p = n;
    for j in 0..n {
        for k in j + 1..n {
            let z = C64::new(coords[p], coords[p + 1]);
            m[(j, k)] = z;
            m[(k, j)] = z.conj();
            p += 2;
        }
    }
    HermitianMatrix::symmetrized(m)
}

/// `max γ s.t. ρ − γσ ⪰ 0` as a one-variable SDP.
pub fn singleton_gamma_problem(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> SdpProblem {
    let mut p = SdpProblem::new(vec![1.0]);
    p.add_block(rho.clone(), vec![sigma.clone()]);
    p
}
