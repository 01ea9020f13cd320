//! Free sets and the free component `Γ_ρ = max{γ : ρ − γσ ⪰ 0, σ ∈ F}`,
//! the maximal overlap `f_ψ = max_{σ∈F} ⟨ψ|σ|ψ⟩`, and related quantities.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::{named_unitary, Channel};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, MatrixJson, Subsystem, C64};
use crate::sdp::{self, SdpProblem, SolverOptions};
use crate::states::{self, DensityMatrix, PureState, RANK_CUTOFF};

/// Probability mass outside `supp(ρ)` tolerated when testing containment.
pub const SUPPORT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum FreeSetKind {
    /// States diagonal in the computational basis of dimension `d`.
    Diagonal(usize),
    /// Convex hull of the listed states (or Choi states).
    VertexHull(Vec<DensityMatrix>),
    /// A single full-rank free state, e.g. a thermal state.
    GibbsSingleton(DensityMatrix),
    /// Choi states of PPT channels from `dim_a` to `dim_b`, ordered (B ⊗ A).
    PptChoi { dim_a: usize, dim_b: usize },
}

#[derive(Clone, Debug)]
pub struct FreeSetDescriptor {
    pub kind: FreeSetKind,
    pub label: String,
}

impl FreeSetDescriptor {
    pub fn coherence(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        Ok(Self { kind: FreeSetKind::Diagonal(d), label: format!("coherence:{d}") })
    }

    pub fn hull(vertices: Vec<DensityMatrix>, label: impl Into<String>) -> Result<Self> {
        let first = vertices.first().ok_or_else(|| Error::Domain("vertex hull needs at least one vertex".into()))?;
        let d = first.dim();
        if vertices.iter().any(|v| v.dim() != d) {
            return Err(Error::DimensionMismatch("hull vertices differ in dimension".into()));
        }
        Ok(Self { kind: FreeSetKind::VertexHull(vertices), label: label.into() })
    }

    /// Hull of the six single-qubit stabilizer states.
    pub fn stabilizer_1q() -> Self {
        let v = stabilizer_states_1q().iter().map(PureState::density).collect();
        Self { kind: FreeSetKind::VertexHull(v), label: "stab1q".into() }
    }

    /// Hull of the 24 single-qubit Clifford Choi states.
    pub fn clifford_1q() -> Self {
        let v = clifford_group_1q().into_iter().map(|c| c.choi().clone()).collect();
        Self { kind: FreeSetKind::VertexHull(v), label: "clifford1q".into() }
    }

    pub fn gibbs(sigma: DensityMatrix) -> Result<Self> {
        if states::min_nonzero_eigenvalue(&sigma)? <= RANK_CUTOFF || sigma.matrix().eig()?.min() <= RANK_CUTOFF {
            return Err(Error::InvalidState("singleton free state must have full rank".into()));
        }
        Ok(Self { kind: FreeSetKind::GibbsSingleton(sigma), label: "gibbs".into() })
    }

    pub fn ppt(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::Domain("dimensions must be positive".into()));
        }
        Ok(Self { kind: FreeSetKind::PptChoi { dim_a, dim_b }, label: format!("ppt:{dim_a},{dim_b}") })
    }

    /// Dimension of the states in the set.
    pub fn dim(&self) -> usize {
        match &self.kind {
            FreeSetKind::Diagonal(d) => *d,
            FreeSetKind::VertexHull(v) => v[0].dim(),
            FreeSetKind::GibbsSingleton(s) => s.dim(),
            FreeSetKind::PptChoi { dim_a, dim_b } => dim_a * dim_b,
        }
    }

    /// Extreme points when the set is a polytope.
    pub fn vertices(&self) -> Option<Vec<DensityMatrix>> {
        match &self.kind {
            FreeSetKind::Diagonal(d) => Some((0..*d).map(|k| PureState::basis(*d, k).density()).collect()),
            FreeSetKind::VertexHull(v) => Some(v.clone()),
            FreeSetKind::GibbsSingleton(s) => Some(vec![s.clone()]),
            FreeSetKind::PptChoi { .. } => None,
        }
    }

    /// Parses `coherence:d`, `stab1q`, `clifford1q`, `ppt:dA,dB`,
    /// `gibbs:<hamiltonian.json>:<beta>` or `hull:<vertices.json>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, param) = match spec.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (spec, None),
        };
        let name = name.trim().to_ascii_lowercase();
        match name.as_str() {
            "coherence" | "diagonal" => Self::coherence(states::parse_usize(states::required(&name, param)?)?),
            "stab1q" => Ok(Self::stabilizer_1q()),
            "clifford1q" => Ok(Self::clifford_1q()),
            "ppt" => {
                let p = states::required(&name, param)?;
                let (a, b) = p.split_once(',').ok_or_else(|| Error::Parse(format!("ppt needs `dA,dB`, got {p:?}")))?;
                Self::ppt(states::parse_usize(a)?, states::parse_usize(b)?)
            }
            "gibbs" => {
                let p = states::required(&name, param)?;
                let (file, beta) = p
                    .rsplit_once(':')
                    .ok_or_else(|| Error::Parse(format!("gibbs needs `<file>:<beta>`, got {p:?}")))?;
                let h = MatrixJson::parse(&read_file(file)?)?;
                let mut set = Self::gibbs(states::gibbs_state(&h, states::parse_f64(beta)?)?)?;
                set.label = format!("gibbs:{beta}");
                Ok(set)
            }
            "hull" => {
                let file = states::required(&name, param)?;
                let vertices = parse_vertex_list(&read_file(file)?)?;
                Self::hull(vertices, format!("hull:{file}"))
            }
            _ => Err(Error::Parse(format!("unknown free set {name:?}"))),
        }
    }
}

impl fmt::Display for FreeSetDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn read_file(path: &str) -> Result<String> {
    std::fs::read_to_string(Path::new(path)).map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))
}

/// Reads a JSON array of matrices in the `{dim, re, im}` format.
pub fn parse_vertex_list(text: &str) -> Result<Vec<DensityMatrix>> {
    let raw: Vec<MatrixJson> = serde_json::from_str(text)?;
    raw.iter().map(|m| DensityMatrix::new(m.to_matrix()?)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedForm,
    Sdp,
    VertexLp,
}

#[derive(Clone, Debug)]
pub struct GammaResult {
    pub gamma: f64,
    /// Normalized free state `σ` achieving the optimum, when one exists.
    pub witness: Option<DensityMatrix>,
    pub method: Method,
    pub solver_gap: f64,
    /// Explanation when the value was decided without optimization.
    pub note: Option<String>,
}

impl GammaResult {
    /// Weight of resource `1 − Γ`.
    pub fn weight(&self) -> f64 {
        1.0 - self.gamma
    }

    fn exact_zero(method: Method, note: &str) -> Self {
        Self { gamma: 0.0, witness: None, method, solver_gap: 0.0, note: Some(note.into()) }
    }
}

fn check_dim(rho: usize, set: &FreeSetDescriptor) -> Result<()> {
    if rho != set.dim() {
        return Err(Error::DimensionMismatch(format!(
            "object dimension {rho} does not match free set {} of dimension {}",
            set.label,
            set.dim()
        )));
    }
    Ok(())
}

pub fn free_component_state(rho: &DensityMatrix, set: &FreeSetDescriptor) -> Result<GammaResult> {
    free_component_state_with(rho, set, &SolverOptions::from_env())
}

pub fn free_component_state_with(rho: &DensityMatrix, set: &FreeSetDescriptor, opts: &SolverOptions) -> Result<GammaResult> {
    check_dim(rho.dim(), set)?;
    match &set.kind {
        FreeSetKind::Diagonal(_) => {
            let v = set.vertices().expect("diagonal sets have vertices");
            hull_gamma(rho, &v, Method::Sdp, opts)
        }
        FreeSetKind::VertexHull(v) => hull_gamma(rho, v, Method::VertexLp, opts),
        FreeSetKind::GibbsSingleton(sigma) => singleton_closed_form(rho, sigma),
        FreeSetKind::PptChoi { dim_a, dim_b } => ppt_gamma(rho, *dim_a, *dim_b, opts),
    }
}

/// `Γ_N = Γ_{Φ_N}` with the free set living on Choi states.
pub fn free_component_channel(n: &Channel, set: &FreeSetDescriptor) -> Result<GammaResult> {
    if let FreeSetKind::PptChoi { dim_a, dim_b } = set.kind {
        if (dim_a, dim_b) != (n.dim_in(), n.dim_out()) {
            return Err(Error::DimensionMismatch(format!(
                "channel {}→{} does not match {}",
                n.dim_in(),
                n.dim_out(),
                set.label
            )));
        }
    }
    free_component_state(n.choi(), set)
}

/// `max Σq_j s.t. ρ − Σ q_j σ_j ⪰ 0, q ≥ 0`, restricted to `supp(ρ)`.
///
/// A vertex with weight outside the support of ρ can only enter with
/// `q_j = 0`, so it is dropped before solving; the LMI is then compressed to
/// the support where ρ is strictly positive.
fn hull_gamma(rho: &DensityMatrix, vertices: &[DensityMatrix], method: Method, opts: &SolverOptions) -> Result<GammaResult> {
    let spec = rho.matrix().eig()?;
    let basis = spec.support_basis(RANK_CUTOFF);
    let proj = spec.support_projector(RANK_CUTOFF);
    let admissible: Vec<usize> = (0..vertices.len())
        .filter(|&j| 1.0 - proj.inner(vertices[j].matrix()) <= SUPPORT_TOL)
        .collect();
    if admissible.is_empty() {
        return Ok(GammaResult::exact_zero(method, "no free state is supported inside supp(ρ)"));
    }
    let compress = |m: &HermitianMatrix| m.conjugate_by(&basis.adjoint());
    let mut p = SdpProblem::new(vec![1.0; admissible.len()]);
    p.add_block(compress(rho.matrix()), admissible.iter().map(|&j| compress(vertices[j].matrix())).collect());
    for k in 0..admissible.len() {
        p.set_nonnegative(k);
    }
    let sol = sdp::solve(&p, opts)?.require_optimal()?;
    let total: f64 = sol.y.iter().map(|q| q.max(0.0)).sum();
    let witness = if total > 1e-12 {
        let mut acc = HermitianMatrix::zeros(rho.dim());
        for (&j, q) in admissible.iter().zip(&sol.y) {
            acc = acc.add(&vertices[j].matrix().scale(q.max(0.0) / total));
        }
        Some(DensityMatrix::from_trusted(acc))
    } else {
        None
    };
    Ok(GammaResult { gamma: sol.primal_value.clamp(0.0, 1.0), witness, method, solver_gap: sol.gap, note: None })
}

/// Mass of σ outside the support of ρ.
pub fn mass_outside_support(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let proj = rho.matrix().eig()?.support_projector(RANK_CUTOFF);
    Ok((1.0 - proj.inner(sigma.matrix())).max(0.0))
}

/// `D_max(σ‖ρ) = log₂ λ_max(ρ^{-1/2} σ ρ^{-1/2})`, infinite when
/// `supp(σ) ⊄ supp(ρ)`.
pub fn max_relative_entropy(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<f64> {
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch("states differ in dimension".into()));
    }
    if mass_outside_support(rho, sigma)? > SUPPORT_TOL {
        return Ok(f64::INFINITY);
    }
    let inv_sqrt = rho.matrix().eig()?.reconstruct_with(|x| if x > RANK_CUTOFF { 1.0 / x.sqrt() } else { 0.0 });
    let m = sigma.matrix().conjugate_by(inv_sqrt.matrix());
    Ok(m.eig()?.max().log2())
}

fn singleton_closed_form(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<GammaResult> {
    let d = max_relative_entropy(sigma, rho)?;
    if d.is_infinite() {
        return Ok(GammaResult::exact_zero(Method::ClosedForm, "supp(σ) is not contained in supp(ρ)"));
    }
    Ok(GammaResult {
        gamma: 2f64.powf(-d).clamp(0.0, 1.0),
        witness: Some(sigma.clone()),
        method: Method::ClosedForm,
        solver_gap: 0.0,
        note: None,
    })
}

/// Coordinates of `tr_B X − tr(X)·I_A/d_A` for a matrix on (B ⊗ A).
fn marginal_defect_coords(x: &HermitianMatrix, dim_a: usize, dim_b: usize) -> Result<Vec<f64>> {
    let marginal = x.partial_trace((dim_b, dim_a), Subsystem::B)?;
    let target = HermitianMatrix::identity(dim_a).scale(x.trace() / dim_a as f64);
    Ok(sdp::hermitian_coords(&marginal.sub(&target)))
}

/// `max tr W s.t. Φ ⪰ W ⪰ 0, W^{T_B} ⪰ 0, tr_B W = tr(W)·I_A/d_A`.
/// `W` is parametrized inside `supp(Φ)`, which `W ⪯ Φ` forces anyway.
fn ppt_gamma(phi: &DensityMatrix, dim_a: usize, dim_b: usize, opts: &SolverOptions) -> Result<GammaResult> {
    let n = dim_a * dim_b;
    let basis = phi.matrix().eig()?.support_basis(RANK_CUTOFF);
    let r = basis.cols();
    let local = sdp::hermitian_basis(r);
    let lifted: Vec<HermitianMatrix> = local.iter().map(|e| e.conjugate_by(&basis)).collect();

    let mut p = SdpProblem::new(local.iter().map(|e| e.trace()).collect());
    p.add_block(phi.matrix().conjugate_by(&basis.adjoint()), local.clone());
    p.add_block(HermitianMatrix::zeros(r), local.iter().map(|e| e.scale(-1.0)).collect());
    let pt: Vec<HermitianMatrix> = lifted
        .iter()
        .map(|w| w.partial_transpose((dim_b, dim_a), Subsystem::A).map(|m| m.scale(-1.0)))
        .collect::<Result<_>>()?;
    p.add_block(HermitianMatrix::zeros(n), pt);
    let defects: Vec<Vec<f64>> = lifted.iter().map(|w| marginal_defect_coords(w, dim_a, dim_b)).collect::<Result<_>>()?;
    for row in 0..dim_a * dim_a {
        p.add_equality(defects.iter().map(|c| c[row]).collect(), 0.0);
    }
    let sol = sdp::solve(&p, opts)?.require_optimal()?;
    let w = sdp::assemble_hermitian(r, &sol.y).conjugate_by(&basis);
    let gamma = sol.primal_value.clamp(0.0, 1.0);
    let witness = if w.trace() > 1e-12 { DensityMatrix::normalized(w).ok() } else { None };
    Ok(GammaResult { gamma, witness, method: Method::Sdp, solver_gap: sol.gap, note: None })
}

/// `max ⟨ψ|W|ψ⟩` over PPT Choi states `W` (`W ⪰ 0, W^{T_B} ⪰ 0, tr_B W = I_A/d_A`).
fn ppt_overlap(psi: &PureState, dim_a: usize, dim_b: usize, opts: &SolverOptions) -> Result<f64> {
    let n = dim_a * dim_b;
    let basis = sdp::hermitian_basis(n);
    let amps = psi.amplitudes();
    let mut p = SdpProblem::new(basis.iter().map(|e| e.matrix().sandwich(amps, amps).re).collect());
    p.add_block(HermitianMatrix::zeros(n), basis.iter().map(|e| e.scale(-1.0)).collect());
    let pt: Vec<HermitianMatrix> = basis
        .iter()
        .map(|w| w.partial_transpose((dim_b, dim_a), Subsystem::A).map(|m| m.scale(-1.0)))
        .collect::<Result<_>>()?;
    p.add_block(HermitianMatrix::zeros(n), pt);
    let marginals: Vec<Vec<f64>> = basis
        .iter()
        .map(|w| w.partial_trace((dim_b, dim_a), Subsystem::B).map(|m| sdp::hermitian_coords(&m)))
        .collect::<Result<_>>()?;
    let target = sdp::hermitian_coords(&HermitianMatrix::identity(dim_a).scale(1.0 / dim_a as f64));
    for (row, t) in target.iter().enumerate() {
        p.add_equality(marginals.iter().map(|c| c[row]).collect(), *t);
    }
    let sol = sdp::solve(&p, opts)?.require_optimal()?;
    Ok(sol.primal_value.clamp(0.0, 1.0))
}

/// `f_ψ = max_{σ∈F} ⟨ψ|σ|ψ⟩`.
pub fn max_overlap_pure(psi: &PureState, set: &FreeSetDescriptor) -> Result<f64> {
    check_dim(psi.dim(), set)?;
    match &set.kind {
        FreeSetKind::Diagonal(_) => Ok(psi.amplitudes().iter().map(|z| z.norm_sqr()).fold(0.0, f64::max)),
        FreeSetKind::VertexHull(v) => {
            let mut best: f64 = 0.0;
            for s in v {
                best = best.max(states::pure_overlap(psi, s)?);
            }
            Ok(best)
        }
        FreeSetKind::GibbsSingleton(s) => states::pure_overlap(psi, s),
        FreeSetKind::PptChoi { dim_a, dim_b } => ppt_overlap(psi, *dim_a, *dim_b, &SolverOptions::from_env()),
    }
}

/// `f^cho_U = max_{M∈F} F(Φ_U, Φ_M)`; `Φ_U` is pure so this is an overlap.
pub fn max_overlap_choi_unitary(u: &Channel, set: &FreeSetDescriptor) -> Result<f64> {
    u.unitary_matrix()?;
    let spec = u.choi().matrix().eig()?;
    let psi = PureState::normalized(spec.vector(0))?;
    max_overlap_pure(&psi, set)
}

/// Best fidelity with the maximally coherent state of dimension `m`
/// reachable by maximally incoherent operations:
/// `max tr Gρ s.t. 0 ⪯ G ⪯ I, diag(G) = I/m`.
pub fn mio_optimal_fidelity(rho: &DensityMatrix, m: usize) -> Result<f64> {
    if m < 2 || rho.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "target dimension {m} must be at least 2 and equal the state dimension {}",
            rho.dim()
        )));
    }
    let basis = sdp::hermitian_basis(m);
    let mut p = SdpProblem::new(basis.iter().map(|e| e.inner(rho.matrix())).collect());
    p.add_block(HermitianMatrix::zeros(m), basis.iter().map(|e| e.scale(-1.0)).collect());
    p.add_block(HermitianMatrix::identity(m), basis.clone());
    for k in 0..m {
        let mut a = vec![0.0; basis.len()];
        a[k] = 1.0;
        p.add_equality(a, 1.0 / m as f64);
    }
    let sol = sdp::solve(&p, &SolverOptions::from_env())?.require_optimal()?;
    Ok(sol.primal_value.clamp(0.0, 1.0))
}

/// The single-qubit Clifford group modulo phase, as 24 unitary matrices,
/// found by breadth-first search over words in H and S.
pub fn clifford_unitaries_1q() -> Vec<ComplexMatrix> {
    let gens = [named_unitary("H").expect("known gate"), named_unitary("S").expect("known gate")];
    let same = |a: &ComplexMatrix, b: &ComplexMatrix| (a.inner(b).norm() / 2.0 - 1.0).abs() < 1e-9;
    let mut found = vec![ComplexMatrix::identity(2)];
    let mut frontier = found.clone();
    for _ in 0..12 {
        let mut next = Vec::new();
        for u in &frontier {
            for g in &gens {
                let v = g * u;
                if !found.iter().any(|w| same(w, &v)) {
                    found.push(v.clone());
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    found
}

pub fn clifford_group_1q() -> Vec<Channel> {
    clifford_unitaries_1q().iter().map(|u| Channel::unitary(u).expect("Clifford words are unitary")).collect()
}

/// Eigenstates of Z, X and Y: |0⟩, |1⟩, |+⟩, |−⟩, |+i⟩, |−i⟩.
pub fn stabilizer_states_1q() -> Vec<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| C64::new(x, 0.0);
    let i = |x: f64| C64::new(0.0, x);
    [
        vec![r(1.0), r(0.0)],
        vec![r(0.0), r(1.0)],
        vec![r(h), r(h)],
        vec![r(h), r(-h)],
        vec![r(h), i(h)],
        vec![r(h), i(-h)],
    ]
    .into_iter()
    .map(|v| PureState::new(v).expect("unit vectors"))
    .collect()
}

/// `min_{σ∈F} D_min(ρ‖σ) = −log₂ max_j tr(Π_ρ σ_j)` over the vertices.
pub fn d_min_resource(rho: &DensityMatrix, set: &FreeSetDescriptor) -> Result<f64> {
    check_dim(rho.dim(), set)?;
    let vertices = set
        .vertices()
        .ok_or_else(|| Error::Domain(format!("free set {} has no vertex description", set.label)))?;
    let proj = rho.matrix().eig()?.support_projector(RANK_CUTOFF);
    let best = vertices.iter().map(|s| proj.inner(s.matrix())).fold(0.0, f64::max);
    Ok((-best.min(1.0).log2()).max(0.0))
}

/// Overlap of a squeezed vacuum with the closest coherent state, `1/cosh r`.
pub fn squeezed_overlap(r: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("squeezing {r} must be finite and ≥ 0")));
    }
    Ok(1.0 / r.cosh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{compose, make_named_channel, NamedChannel};
    use crate::states::{make_named_state, NamedState};
    use approx::assert_abs_diff_eq;

    fn state(n: NamedState) -> DensityMatrix {
        make_named_state(&n).unwrap()
    }

    #[test]
    fn coherence_examples() {
        let f2 = FreeSetDescriptor::coherence(2).unwrap();
        for mu in [0.1, 0.3, 0.8] {
            let g = free_component_state(&state(NamedState::DepolarizedPlus(mu)), &f2).unwrap();
            assert_abs_diff_eq!(g.gamma, mu, epsilon = 1e-7);
            assert_eq!(g.method, Method::Sdp);
        }
        let f4 = FreeSetDescriptor::coherence(4).unwrap();
        let g = free_component_state(&state(NamedState::CoherenceGammaZero), &f4).unwrap();
        assert_eq!(g.gamma, 0.0);
        let g = free_component_state(&state(NamedState::Plus), &f2).unwrap();
        assert_eq!(g.gamma, 0.0);
        assert_abs_diff_eq!(g.weight(), 1.0);
    }

    #[test]
    fn noisy_t_lower_bound() {
        let stab = FreeSetDescriptor::stabilizer_1q();
        for z in [0.05, 0.1, 0.2] {
            let g = free_component_state(&state(NamedState::NoisyT(z)), &stab).unwrap();
            assert!(g.gamma >= (2.0 + 2f64.sqrt()) * z - 1e-7, "ζ={z}: {}", g.gamma);
            assert!(g.witness.is_some());
        }
        let g = free_component_state(&DensityMatrix::maximally_mixed(2), &stab).unwrap();
        assert_abs_diff_eq!(g.gamma, 1.0, epsilon = 1e-7);
    }

    #[test]
    fn clifford_group_has_24_elements_and_is_closed() {
        let us = clifford_unitaries_1q();
        assert_eq!(us.len(), 24);
        let same = |a: &ComplexMatrix, b: &ComplexMatrix| (a.inner(b).norm() - 2.0).abs() < 1e-9;
        for g in ["I", "H", "S", "X", "Y", "Z"] {
            let m = named_unitary(g).unwrap();
            assert!(us.iter().any(|u| same(u, &m)), "{g}");
        }
        for a in &us {
            for b in &us {
                let c = a * b;
                assert!(us.iter().any(|u| same(u, &c)));
            }
        }
        assert!(!us.iter().any(|u| same(u, &named_unitary("T").unwrap())));
    }

    #[test]
    fn channel_gamma_examples() {
        let cliff = FreeSetDescriptor::clifford_1q();
        let t = Channel::unitary(&named_unitary("T").unwrap()).unwrap();
        assert_eq!(free_component_channel(&t, &cliff).unwrap().gamma, 0.0);
        let dep = make_named_channel(&NamedChannel::Depolarizing { mu: 0.5, dim: 2 }).unwrap();
        let g = free_component_channel(&compose(&dep, &t).unwrap(), &cliff).unwrap();
        assert_abs_diff_eq!(g.gamma, 1.0, epsilon = 1e-6);
        let mixed = make_named_channel(&NamedChannel::Mix { mu: 0.3, inner: Box::new(NamedChannel::Unitary("H".into())) }).unwrap();
        let ident_hull = FreeSetDescriptor::hull(vec![Channel::unitary(&named_unitary("H").unwrap()).unwrap().choi().clone()], "H").unwrap();
        assert!(free_component_channel(&mixed, &ident_hull).unwrap().gamma >= 0.3 - 1e-7);
    }

    #[test]
    fn overlap_examples() {
        let f2 = FreeSetDescriptor::coherence(2).unwrap();
        assert_abs_diff_eq!(max_overlap_pure(&PureState::plus(), &f2).unwrap(), 0.5, epsilon = 1e-15);
        let stab = FreeSetDescriptor::stabilizer_1q();
        let expected = 1.0 / (4.0 - 2.0 * 2f64.sqrt());
        assert_abs_diff_eq!(max_overlap_pure(&PureState::t_state(), &stab).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(max_overlap_pure(&PureState::plus(), &stab).unwrap(), 1.0, epsilon = 1e-12);

        let cliff = FreeSetDescriptor::clifford_1q();
        let t = Channel::unitary(&named_unitary("T").unwrap()).unwrap();
        let c = (std::f64::consts::PI / 8.0).cos();
        assert_abs_diff_eq!(max_overlap_choi_unitary(&t, &cliff).unwrap(), c * c, epsilon = 1e-10);
        assert_abs_diff_eq!(max_overlap_choi_unitary(&Channel::identity(2), &cliff).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn ppt_identity_overlap_is_half() {
        let ppt = FreeSetDescriptor::ppt(2, 2).unwrap();
        let f = max_overlap_choi_unitary(&Channel::identity(2), &ppt).unwrap();
        assert_abs_diff_eq!(f, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn ppt_gamma_of_depolarizing() {
        let ppt = FreeSetDescriptor::ppt(2, 2).unwrap();
        // full depolarizing is PPT, so Γ = 1
        let full = make_named_channel(&NamedChannel::Depolarizing { mu: 1.0, dim: 2 }).unwrap();
        assert_abs_diff_eq!(free_component_channel(&full, &ppt).unwrap().gamma, 1.0, epsilon = 1e-6);
        assert!(free_component_channel(&Channel::identity(2), &ppt).unwrap().gamma < 1e-7);
        let half = make_named_channel(&NamedChannel::Depolarizing { mu: 0.5, dim: 2 }).unwrap();
        let g = free_component_channel(&half, &ppt).unwrap();
        assert!(g.gamma >= 0.5 - 1e-7 && g.gamma <= 1.0);
    }

    #[test]
    fn mio_examples() {
        assert_abs_diff_eq!(mio_optimal_fidelity(&state(NamedState::Plus), 2).unwrap(), 1.0, epsilon = 1e-7);
        for mu in [0.2, 0.6] {
            let v = mio_optimal_fidelity(&state(NamedState::DepolarizedPlus(mu)), 2).unwrap();
            assert_abs_diff_eq!(v, 1.0 - mu / 2.0, epsilon = 1e-7);
        }
        assert!(mio_optimal_fidelity(&state(NamedState::Plus), 3).is_err());
    }

    #[test]
    fn gibbs_singleton_closed_form() {
        let h = HermitianMatrix::diag(&[0.0, 1.0]);
        let sigma = states::gibbs_state(&h, 1.0).unwrap();
        let set = FreeSetDescriptor::gibbs(sigma.clone()).unwrap();
        let g = free_component_state(&sigma, &set).unwrap();
        assert_abs_diff_eq!(g.gamma, 1.0, epsilon = 1e-12);
        assert_eq!(g.method, Method::ClosedForm);
        let g = free_component_state(&PureState::basis(2, 0).density(), &set).unwrap();
        assert_eq!(g.gamma, 0.0);
        assert!(g.note.is_some());
        // diagonal ρ: Γ = min_i ρ_i/σ_i
        let rho = DensityMatrix::new(HermitianMatrix::diag(&[0.4, 0.6])).unwrap();
        let s = sigma.matrix();
        let expected = (0.4 / s[(0, 0)].re).min(0.6 / s[(1, 1)].re);
        assert_abs_diff_eq!(free_component_state(&rho, &set).unwrap().gamma, expected, epsilon = 1e-12);
        assert!(FreeSetDescriptor::gibbs(PureState::plus().density()).is_err());
    }

    #[test]
    fn d_min_examples() {
        let f2 = FreeSetDescriptor::coherence(2).unwrap();
        assert_abs_diff_eq!(d_min_resource(&state(NamedState::DepolarizedPlus(0.3)), &f2).unwrap(), 0.0, epsilon = 1e-12);
        let stab = FreeSetDescriptor::stabilizer_1q();
        assert_abs_diff_eq!(d_min_resource(&state(NamedState::Plus), &stab).unwrap(), 0.0, epsilon = 1e-12);
        let f4 = FreeSetDescriptor::coherence(4).unwrap();
        assert!(d_min_resource(&state(NamedState::CoherenceGammaZero), &f4).unwrap() > 0.5);
    }

    #[test]
    fn squeezed_examples() {
        assert_eq!(squeezed_overlap(0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(squeezed_overlap(1.0).unwrap(), 0.6480542736638855, epsilon = 1e-15);
        assert!(squeezed_overlap(-1.0).is_err());
    }

    #[test]
    fn parse_descriptors() {
        assert!(matches!(FreeSetDescriptor::parse("coherence:3").unwrap().kind, FreeSetKind::Diagonal(3)));
        assert_eq!(FreeSetDescriptor::parse("clifford1q").unwrap().dim(), 4);
        assert_eq!(FreeSetDescriptor::parse("ppt:2,3").unwrap().dim(), 6);
        assert!(matches!(FreeSetDescriptor::parse("nope"), Err(Error::Parse(_))));
        assert!(matches!(FreeSetDescriptor::parse("gibbs:/nonexistent.json:1"), Err(Error::Parse(_))));
        let json = r#"[{"dim":2,"re":[[1,0],[0,0]]},{"dim":2,"re":[[0.5,0.5],[0.5,0.5]]}]"#;
        assert_eq!(parse_vertex_list(json).unwrap().len(), 2);
    }
}
