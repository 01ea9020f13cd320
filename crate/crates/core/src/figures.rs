//! Per-point computations behind the benchmark curves: coherence
//! distillation from noisy |+⟩ states, the noisy T gate over the Clifford
//! hull, and noisy gate counts.

use std::sync::OnceLock;

use crate::bounds::{self, BoundValue};
use crate::channels::{compose, make_named_channel, named_unitary, Channel, NamedChannel};
use crate::error::Result;
use crate::free_sets::{self, free_component_channel, FreeSetDescriptor};
use crate::states::{make_named_state, DensityMatrix, NamedState, PureState};

/// One point of a coherence distillation curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherenceRow {
    pub x: f64,
    /// `1 − F` of the best maximally incoherent protocol.
    pub sdp_optimal_error: f64,
    /// `Γ(1 − f)` with Γ over diagonal states and `f = 1/2`.
    pub gamma_bound: f64,
    /// `λ_min(1 − f)`.
    pub lmin_bound: f64,
}

fn coherence_row(x: f64, rho: &DensityMatrix) -> Result<CoherenceRow> {
    let set = FreeSetDescriptor::coherence(2)?;
    let f = free_sets::max_overlap_pure(&PureState::plus(), &set)?;
    let gamma = free_sets::free_component_state(rho, &set)?.gamma;
    Ok(CoherenceRow {
        x,
        sdp_optimal_error: 1.0 - free_sets::mio_optimal_fidelity(rho, 2)?,
        gamma_bound: bounds::state_error_bound(gamma, f)?,
        lmin_bound: bounds::min_eigenvalue_bound(rho, f)?,
    })
}

/// Depolarized |+⟩ with noise μ.
pub fn depolarized_plus_row(mu: f64) -> Result<CoherenceRow> {
    coherence_row(mu, &make_named_state(&NamedState::DepolarizedPlus(mu))?)
}

/// Amplitude-damped |+⟩ with damping ν.
pub fn amp_damped_plus_row(nu: f64) -> Result<CoherenceRow> {
    coherence_row(nu, &make_named_state(&NamedState::AmpDampedPlus(nu))?)
}

fn clifford_hull() -> &'static FreeSetDescriptor {
    static HULL: OnceLock<FreeSetDescriptor> = OnceLock::new();
    HULL.get_or_init(FreeSetDescriptor::clifford_1q)
}

/// `depolarizing(μ) ∘ T`.
pub fn noisy_t_gate(mu: f64) -> Result<Channel> {
    let t = Channel::unitary(&named_unitary("T")?)?;
    let dep = make_named_channel(&NamedChannel::Depolarizing { mu, dim: 2 })?;
    compose(&dep, &t)
}

/// Γ of the noisy T gate over the 24 Clifford Choi states.
pub fn noisy_t_gamma(mu: f64) -> Result<f64> {
    Ok(free_component_channel(&noisy_t_gate(mu)?, clifford_hull())?.gamma)
}

/// Noisy T gates needed for a CCZ within diamond error ε, one entry per Γ.
pub fn noisy_t_count_row(eps: f64, gammas: &[f64]) -> Result<Vec<BoundValue>> {
    gammas.iter().map(|&g| bounds::noisy_ccz_count(g, eps)).collect()
}

/// Per-state error bounds for recovering logical states after encoding
/// and noise, aggregated as (worst, average).
#[derive(Clone, Debug, PartialEq)]
pub struct QecStateBounds {
    pub per_state: Vec<f64>,
    pub worst: f64,
    pub average: f64,
}

/// `Γ_{N∘E(ψ)}(1 − f_ψ)` for each logical state ψ.
pub fn qec_state_bounds(
    encoder: &Channel,
    noise: &Channel,
    logical: &[PureState],
    physical_set: &FreeSetDescriptor,
    logical_set: &FreeSetDescriptor,
) -> Result<QecStateBounds> {
    let mut per_state = Vec::with_capacity(logical.len());
    for psi in logical {
        let noisy = noise.apply(&encoder.apply(&psi.density())?)?;
        let gamma = free_sets::free_component_state(&noisy, physical_set)?.gamma;
        let f = free_sets::max_overlap_pure(psi, logical_set)?;
        per_state.push(bounds::state_error_bound(gamma, f)?);
    }
    let worst = per_state.iter().copied().fold(0.0, f64::max);
    let average = if per_state.is_empty() { 0.0 } else { per_state.iter().sum::<f64>() / per_state.len() as f64 };
    Ok(QecStateBounds { per_state, worst, average })
}
