//! Closed-form error and cost bounds in terms of the free component Γ and
//! the free overlap f.
//!
//! Error bounds are plain numbers. Copy counts and rates can diverge or be
//! inapplicable, so they come back as [`BoundValue`]. Values are real-valued
//! right-hand sides; rounding up to whole copies is left to callers.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{Serialize, SerializeStruct, Serializer};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::states::{min_nonzero_eigenvalue, DensityMatrix};

/// Upper bound on the worst-case fidelity between CCZ and any
/// stabilizer-preserving channel. It is an externally derived constant,
/// supplied here rather than computed.
pub const CCZ_OVERLAP_BOUND: f64 = 9.0 / 16.0;
pub const CCZ_OVERLAP_PROVENANCE: &str =
    "external worst-case fidelity bound for CCZ against stabilizer channels; supplied constant, not computed here";

/// Free overlap of a single |T⟩ with the stabilizer hull, `1/(4−2√2)`.
pub fn t_state_overlap() -> f64 {
    1.0 / (4.0 - 2.0 * std::f64::consts::SQRT_2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundValue {
    Finite(f64),
    /// The bound grows without limit (for instance Γ = 1).
    Divergent,
    /// The formula's validity condition fails.
    Inapplicable,
}

impl BoundValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            BoundValue::Finite(x) => Some(x),
            _ => None,
        }
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Finite(x) => write!(f, "{x}"),
            BoundValue::Divergent => f.write_str("divergent"),
            BoundValue::Inapplicable => f.write_str("inapplicable"),
        }
    }
}

impl Serialize for BoundValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BoundValue::Finite(x) => s.serialize_f64(*x),
            BoundValue::Divergent => s.serialize_str("divergent"),
            BoundValue::Inapplicable => s.serialize_str("inapplicable"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, Deserialize)]
pub enum BoundKind {
    ErrorLowerBound,
    CopyLowerBound,
    RateUpperBound,
}

/// A bound value with the inputs it was computed from.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub name: String,
    pub value: BoundValue,
    pub inputs: BTreeMap<String, f64>,
    /// The formula the value instantiates, plus any caveat.
    pub anchor: String,
    pub kind: BoundKind,
}

impl Serialize for BoundReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("BoundReport", 5)?;
        st.serialize_field("name", &self.name)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("inputs", &self.inputs)?;
        st.serialize_field("anchor", &self.anchor)?;
        st.serialize_field("kind", &self.kind)?;
        st.end()
    }
}

impl BoundReport {
    pub fn new(name: &str, value: BoundValue, kind: BoundKind, anchor: &str) -> Self {
        Self { name: name.into(), value, inputs: BTreeMap::new(), anchor: anchor.into(), kind }
    }

    pub fn with_input(mut self, symbol: &str, x: f64) -> Self {
        self.inputs.insert(symbol.into(), x);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["name".to_string()];
        cols.extend(self.inputs.keys().cloned());
        cols.push("value".into());
        cols.join(",")
    }

    /// One CSV row; `fmt` renders the numbers.
    pub fn csv_row(&self, fmt: impl Fn(f64) -> String) -> String {
        let mut cols = vec![self.name.clone()];
        cols.extend(self.inputs.values().map(|&x| fmt(x)));
        cols.push(match self.value {
            BoundValue::Finite(x) => fmt(x),
            other => other.to_string(),
        });
        cols.join(",")
    }
}

fn in_unit(name: &str, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{name} = {x} must lie in [0,1]")));
    }
    Ok(x)
}

fn positive_eps(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("ε = {eps} must lie in (0,1)")));
    }
    Ok(eps)
}

/// `ε ≥ Γ(1−f)` for any free transformation of ρ towards ψ.
pub fn state_error_bound(gamma: f64, f: f64) -> Result<f64> {
    Ok(in_unit("Γ", gamma)? * (1.0 - in_unit("f", f)?))
}

// n ≥ log(residual/ε) / log(1/Γ)
fn copies(gamma: f64, residual: f64, eps: f64) -> Result<BoundValue> {
    in_unit("Γ", gamma)?;
    positive_eps(eps)?;
    if eps >= residual {
        return Ok(BoundValue::Finite(0.0));
    }
    if gamma >= 1.0 {
        return Ok(BoundValue::Divergent);
    }
    if gamma <= 0.0 {
        return Ok(BoundValue::Finite(0.0));
    }
    Ok(BoundValue::Finite((residual / eps).ln() / (1.0 / gamma).ln()))
}

/// Copies of ρ needed to reach ψ within ε: `log((1−f)/ε) / log(1/Γ)`.
pub fn distillation_overhead(gamma: f64, f: f64, eps: f64) -> Result<BoundValue> {
    in_unit("f", f)?;
    copies(gamma, 1.0 - f, eps)
}

/// Copies of `noisy_t(ζ)` needed for `m` T states within ε, using
/// `Γ ≥ (2+√2)ζ` and `f = (4−2√2)^{−m}`.
pub fn magic_overhead(zeta: f64, m: u32, eps: f64) -> Result<BoundValue> {
    let edge = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
    if !(zeta > 0.0 && zeta <= edge + 1e-12) {
        return Err(Error::Domain(format!("ζ = {zeta} must lie in (0, 1−1/√2]")));
    }
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    positive_eps(eps)?;
    let a = (4.0 - 2.0 * std::f64::consts::SQRT_2).powi(m as i32);
    let numerator = ((a - 1.0) / (a * m as f64 * eps)).ln();
    if numerator <= 0.0 {
        return Ok(BoundValue::Finite(0.0));
    }
    let denominator = ((2.0 - std::f64::consts::SQRT_2) / (2.0 * zeta)).ln();
    if denominator <= 1e-15 {
        return Ok(BoundValue::Divergent);
    }
    Ok(BoundValue::Finite(numerator / denominator))
}

/// Lower bounds on each channel error measure.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ChannelErrorBounds {
    pub diamond: f64,
    pub worst_case: f64,
    pub choi: f64,
    pub average: f64,
}

/// `ε_x ≥ Γ_N(1−f^cho)` for x ∈ {⋄, wst, cho} and `ε_ave ≥ d/(d+1)·Γ_N(1−f^cho)`.
pub fn channel_error_bounds(gamma: f64, f_cho: f64, d: usize) -> Result<ChannelErrorBounds> {
    if d == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let base = state_error_bound(gamma, f_cho)?;
    let dd = d as f64;
    Ok(ChannelErrorBounds { diamond: base, worst_case: base, choi: base, average: dd / (dd + 1.0) * base })
}

/// Uses of N needed to simulate U within ε, parallel or adaptive.
pub fn simulation_cost(gamma: f64, f_cho: f64, eps: f64) -> Result<BoundValue> {
    distillation_overhead(gamma, f_cho, eps)
}

/// `ε ≥ Γ_{N_S}(1−f^cho_{id_L})` for a code on the noisy block.
pub fn qec_error_bound(gamma_ns: f64, f_id_cho: f64) -> Result<f64> {
    state_error_bound(gamma_ns, f_id_cho)
}

/// Same bound for `n` independent noisy channels, `Γ^n(1−f)`.
pub fn qec_error_bound_independent(gamma: f64, n: u32, f_id_cho: f64) -> Result<f64> {
    Ok(in_unit("Γ", gamma)?.powi(n as i32) * (1.0 - in_unit("f", f_id_cho)?))
}

/// Physical channels needed to protect a logical system to error ε.
pub fn qec_copies(gamma_single: f64, f_id_cho: f64, eps: f64) -> Result<BoundValue> {
    distillation_overhead(gamma_single, f_id_cho, eps)
}

/// Uses of N needed to send k qubits with Choi error ε, from
/// `ε ≥ Γⁿ(1−2^{−k})`.
pub fn capacity_min_uses(gamma: f64, k: u32, eps: f64) -> Result<BoundValue> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Domain(format!("Γ = {gamma} must lie in (0,1]")));
    }
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    copies(gamma, 1.0 - 0.5f64.powi(k as i32), eps)
}

/// Rate bound `k/n ≤ −(1/n)·log₂(1 − ε/Γⁿ)`, valid while `ε ≤ Γⁿ`.
pub fn capacity_rate_bound(gamma: f64, n: u32, eps: f64) -> Result<BoundValue> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Domain(format!("Γ = {gamma} must lie in (0,1]")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    positive_eps(eps)?;
    let gn = gamma.powi(n as i32);
    if eps > gn {
        return Ok(BoundValue::Inapplicable);
    }
    if eps == gn {
        return Ok(BoundValue::Divergent);
    }
    Ok(BoundValue::Finite((-(1.0 - eps / gn).log2() / n as f64).max(0.0)))
}

/// Noisy gates G needed to implement U within diamond error ε.
pub fn noisy_gate_count(gamma_g: f64, f_target: f64, eps_diamond: f64) -> Result<BoundValue> {
    distillation_overhead(gamma_g, f_target, eps_diamond)
}

/// [`noisy_gate_count`] for a CCZ target with [`CCZ_OVERLAP_BOUND`].
pub fn noisy_ccz_count(gamma_g: f64, eps_diamond: f64) -> Result<BoundValue> {
    noisy_gate_count(gamma_g, CCZ_OVERLAP_BOUND, eps_diamond)
}

/// Error for reaching a squeezed state with squeezing `r`: `Γ(1 − 1/cosh r)`.
pub fn cv_error_bound(gamma: f64, r: f64) -> Result<f64> {
    state_error_bound(gamma, crate::free_sets::squeezed_overlap(r)?)
}

/// Baseline `λ_min(ρ)(1−f)` using the smallest nonzero eigenvalue.
pub fn min_eigenvalue_bound(rho: &DensityMatrix, f: f64) -> Result<f64> {
    Ok(min_nonzero_eigenvalue(rho)? * (1.0 - in_unit("f", f)?))
}
