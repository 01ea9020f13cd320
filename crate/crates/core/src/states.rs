//! Density matrices, pure states, fidelities and the named single-qubit
//! families used throughout the examples (noisy |+⟩ and |T⟩ states,
//! Gibbs states).

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64, ONE, ZERO};

/// Tolerance on positivity and unit trace for [`DensityMatrix`].
pub const STATE_TOL: f64 = 1e-9;
/// Eigenvalues at or below this count as zero.
pub const RANK_CUTOFF: f64 = 1e-10;

/// A PSD, unit-trace Hermitian matrix.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    pub fn new(m: HermitianMatrix) -> Result<Self> {
        let tr = m.trace();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = m.eig()?.min();
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self(m))
    }

    /// Normalizes a nonzero PSD matrix to unit trace.
    pub fn normalized(m: HermitianMatrix) -> Result<Self> {
        let tr = m.trace();
        if tr <= 0.0 {
            return Err(Error::InvalidState(format!("cannot normalize matrix with trace {tr}")));
        }
        Self::new(m.scale(1.0 / tr))
    }

    pub(crate) fn from_trusted(m: HermitianMatrix) -> Self {
        Self(m)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(HermitianMatrix::identity(d).scale(1.0 / d as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> HermitianMatrix {
        self.0
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kron(&other.0))
    }

    /// `p·self + (1−p)·other`.
    pub fn mix(&self, p: f64, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("mixing weight {p} outside [0,1]")));
        }
        Ok(Self(self.0.scale(p).add(&other.0.scale(1.0 - p))))
    }

    pub fn is_pure(&self) -> bool {
        (self.0.inner(&self.0) - 1.0).abs() < 1e-9
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Density{:?}", self.0.matrix())
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("dimensions {a} and {b} differ")));
    }
    Ok(())
}

/// Unit vector in a finite-dimensional Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState(Vec<C64>);

impl PureState {
    /// Accepts amplitudes of norm 1 within 1e-12.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Ok(Self(amplitudes))
    }

    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        Ok(Self(amplitudes.into_iter().map(|z| z / norm).collect()))
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut v = vec![ZERO; d];
        v[k] = ONE;
        Self(v)
    }

    /// (|0⟩ + |1⟩)/√2.
    pub fn plus() -> Self {
        Self(vec![C64::new(FRAC_1_SQRT_2, 0.0); 2])
    }

    /// T|+⟩ = (|0⟩ + e^{iπ/4}|1⟩)/√2.
    pub fn t_state() -> Self {
        Self(vec![C64::new(FRAC_1_SQRT_2, 0.0), C64::from_polar(FRAC_1_SQRT_2, FRAC_PI_4)])
    }

    /// Maximally entangled state Σ|j⟩|j⟩/√d.
    pub fn maximally_entangled(d: usize) -> Self {
        let a = 1.0 / (d as f64).sqrt();
        let mut v = vec![ZERO; d * d];
        for j in 0..d {
            v[j * d + j] = C64::new(a, 0.0);
        }
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    pub fn apply(&self, u: &ComplexMatrix) -> Self {
        Self(u.apply(&self.0))
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut v = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.0 {
            for b in &other.0 {
                v.push(a * b);
            }
        }
        Self(v)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix(HermitianMatrix::outer(&self.0))
    }
}

/// Uhlmann fidelity `‖√ρ√σ‖₁²`, clamped to [0, 1].
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho.dim(), sigma.dim())?;
    let f = if rho.is_pure() {
        pure_rank_one_overlap(rho, sigma)
    } else if sigma.is_pure() {
        pure_rank_one_overlap(sigma, rho)
    } else {
        let sr = rho.0.sqrt_psd()?;
        let inner = sigma.0.conjugate_by(sr.matrix());
        let root_trace: f64 = inner.eig()?.values.iter().map(|&x| x.max(0.0).sqrt()).sum();
        root_trace * root_trace
    };
    Ok(f.clamp(0.0, 1.0))
}

// F(ψ, σ) = tr ψσ when ψ is a rank-one projector.
fn pure_rank_one_overlap(pure: &DensityMatrix, other: &DensityMatrix) -> f64 {
    pure.0.inner(&other.0)
}

/// `⟨ψ|σ|ψ⟩`.
pub fn pure_overlap(psi: &PureState, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(psi.dim(), sigma.dim())?;
    Ok(sigma.0.matrix().sandwich(&psi.0, &psi.0).re)
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho.dim(), sigma.dim())?;
    let diff = rho.0.sub(&sigma.0);
    Ok(0.5 * diff.eig()?.values.iter().map(|x| x.abs()).sum::<f64>())
}

/// Smallest eigenvalue above [`RANK_CUTOFF`].
pub fn min_nonzero_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    let spec = rho.0.eig()?;
    spec.values
        .iter()
        .rev()
        .copied()
        .find(|&x| x > RANK_CUTOFF)
        .ok_or_else(|| Error::InvalidState("state has no nonzero eigenvalue".into()))
}

/// `e^{−βH}/tr e^{−βH}`.
pub fn gibbs_state(hamiltonian: &HermitianMatrix, beta: f64) -> Result<DensityMatrix> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("inverse temperature {beta} must be finite and ≥ 0")));
    }
    let spec = hamiltonian.eig()?;
    let ground = spec.min();
    let unnorm = spec.reconstruct_with(|e| (-beta * (e - ground)).exp());
    DensityMatrix::normalized(unnorm)
}

/// The named state families, addressable as `name:param` strings.
#[derive(Clone, Debug)]
pub enum NamedState {
    Plus,
    TState,
    /// `(1−ζ)|T⟩⟨T| + ζ I/2`.
    NoisyT(f64),
    /// `[|0⟩⟨0| + |1⟩⟨1| + (1−μ)(|0⟩⟨1| + |1⟩⟨0|)]/2`.
    DepolarizedPlus(f64),
    /// Same matrix as depolarized |+⟩ for a qubit.
    DephasedPlus(f64),
    /// `[(1+ν)|0⟩⟨0| + (1−ν)|1⟩⟨1| + √(1−ν)(|0⟩⟨1| + |1⟩⟨0|)]/2`.
    AmpDampedPlus(f64),
    Gibbs { hamiltonian: HermitianMatrix, beta: f64 },
    /// `(|ψ₁⟩⟨ψ₁| + |ψ₂⟩⟨ψ₂|)/2` with `ψ₁ = |0⟩+|1⟩`, `ψ₂ = |2⟩+|3⟩` (normalized).
    CoherenceGammaZero,
    MaximallyMixed(usize),
    Basis { dim: usize, index: usize },
}

fn unit_param(name: &str, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{name} parameter {x} outside [0,1]")));
    }
    Ok(x)
}

fn noisy_plus(c: f64) -> HermitianMatrix {
    HermitianMatrix::symmetrized(ComplexMatrix::from_real_rows(&[&[0.5, c / 2.0], &[c / 2.0, 0.5]]))
}

/// Builds a named state, validating its parameters.
pub fn make_named_state(named: &NamedState) -> Result<DensityMatrix> {
    use NamedState::*;
    Ok(match named {
        Plus => PureState::plus().density(),
        TState => PureState::t_state().density(),
        NoisyT(z) => {
            let z = unit_param("noisy_t", *z)?;
            let t = PureState::t_state().density();
            DensityMatrix(t.0.scale(1.0 - z).add(&HermitianMatrix::identity(2).scale(z / 2.0)))
        }
        DepolarizedPlus(mu) => DensityMatrix(noisy_plus(1.0 - unit_param("depolarized_plus", *mu)?)),
        DephasedPlus(mu) => DensityMatrix(noisy_plus(1.0 - unit_param("dephased_plus", *mu)?)),
        AmpDampedPlus(nu) => {
            let nu = unit_param("amp_damped_plus", *nu)?;
            let off = (1.0 - nu).sqrt() / 2.0;
            DensityMatrix(HermitianMatrix::symmetrized(ComplexMatrix::from_real_rows(&[
                &[(1.0 + nu) / 2.0, off],
                &[off, (1.0 - nu) / 2.0],
            ])))
        }
        Gibbs { hamiltonian, beta } => gibbs_state(hamiltonian, *beta)?,
        CoherenceGammaZero => {
            let a = C64::new(FRAC_1_SQRT_2, 0.0);
            let psi1 = [a, a, ZERO, ZERO];
            let psi2 = [ZERO, ZERO, a, a];
            let m = HermitianMatrix::outer(&psi1).add(&HermitianMatrix::outer(&psi2)).scale(0.5);
            DensityMatrix(m)
        }
        MaximallyMixed(d) => {
            if *d == 0 {
                return Err(Error::Domain("dimension must be positive".into()));
            }
            DensityMatrix::maximally_mixed(*d)
        }
        Basis { dim, index } => {
            if index >= dim {
                return Err(Error::Domain(format!("basis index {index} out of range for dimension {dim}")));
            }
            PureState::basis(*dim, *index).density()
        }
    })
}

pub(crate) fn required<'a>(name: &str, param: Option<&'a str>) -> Result<&'a str> {
    param.ok_or_else(|| Error::Parse(format!("{name:?} needs a parameter")))
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("expected a number, got {s:?}")))
}

pub(crate) fn parse_usize(s: &str) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|_| Error::Parse(format!("expected a positive integer, got {s:?}")))
}

impl NamedState {
    /// Parses `name[:param]`; dashes and underscores are interchangeable.
    /// Gibbs states need a Hamiltonian and are not parseable here.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, param) = match spec.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (spec, None),
        };
        let name = name.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match name.as_str() {
            "plus" => NamedState::Plus,
            "t" | "t_state" => NamedState::TState,
            "noisy_t" => NamedState::NoisyT(parse_f64(required(&name, param)?)?),
            "depolarized_plus" => NamedState::DepolarizedPlus(parse_f64(required(&name, param)?)?),
            "dephased_plus" => NamedState::DephasedPlus(parse_f64(required(&name, param)?)?),
            "amp_damped_plus" | "amplitude_damped_plus" => NamedState::AmpDampedPlus(parse_f64(required(&name, param)?)?),
            "coherence_gamma_zero_example" | "coherence_gamma_zero" => NamedState::CoherenceGammaZero,
            "maximally_mixed" | "mixed" => NamedState::MaximallyMixed(parse_usize(required(&name, param)?)?),
            "basis" => {
                let p = required(&name, param)?;
                let (d, k) = p
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("basis state needs `dim,index`, got {p:?}")))?;
                NamedState::Basis { dim: parse_usize(d)?, index: parse_usize(k)? }
            }
            _ => return Err(Error::Parse(format!("unknown state {name:?}"))),
        })
    }
}

/// Parses and builds a named state in one go.
pub fn parse_state(spec: &str) -> Result<DensityMatrix> {
    make_named_state(&NamedState::parse(spec)?)
}
