//! Quantum channels stored as normalized Choi states, ordered
//! (output ⊗ reference), with composition, distance measures and the named
//! noise models.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, MatrixJson, C64, ONE, ZERO};
use crate::sdp::{self, SdpProblem, SolverOptions};
use crate::states::{self, fidelity, DensityMatrix, NamedState};

const TP_TOL: f64 = 1e-9;

/// A completely positive trace-preserving map `dim_in → dim_out`.
///
/// The Choi state is `(N ⊗ id)(Φ)` with `Φ` the normalized maximally
/// entangled state, so it has unit trace (the unnormalized Choi matrix is
/// `dim_in` times larger).
#[derive(Clone, Debug)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    choi: DensityMatrix,
}

impl Channel {
    pub fn from_choi(dim_in: usize, dim_out: usize, choi: DensityMatrix) -> Result<Self> {
        if choi.dim() != dim_in * dim_out {
            return Err(Error::DimensionMismatch(format!(
                "Choi dimension {} is not {dim_out}·{dim_in}",
                choi.dim()
            )));
        }
        let marginal = choi.matrix().partial_trace((dim_out, dim_in), crate::linalg::Subsystem::B)?;
        let target = HermitianMatrix::identity(dim_in).scale(1.0 / dim_in as f64);
        let defect = (marginal.matrix() - target.matrix()).max_abs();
        if defect > TP_TOL {
            return Err(Error::InvalidState(format!("not trace preserving (marginal defect {defect:.2e})")));
        }
        Ok(Self { dim_in, dim_out, choi })
    }

    /// Builds a channel from Kraus operators, each `dim_out × dim_in`.
    pub fn from_kraus(ops: &[ComplexMatrix]) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::Domain("no Kraus operators".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        let mut completeness = ComplexMatrix::zeros(dim_in, dim_in);
        let mut choi = HermitianMatrix::zeros(dim_in * dim_out);
        for k in ops {
            if k.rows() != dim_out || k.cols() != dim_in {
                return Err(Error::DimensionMismatch("Kraus operators differ in shape".into()));
            }
            completeness = &completeness + &(&k.adjoint() * k);
            choi = choi.add(&HermitianMatrix::outer(k.as_slice()));
        }
        let defect = (&completeness - &ComplexMatrix::identity(dim_in)).max_abs();
        if defect > TP_TOL {
            return Err(Error::InvalidState(format!("Kraus operators not trace preserving (defect {defect:.2e})")));
        }
        let choi = DensityMatrix::from_trusted(choi.scale(1.0 / dim_in as f64));
        Ok(Self { dim_in, dim_out, choi })
    }

    pub fn unitary(u: &ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::DimensionMismatch("unitary must be square".into()));
        }
        Self::from_kraus(std::slice::from_ref(u))
    }

    pub fn identity(d: usize) -> Self {
        Self::unitary(&ComplexMatrix::identity(d)).expect("identity is unitary")
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn choi(&self) -> &DensityMatrix {
        &self.choi
    }

    /// Unnormalized Choi matrix `Σ N(|i⟩⟨j|) ⊗ |i⟩⟨j|`.
    pub fn choi_unnormalized(&self) -> HermitianMatrix {
        self.choi.matrix().scale(self.dim_in as f64)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel input dimension {} but state dimension {}",
                self.dim_in,
                rho.dim()
            )));
        }
        Ok(DensityMatrix::from_trusted(self.apply_to_first(rho.matrix(), 1)))
    }

    /// `(N ⊗ id_R)(X)` for `X` on input ⊗ R.
    pub fn apply_with_reference(&self, x: &DensityMatrix, dim_ref: usize) -> Result<DensityMatrix> {
        if x.dim() != self.dim_in * dim_ref {
            return Err(Error::DimensionMismatch(format!(
                "joint state dimension {} is not {}·{dim_ref}",
                x.dim(),
                self.dim_in
            )));
        }
        Ok(DensityMatrix::from_trusted(self.apply_to_first(x.matrix(), dim_ref)))
    }

    // Y[(o,r),(o',r')] = d_in · Σ Φ[(o,i),(o',i')] X[(i,r),(i',r')]
    fn apply_to_first(&self, x: &HermitianMatrix, dr: usize) -> HermitianMatrix {
        let (di, dout) = (self.dim_in, self.dim_out);
        let phi = self.choi.matrix().matrix();
        let x = x.matrix();
        let scale = di as f64;
        let mut y = ComplexMatrix::zeros(dout * dr, dout * dr);
        for o in 0..dout {
            for op in 0..dout {
                for i in 0..di {
                    for ip in 0..di {
                        let c = phi[(o * di + i, op * di + ip)] * scale;
                        if c == ZERO {
                            continue;
                        }
                        for r in 0..dr {
                            for rp in 0..dr {
                                y[(o * dr + r, op * dr + rp)] += c * x[(i * dr + r, ip * dr + rp)];
                            }
                        }
                    }
                }
            }
        }
        HermitianMatrix::symmetrized(y)
    }

    /// `p·self + (1−p)·other`.
    pub fn mix(&self, p: f64, other: &Channel) -> Result<Channel> {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return Err(Error::DimensionMismatch("mixed channels must share dimensions".into()));
        }
        Ok(Channel { dim_in: self.dim_in, dim_out: self.dim_out, choi: self.choi.mix(p, &other.choi)? })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ChannelJson {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            choi: MatrixJson::from_matrix(self.choi.matrix()),
        })
        .expect("channel serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ChannelJson = serde_json::from_str(text)?;
        let choi = DensityMatrix::new(raw.choi.to_matrix()?)?;
        Self::from_choi(raw.dim_in, raw.dim_out, choi)
    }

    /// The unitary `U` with `Φ = |U⟩⟩⟨⟨U|/d`, if the channel is unitary.
    pub fn unitary_matrix(&self) -> Result<ComplexMatrix> {
        if self.dim_in != self.dim_out || !self.choi.is_pure() {
            return Err(Error::Domain("target channel is not unitary".into()));
        }
        let d = self.dim_in;
        let spec = self.choi.matrix().eig()?;
        let v = spec.vector(0);
        let s = (d as f64).sqrt();
        ComplexMatrix::from_vec(d, d, v.into_iter().map(|z| z * s).collect())
    }
}

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    dim_in: usize,
    dim_out: usize,
    choi: MatrixJson,
}

/// `N₂ ∘ N₁`: apply `n1` first.
pub fn compose(n2: &Channel, n1: &Channel) -> Result<Channel> {
    if n1.dim_out != n2.dim_in {
        return Err(Error::DimensionMismatch(format!(
            "cannot feed output dimension {} into input dimension {}",
            n1.dim_out, n2.dim_in
        )));
    }
    let choi = n2.apply_to_first(n1.choi.matrix(), n1.dim_in);
    Ok(Channel { dim_in: n1.dim_in, dim_out: n2.dim_out, choi: DensityMatrix::from_trusted(choi) })
}

/// `N₁ ⊗ N₂`, inputs and outputs both ordered (1, 2).
pub fn tensor(n1: &Channel, n2: &Channel) -> Channel {
    let joint = n1.choi.matrix().kron(n2.choi.matrix());
    let dims = [n1.dim_out, n1.dim_in, n2.dim_out, n2.dim_in];
    let choi = joint.permute_subsystems(&dims, &[0, 2, 1, 3]).expect("dimensions are consistent");
    Channel {
        dim_in: n1.dim_in * n2.dim_in,
        dim_out: n1.dim_out * n2.dim_out,
        choi: DensityMatrix::from_trusted(choi),
    }
}

fn same_shape(n: &Channel, m: &Channel) -> Result<()> {
    if n.dim_in != m.dim_in || n.dim_out != m.dim_out {
        return Err(Error::DimensionMismatch(format!(
            "channels {}→{} and {}→{} differ in shape",
            n.dim_in, n.dim_out, m.dim_in, m.dim_out
        )));
    }
    Ok(())
}

/// `F(Φ_N, Φ_M)`.
pub fn choi_fidelity(n: &Channel, m: &Channel) -> Result<f64> {
    same_shape(n, m)?;
    fidelity(&n.choi, &m.choi)
}

/// Average fidelity over Haar-random pure inputs, `(d·F_cho + 1)/(d + 1)`.
pub fn average_fidelity_to_unitary(n: &Channel, u: &Channel) -> Result<f64> {
    same_shape(n, u)?;
    u.unitary_matrix()?;
    let d = n.dim_in as f64;
    Ok((d * choi_fidelity(n, u)? + 1.0) / (d + 1.0))
}

/// Result of the worst-case fidelity search.
#[derive(Clone, Debug)]
pub struct WorstCaseFidelity {
    pub value: f64,
    /// Reduced input state on the system at the minimizer.
    pub input: DensityMatrix,
    /// The search is local, so `value` bounds the infimum from above.
    pub approximate: bool,
}

/// `min_ψ F((N⊗id)(ψ), (U⊗id)(ψ))` over pure inputs on system ⊗ reference.
///
/// For a unitary target this is the entanglement fidelity of `U†∘N` with
/// input `ρ = tr_R ψ`, which equals `d·⟨⟨Uρ|Φ_N|Uρ⟩⟩` and is convex in ρ.
/// The search starts from basis, Fourier-basis and maximally mixed inputs
/// and refines the best seeds with Nelder–Mead on `ρ = AA†/tr AA†`.
pub fn worst_case_fidelity_to_unitary(n: &Channel, u: &Channel) -> Result<WorstCaseFidelity> {
    same_shape(n, u)?;
    let umat = u.unitary_matrix()?;
    let d = n.dim_in;
    let phi = n.choi.matrix().matrix();
    let objective = |rho: &ComplexMatrix| -> f64 {
        let a = &umat * rho;
        d as f64 * phi.sandwich(a.as_slice(), a.as_slice()).re
    };

    let mut seeds: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(d).scale(1.0 / d as f64)];
    for k in 0..d {
        seeds.push(states::PureState::basis(d, k).density().matrix().matrix().clone());
    }
    for k in 0..d {
        let amps: Vec<C64> = (0..d)
            .map(|j| C64::from_polar(1.0 / (d as f64).sqrt(), 2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64))
            .collect();
        seeds.push(HermitianMatrix::outer(&amps).into_matrix());
    }
    if d == 2 {
        let y = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2)];
        seeds.push(HermitianMatrix::outer(&y).into_matrix());
        seeds.push(HermitianMatrix::outer(&[y[0], -y[1]]).into_matrix());
    }

    let mut scored: Vec<(f64, ComplexMatrix)> = seeds.into_iter().map(|s| (objective(&s), s)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = scored[0].clone();

    let f = |x: &[f64]| objective(&density_from_params(d, x));
    for (_, seed) in scored.iter().take(3) {
        let x0 = params_from_density(seed)?;
        let (x, _) = nelder_mead(&f, &x0, 0.25, 1e-12, 4000);
        let rho = density_from_params(d, &x);
        let val = objective(&rho);
        if val < best.0 {
            best = (val, rho);
        }
    }
    let input = DensityMatrix::from_trusted(HermitianMatrix::symmetrized(best.1));
    Ok(WorstCaseFidelity { value: best.0.clamp(0.0, 1.0), input, approximate: true })
}

fn density_from_params(d: usize, x: &[f64]) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(d, d, |i, j| C64::new(x[2 * (i * d + j)], x[2 * (i * d + j) + 1]));
    let m = &a * &a.adjoint();
    let tr = m.trace().re;
    m.scale(1.0 / tr)
}

fn params_from_density(rho: &ComplexMatrix) -> Result<Vec<f64>> {
    let h = HermitianMatrix::symmetrized(rho.clone());
    // A = √ρ, nudged full rank so every direction is reachable
    let a = h.map_spectrum(|x| x.max(0.0).sqrt() + 0.05)?;
    Ok(a.matrix().as_slice().iter().flat_map(|z| [z.re, z.im]).collect())
}

/// Minimizes `f` from `x0` with an initial simplex of edge `step`.
/// Stops when the spread of simplex values drops below `ftol`.
pub fn nelder_mead(f: &impl Fn(&[f64]) -> f64, x0: &[f64], step: f64, ftol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = f(&x);
        simplex.push((x, v));
    }
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect() };
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[n].1 - simplex[0].1 <= ftol {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let reflected = lerp(&centroid, &worst.0, -1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(&centroid, &worst.0, -2.0);
            let fe = f(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let contracted = if fr < worst.1 {
                lerp(&centroid, &worst.0, -0.5)
            } else {
                lerp(&centroid, &worst.0, 0.5)
            };
            let fc = f(&contracted);
            if fc < worst.1.min(fr) {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x = lerp(&best, &entry.0, 0.5);
                    let v = f(&x);
                    *entry = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    (x, v)
}

/// `½‖N − M‖⋄` from the semidefinite program
/// `max ⟨J, W⟩ s.t. 0 ⪯ W ⪯ I_out ⊗ ρ, ρ ⪰ 0, tr ρ = 1`
/// with `J` the unnormalized Choi matrix of `N − M`.
pub fn diamond_distance(n: &Channel, m: &Channel) -> Result<f64> {
    diamond_distance_with(n, m, &SolverOptions::from_env())
}

pub fn diamond_distance_with(n: &Channel, m: &Channel, opts: &SolverOptions) -> Result<f64> {
    same_shape(n, m)?;
    let (di, dout) = (n.dim_in, n.dim_out);
    let j = n.choi_unnormalized().sub(&m.choi_unnormalized());
    if j.matrix().max_abs() < 1e-14 {
        return Ok(0.0);
    }
    let dw = di * dout;
    let wb = sdp::hermitian_basis(dw);
    let rb = sdp::hermitian_basis(di);
    let nw = wb.len();
    let mut objective: Vec<f64> = wb.iter().map(|b| j.inner(b)).collect();
    objective.extend(std::iter::repeat(0.0).take(rb.len()));
    let mut p = SdpProblem::new(objective);

    // W ⪰ 0 as 0 − Σ w_k(−B_k) ⪰ 0
    let mut coeffs: Vec<HermitianMatrix> = wb.iter().map(|b| b.scale(-1.0)).collect();
    coeffs.extend(rb.iter().map(|_| HermitianMatrix::zeros(dw)));
    p.add_block(HermitianMatrix::zeros(dw), coeffs);

    // I ⊗ ρ − W ⪰ 0
    let id_out = HermitianMatrix::identity(dout);
    let mut coeffs: Vec<HermitianMatrix> = wb.clone();
    coeffs.extend(rb.iter().map(|b| id_out.kron(b).scale(-1.0)));
    p.add_block(HermitianMatrix::zeros(dw), coeffs);

    // ρ ⪰ 0
    let mut coeffs: Vec<HermitianMatrix> = wb.iter().map(|_| HermitianMatrix::zeros(di)).collect();
    coeffs.extend(rb.iter().map(|b| b.scale(-1.0)));
    p.add_block(HermitianMatrix::zeros(di), coeffs);

    let mut a = vec![0.0; nw];
    a.extend(rb.iter().map(|b| b.trace()));
    p.add_equality(a, 1.0);

    let sol = sdp::solve(&p, opts)?.require_optimal()?;
    Ok(sol.primal_value.clamp(0.0, 1.0))
}

/// Single-qubit and multi-qubit gates addressable by name.
pub fn named_unitary(name: &str) -> Result<ComplexMatrix> {
    let r = |x: f64| C64::new(x, 0.0);
    let h = FRAC_1_SQRT_2;
    Ok(match name.to_ascii_uppercase().as_str() {
        "I" | "ID" => ComplexMatrix::identity(2),
        "X" => ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
        "Y" => ComplexMatrix::from_vec(2, 2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO])?,
        "Z" => ComplexMatrix::diag_real(&[1.0, -1.0]),
        "H" => ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]]),
        "S" => ComplexMatrix::diag(&[ONE, C64::new(0.0, 1.0)]),
        "T" => ComplexMatrix::diag(&[ONE, C64::from_polar(1.0, FRAC_PI_4)]),
        "CNOT" | "CX" => {
            let mut m = ComplexMatrix::zeros(4, 4);
            for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                m[(i, j)] = r(1.0);
            }
            m
        }
        "CZ" => ComplexMatrix::diag_real(&[1.0, 1.0, 1.0, -1.0]),
        "CCZ" => {
            let mut d = vec![1.0; 8];
            d[7] = -1.0;
            ComplexMatrix::diag_real(&d)
        }
        other => return Err(Error::Parse(format!("unknown gate {other:?}"))),
    })
}

/// The named channel families.
#[derive(Clone, Debug)]
pub enum NamedChannel {
    Identity(usize),
    Unitary(String),
    /// `(1−μ)ρ + μ·tr(ρ)·I/d`.
    Depolarizing { mu: f64, dim: usize },
    /// `(1−μ)ρ + μ·diag(ρ)`.
    Dephasing { mu: f64, dim: usize },
    AmplitudeDamping(f64),
    /// `(1−μ)ρ ⊕ μ|e⟩⟨e|`, one extra output level.
    Erasure { mu: f64, dim: usize },
    /// `(1−Σμᵢ)ρ + Σ μᵢ PᵢρPᵢ` over X, Y, Z.
    Pauli([f64; 3]),
    /// Discards the input and prepares a fixed state.
    Replacer { state: DensityMatrix, dim_in: usize },
    /// `(1−μ)·id + μ·N`.
    Mix { mu: f64, inner: Box<NamedChannel> },
}

fn unit(name: &str, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{name} parameter {x} outside [0,1]")));
    }
    Ok(x)
}

fn positive_dim(d: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    Ok(d)
}

pub fn make_named_channel(named: &NamedChannel) -> Result<Channel> {
    use NamedChannel::*;
    match named {
        Identity(d) => Ok(Channel::identity(positive_dim(*d)?)),
        Unitary(name) => Channel::unitary(&named_unitary(name)?),
        Depolarizing { mu, dim } => {
            let mu = unit("depolarizing", *mu)?;
            let d = positive_dim(*dim)?;
            let id = Channel::identity(d);
            let full = Channel {
                dim_in: d,
                dim_out: d,
                choi: DensityMatrix::maximally_mixed(d * d),
            };
            id.mix(1.0 - mu, &full)
        }
        Dephasing { mu, dim } => {
            let mu = unit("dephasing", *mu)?;
            let d = positive_dim(*dim)?;
            let mut ops = vec![ComplexMatrix::identity(d).scale((1.0 - mu).sqrt())];
            for k in 0..d {
                let mut p = ComplexMatrix::zeros(d, d);
                p[(k, k)] = C64::new(mu.sqrt(), 0.0);
                ops.push(p);
            }
            Channel::from_kraus(&ops)
        }
        AmplitudeDamping(nu) => {
            let nu = unit("amplitude_damping", *nu)?;
            let k0 = ComplexMatrix::diag_real(&[1.0, (1.0 - nu).sqrt()]);
            let k1 = ComplexMatrix::from_real_rows(&[&[0.0, nu.sqrt()], &[0.0, 0.0]]);
            Channel::from_kraus(&[k0, k1])
        }
        Erasure { mu, dim } => {
            let mu = unit("erasure", *mu)?;
            let d = positive_dim(*dim)?;
            let mut k0 = ComplexMatrix::zeros(d + 1, d);
            for k in 0..d {
                k0[(k, k)] = C64::new((1.0 - mu).sqrt(), 0.0);
            }
            let mut ops = vec![k0];
            for k in 0..d {
                let mut e = ComplexMatrix::zeros(d + 1, d);
                e[(d, k)] = C64::new(mu.sqrt(), 0.0);
                ops.push(e);
            }
            Channel::from_kraus(&ops)
        }
        Pauli(mus) => {
            let total: f64 = mus.iter().sum();
            if mus.iter().any(|&m| m < 0.0) || total > 1.0 + 1e-12 {
                return Err(Error::Domain(format!("Pauli weights {mus:?} must be ≥ 0 and sum to ≤ 1")));
            }
            let mut ops = vec![ComplexMatrix::identity(2).scale((1.0 - total).max(0.0).sqrt())];
            for (m, p) in mus.iter().zip(["X", "Y", "Z"]) {
                ops.push(named_unitary(p)?.scale(m.sqrt()));
            }
            Channel::from_kraus(&ops)
        }
        Replacer { state, dim_in } => {
            let d = positive_dim(*dim_in)?;
            let choi = state.kron(&DensityMatrix::maximally_mixed(d));
            Ok(Channel { dim_in: d, dim_out: state.dim(), choi })
        }
        Mix { mu, inner } => {
            let mu = unit("mix", *mu)?;
            let n = make_named_channel(inner)?;
            if n.dim_in != n.dim_out {
                return Err(Error::Domain("mixing with the identity needs equal input and output dimensions".into()));
            }
            Channel::identity(n.dim_in).mix(1.0 - mu, &n)
        }
    }
}

fn split_params(p: &str) -> Vec<&str> {
    p.split(',').map(str::trim).collect()
}

impl NamedChannel {
    /// Parses `name[:params]`. Parameters are comma separated; an optional
    /// trailing integer sets the dimension where one applies. `replacer`
    /// takes a state spec and `mix` takes `μ:<channel spec>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, param) = match spec.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (spec, None),
        };
        let name = name.trim().to_ascii_lowercase().replace('-', "_");
        let with_dim = |p: &str| -> Result<(f64, usize)> {
            let parts = split_params(p);
            let mu = states::parse_f64(parts[0])?;
            let d = match parts.get(1) {
                Some(d) => states::parse_usize(d)?,
                None => 2,
            };
            Ok((mu, d))
        };
        Ok(match name.as_str() {
            "identity" | "id" => NamedChannel::Identity(param.map(states::parse_usize).transpose()?.unwrap_or(2)),
            "unitary" => NamedChannel::Unitary(states::required(&name, param)?.trim().to_string()),
            "depolarizing" => {
                let (mu, dim) = with_dim(states::required(&name, param)?)?;
                NamedChannel::Depolarizing { mu, dim }
            }
            "dephasing" => {
                let (mu, dim) = with_dim(states::required(&name, param)?)?;
                NamedChannel::Dephasing { mu, dim }
            }
            "erasure" => {
                let (mu, dim) = with_dim(states::required(&name, param)?)?;
                NamedChannel::Erasure { mu, dim }
            }
            "amplitude_damping" | "amp_damping" => {
                NamedChannel::AmplitudeDamping(states::parse_f64(states::required(&name, param)?)?)
            }
            "pauli" => {
                let parts = split_params(states::required(&name, param)?);
                if parts.len() != 3 {
                    return Err(Error::Parse("pauli needs three weights `μx,μy,μz`".into()));
                }
                let mut mus = [0.0; 3];
                for (m, s) in mus.iter_mut().zip(parts) {
                    *m = states::parse_f64(s)?;
                }
                NamedChannel::Pauli(mus)
            }
            "replacer" => {
                let state = states::make_named_state(&NamedState::parse(states::required(&name, param)?)?)?;
                let dim_in = state.dim();
                NamedChannel::Replacer { state, dim_in }
            }
            "mix" => {
                let rest = states::required(&name, param)?;
                let (mu, inner) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::Parse("mix needs `μ:<channel>`".into()))?;
                NamedChannel::Mix { mu: states::parse_f64(mu)?, inner: Box::new(NamedChannel::parse(inner)?) }
            }
            _ => return Err(Error::Parse(format!("unknown channel {name:?}"))),
        })
    }
}

/// Parses a `;`-separated pipeline of named channels; the leftmost acts
/// first, so `unitary:T;depolarizing:0.4` is depolarizing ∘ T.
pub fn parse_channel(spec: &str) -> Result<Channel> {
    let mut stages = spec.split(';').map(str::trim).filter(|s| !s.is_empty());
    let first = stages.next().ok_or_else(|| Error::Parse("empty channel spec".into()))?;
    let mut acc = make_named_channel(&NamedChannel::parse(first)?)?;
    for stage in stages {
        let next = make_named_channel(&NamedChannel::parse(stage)?)?;
        acc = compose(&next, &acc)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{make_named_state, PureState};
    use approx::assert_abs_diff_eq;

    fn close(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
        (a.matrix() - b.matrix()).max_abs()
    }

    fn depol(mu: f64) -> Channel {
        make_named_channel(&NamedChannel::Depolarizing { mu, dim: 2 }).unwrap()
    }

    #[test]
    fn apply_examples() {
        let rho = make_named_state(&NamedState::AmpDampedPlus(0.4)).unwrap();
        let out = Channel::identity(2).apply(&rho).unwrap();
        assert!(close(out.matrix(), rho.matrix()) < 1e-15);
        let out = depol(1.0).apply(&rho).unwrap();
        assert!(close(out.matrix(), &HermitianMatrix::identity(2).scale(0.5)) < 1e-15);
        let deph = make_named_channel(&NamedChannel::Dephasing { mu: 1.0, dim: 2 }).unwrap();
        let out = deph.apply(&PureState::plus().density()).unwrap();
        assert!(close(out.matrix(), &HermitianMatrix::identity(2).scale(0.5)) < 1e-15);
        assert!(Channel::identity(3).apply(&rho).is_err());
    }

    #[test]
    fn apply_matches_kraus() {
        let nu = 0.3;
        let ch = make_named_channel(&NamedChannel::AmplitudeDamping(nu)).unwrap();
        let plus = PureState::plus().density();
        let out = ch.apply(&plus).unwrap();
        let expected = make_named_state(&NamedState::AmpDampedPlus(nu)).unwrap();
        assert!(close(out.matrix(), expected.matrix()) < 1e-14);
    }

    #[test]
    fn composition_examples() {
        let n = make_named_channel(&NamedChannel::AmplitudeDamping(0.2)).unwrap();
        let c = compose(&Channel::identity(2), &n).unwrap();
        assert!(close(c.choi().matrix(), n.choi().matrix()) < 1e-15);
        let c = compose(&n, &Channel::identity(2)).unwrap();
        assert!(close(c.choi().matrix(), n.choi().matrix()) < 1e-15);
        let t = tensor(&Channel::identity(2), &Channel::identity(2));
        assert!(close(t.choi().matrix(), Channel::identity(4).choi().matrix()) < 1e-15);
        assert!(compose(&Channel::identity(3), &n).is_err());
    }

    #[test]
    fn tensor_acts_factorwise() {
        let a = make_named_channel(&NamedChannel::AmplitudeDamping(0.3)).unwrap();
        let b = Channel::unitary(&named_unitary("H").unwrap()).unwrap();
        let ab = tensor(&a, &b);
        let r1 = make_named_state(&NamedState::NoisyT(0.2)).unwrap();
        let r2 = PureState::basis(2, 0).density();
        let lhs = ab.apply(&r1.kron(&r2)).unwrap();
        let rhs = a.apply(&r1).unwrap().kron(&b.apply(&r2).unwrap());
        assert!(close(lhs.matrix(), rhs.matrix()) < 1e-14);
    }

    #[test]
    fn fidelity_examples() {
        let id = Channel::identity(2);
        let n = depol(0.4);
        assert_abs_diff_eq!(choi_fidelity(&n, &n).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(choi_fidelity(&id, &n).unwrap(), 0.7, epsilon = 1e-12);
        let replacer = make_named_channel(&NamedChannel::Replacer {
            state: DensityMatrix::maximally_mixed(2),
            dim_in: 2,
        })
        .unwrap();
        assert_abs_diff_eq!(choi_fidelity(&id, &replacer).unwrap(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(average_fidelity_to_unitary(&n, &id).unwrap(), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(average_fidelity_to_unitary(&id, &id).unwrap(), 1.0, epsilon = 1e-12);
        assert!(average_fidelity_to_unitary(&id, &n).is_err());
    }

    #[test]
    fn worst_case_examples() {
        let id = Channel::identity(2);
        let t = Channel::unitary(&named_unitary("T").unwrap()).unwrap();
        assert_abs_diff_eq!(worst_case_fidelity_to_unitary(&t, &t).unwrap().value, 1.0, epsilon = 1e-9);
        for mu in [0.1, 0.4, 0.9] {
            let w = worst_case_fidelity_to_unitary(&depol(mu), &id).unwrap();
            assert!(w.approximate);
            assert_abs_diff_eq!(w.value, 1.0 - mu + mu / 4.0, epsilon = 1e-9);
        }
        // amplitude damping: worst input is a basis state or entangled
        let ad = make_named_channel(&NamedChannel::AmplitudeDamping(0.5)).unwrap();
        let w = worst_case_fidelity_to_unitary(&ad, &id).unwrap();
        assert!(w.value <= choi_fidelity(&ad, &id).unwrap() + 1e-12);
    }

    #[test]
    fn diamond_examples() {
        let id = Channel::identity(2);
        assert_abs_diff_eq!(diamond_distance(&id, &id).unwrap(), 0.0);
        assert_abs_diff_eq!(diamond_distance(&id, &depol(1.0)).unwrap(), 0.75, epsilon = 1e-7);
        // unitary pair: ½‖U − V‖⋄ = √(1 − min|⟨ψ|U†V|ψ⟩|²); for I vs Z that is 1
        let z = Channel::unitary(&named_unitary("Z").unwrap()).unwrap();
        assert_abs_diff_eq!(diamond_distance(&id, &z).unwrap(), 1.0, epsilon = 1e-7);
    }

    #[test]
    fn named_channel_examples() {
        let id = Channel::identity(2);
        assert!(close(depol(0.0).choi().matrix(), id.choi().matrix()) < 1e-15);
        let er = make_named_channel(&NamedChannel::Erasure { mu: 0.3, dim: 2 }).unwrap();
        assert_eq!(er.dim_out(), 3);
        // Pauli with equal weights μ/4·(X,Y,Z)... equals depolarizing μ
        let mu = 0.6;
        let p = make_named_channel(&NamedChannel::Pauli([mu / 4.0; 3])).unwrap();
        assert!(close(p.choi().matrix(), depol(mu).choi().matrix()) < 1e-14);
        let ccz = Channel::unitary(&named_unitary("CCZ").unwrap()).unwrap();
        assert_eq!(ccz.dim_in(), 8);
        assert!(make_named_channel(&NamedChannel::Depolarizing { mu: 1.2, dim: 2 }).is_err());
        assert!(make_named_channel(&NamedChannel::Pauli([0.5, 0.4, 0.3])).is_err());
    }

    #[test]
    fn parse_pipelines() {
        let c = parse_channel("unitary:T;depolarizing:0.4").unwrap();
        let t = Channel::unitary(&named_unitary("T").unwrap()).unwrap();
        let expected = compose(&depol(0.4), &t).unwrap();
        assert!(close(c.choi().matrix(), expected.choi().matrix()) < 1e-14);
        let m = parse_channel("mix:0.2:unitary:H").unwrap();
        assert_eq!(m.dim_in(), 2);
        assert!(parse_channel("replacer:depolarized-plus:0.5").is_ok());
        assert!(parse_channel("depolarizing:0.1,3").unwrap().dim_in() == 3);
        assert!(matches!(parse_channel("warp:1"), Err(Error::Parse(_))));
        assert!(matches!(parse_channel(""), Err(Error::Parse(_))));
    }

    #[test]
    fn json_round_trip() {
        let ch = make_named_channel(&NamedChannel::AmplitudeDamping(0.25)).unwrap();
        let back = Channel::from_json(&ch.to_json()).unwrap();
        assert!(close(back.choi().matrix(), ch.choi().matrix()) < 1e-15);
        let bad = r#"{"dim_in":2,"dim_out":2,"choi":{"dim":4,"re":[[1,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}}"#;
        assert!(Channel::from_json(bad).is_err());
    }

    #[test]
    fn unitary_matrix_recovers_gate_up_to_phase() {
        let s = named_unitary("S").unwrap();
        let u = Channel::unitary(&s).unwrap().unitary_matrix().unwrap();
        let overlap = s.inner(&u).norm();
        assert_abs_diff_eq!(overlap, 2.0, epsilon = 1e-12);
    }
}
