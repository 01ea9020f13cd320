//! Argument parsing and command dispatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use freecomp::bounds::{self, BoundKind, BoundReport, BoundValue};
use freecomp::channels::{self, Channel};
use freecomp::free_sets::{self, FreeSetDescriptor, GammaResult};
use freecomp::linalg::MatrixJson;
use freecomp::states::{self, DensityMatrix, PureState};
use freecomp::{figures as fig, Error, Result};

use crate::figures::{self, Figure, FigureConfig};
use crate::format::{bound_cell, ceil_cell, fmt_g, g12, Table};
use crate::svg;

#[derive(Parser, Debug)]
#[command(name = "freecomp", version, about = "Free components of quantum states and channels, and the bounds they imply")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Free component Γ of a state or channel.
    Gamma(GammaArgs),
    /// Largest overlap f of a pure target (or unitary Choi state) with the free set.
    Overlap(OverlapArgs),
    /// Evaluate one closed-form bound.
    Bound(BoundArgs),
    /// Recompute a figure's data, optionally rendering it.
    Figure(FigureArgs),
    /// Communication bounds from Γ of a channel over a free set.
    Capacity(CapacityArgs),
    /// Noisy T gates needed for a CCZ.
    Tcount(TcountArgs),
    /// Error correction bounds.
    Qec(QecArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
    Svg,
}

#[derive(Args, Debug)]
pub struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Significant digits for text output.
    #[arg(long, default_value_t = 8)]
    pub digits: usize,
}

#[derive(Args, Debug)]
pub struct GammaArgs {
    /// Free set: coherence:d, stab1q, clifford1q, ppt:dA,dB, gibbs:<file>:<beta>, hull:<file>.
    #[arg(long)]
    pub free_set: String,
    /// State spec such as depolarized-plus:0.3, or a JSON matrix file.
    #[arg(long, conflicts_with = "channel", required_unless_present = "channel")]
    pub state: Option<String>,
    /// Channel pipeline such as "unitary:T;depolarizing:0.4", or a JSON channel file.
    #[arg(long)]
    pub channel: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct OverlapArgs {
    #[arg(long)]
    pub free_set: String,
    /// Pure target state spec (plus, t-state, basis:d,k) or JSON matrix file.
    #[arg(long, conflicts_with = "unitary", required_unless_present = "unitary")]
    pub state: Option<String>,
    /// Unitary channel spec such as unitary:T.
    #[arg(long)]
    pub unitary: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BoundName {
    StateError,
    Distillation,
    Magic,
    ChannelErrors,
    Simulation,
    QecError,
    QecCopies,
    CapacityUses,
    CapacityRate,
    GateCount,
    CczCount,
    Cv,
    MinEigenvalue,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[arg(value_enum)]
    pub name: BoundName,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub f: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub r: Option<f64>,
    /// State spec, for the min-eigenvalue baseline.
    #[arg(long)]
    pub state: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    /// Sweep configuration (TOML); defaults to the checked-in grid.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Data file; CSV unless --format json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also render the curves as SVG here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct CapacityArgs {
    #[arg(long)]
    pub channel: String,
    /// Defaults to ppt:<d_in>,<d_out>.
    #[arg(long)]
    pub free_set: Option<String>,
    /// Qubits to transmit.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Target Choi errors, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    /// Largest number of channel uses in the rate table.
    #[arg(long, default_value_t = 8)]
    pub n_max: u32,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct TcountArgs {
    /// Depolarizing rates after the T gate, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4")]
    pub mu: Vec<f64>,
    /// Target diamond errors, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    /// Target overlap; defaults to the CCZ constant 9/16.
    #[arg(long)]
    pub f: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct QecArgs {
    /// Noise on the physical block, as a channel pipeline.
    #[arg(long)]
    pub noise: String,
    /// Free set for the noise channel's Choi state or for the encoded states.
    #[arg(long)]
    pub free_set: String,
    /// Free set for the logical identity (or logical states); defaults to ppt:d,d.
    #[arg(long)]
    pub logical_free_set: Option<String>,
    /// Logical dimension.
    #[arg(long, default_value_t = 2)]
    pub logical_dim: usize,
    /// Independent noisy blocks.
    #[arg(long, default_value_t = 1)]
    pub blocks: u32,
    /// Use this stochastic noise weight μ in place of Γ.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Target error for the copy bound.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Encoder channel; switches to the per-state form together with --logical-state.
    #[arg(long, requires = "logical_state")]
    pub encoder: Option<String>,
    /// Logical pure states (repeatable).
    #[arg(long)]
    pub logical_state: Vec<String>,
    #[command(flatten)]
    pub output: Output,
}

/// A failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Json(_) => 1,
            Error::Solver(_) | Error::NoConvergence(_) => 3,
            Error::Domain(_) | Error::DimensionMismatch(_) | Error::InvalidState(_) | Error::NotHermitian(_) => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<svg::SvgError> for Failure {
    fn from(e: svg::SvgError) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: 1, message: format!("{}: {e}", path.display()) }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(cmd: &Command) -> std::result::Result<(), Failure> {
    match cmd {
        Command::Gamma(a) => gamma(a),
        Command::Overlap(a) => overlap(a),
        Command::Bound(a) => bound(a),
        Command::Figure(a) => figure(a),
        Command::Capacity(a) => capacity(a),
        Command::Tcount(a) => tcount(a),
        Command::Qec(a) => qec(a),
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> std::result::Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| io_failure(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn is_file_spec(spec: &str) -> bool {
    spec.ends_with(".json") && Path::new(spec).is_file()
}

fn read(spec: &str) -> Result<String> {
    std::fs::read_to_string(spec).map_err(|e| Error::Parse(format!("{spec}: {e}")))
}

pub fn load_state(spec: &str) -> Result<DensityMatrix> {
    if is_file_spec(spec) {
        DensityMatrix::new(MatrixJson::parse(&read(spec)?)?)
    } else {
        states::parse_state(spec)
    }
}

pub fn load_channel(spec: &str) -> Result<Channel> {
    if is_file_spec(spec) {
        Channel::from_json(&read(spec)?)
    } else {
        channels::parse_channel(spec)
    }
}

pub fn load_pure(spec: &str) -> Result<PureState> {
    let rho = load_state(spec)?;
    if !rho.is_pure() {
        return Err(Error::Domain(format!("target {spec:?} is not a pure state")));
    }
    PureState::normalized(rho.matrix().eig()?.vector(0))
}

fn gamma_json(g: &GammaResult) -> serde_json::Value {
    serde_json::json!({
        "gamma": g.gamma,
        "weight": g.weight(),
        "method": g.method,
        "solver_gap": g.solver_gap,
        "witness": g.witness.as_ref().map(|w| MatrixJson::from_matrix(w.matrix())),
        "note": g.note,
    })
}

fn gamma(a: &GammaArgs) -> std::result::Result<(), Failure> {
    let set = FreeSetDescriptor::parse(&a.free_set)?;
    let result = match (&a.state, &a.channel) {
        (Some(s), _) => free_sets::free_component_state(&load_state(s)?, &set)?,
        (None, Some(c)) => free_sets::free_component_channel(&load_channel(c)?, &set)?,
        (None, None) => return Err(Error::Parse("give --state or --channel".into()).into()),
    };
    let text = match a.output.format {
        Format::Text => format!("{}\n", fmt_g(result.gamma, a.output.digits)),
        Format::Json => serde_json::to_string_pretty(&gamma_json(&result)).expect("json") + "\n",
        Format::Csv => {
            let mut t = Table::new(["gamma", "weight", "solver_gap"]);
            t.push(vec![g12(result.gamma), g12(result.weight()), g12(result.solver_gap)]);
            t.to_csv()
        }
        Format::Svg => return Err(Error::Parse("svg output is only available for figures".into()).into()),
    };
    write_output(&a.output.out, &text)
}

fn scalar_output(o: &Output, name: &str, x: f64) -> std::result::Result<(), Failure> {
    let text = match o.format {
        Format::Text => format!("{}\n", fmt_g(x, o.digits)),
        Format::Json => format!("{}\n", serde_json::json!({ name: x })),
        Format::Csv => format!("{name}\n{}\n", g12(x)),
        Format::Svg => return Err(Error::Parse("svg output is only available for figures".into()).into()),
    };
    write_output(&o.out, &text)
}

fn overlap(a: &OverlapArgs) -> std::result::Result<(), Failure> {
    let set = FreeSetDescriptor::parse(&a.free_set)?;
    let f = match (&a.state, &a.unitary) {
        (Some(s), _) => free_sets::max_overlap_pure(&load_pure(s)?, &set)?,
        (None, Some(u)) => free_sets::max_overlap_choi_unitary(&load_channel(u)?, &set)?,
        (None, None) => return Err(Error::Parse("give --state or --unitary".into()).into()),
    };
    scalar_output(&a.output, "f", f)
}

fn need<T: Copy>(x: Option<T>, flag: &str) -> Result<T> {
    x.ok_or_else(|| Error::Parse(format!("this bound needs --{flag}")))
}

fn finite(name: &str, x: f64, kind: BoundKind, anchor: &str) -> BoundReport {
    BoundReport::new(name, BoundValue::Finite(x), kind, anchor)
}

pub fn bound_reports(a: &BoundArgs) -> Result<Vec<BoundReport>> {
    use BoundKind::*;
    const COPIES: &str = "n ≥ log((1−f)/ε) / log(1/Γ)";
    let g = || need(a.gamma, "gamma");
    let f = || need(a.f, "f");
    let eps = || need(a.eps, "eps");
    Ok(match a.name {
        BoundName::StateError => vec![finite("state_error", bounds::state_error_bound(g()?, f()?)?, ErrorLowerBound, "ε ≥ Γ(1−f)")
            .with_input("gamma", g()?)
            .with_input("f", f()?)],
        BoundName::Distillation | BoundName::Simulation | BoundName::QecCopies | BoundName::GateCount => {
            let name = match a.name {
                BoundName::Distillation => "distillation_overhead",
                BoundName::Simulation => "simulation_cost",
                BoundName::QecCopies => "qec_copies",
                _ => "noisy_gate_count",
            };
            vec![BoundReport::new(name, bounds::distillation_overhead(g()?, f()?, eps()?)?, CopyLowerBound, COPIES)
                .with_input("gamma", g()?)
                .with_input("f", f()?)
                .with_input("eps", eps()?)]
        }
        BoundName::Magic => {
            let (z, m) = (need(a.zeta, "zeta")?, need(a.m, "m")?);
            vec![BoundReport::new(
                "magic_overhead",
                bounds::magic_overhead(z, m, eps()?)?,
                CopyLowerBound,
                "n ≥ log(((4−2√2)^m − 1)/((4−2√2)^m·m·ε)) / log((2−√2)/(2ζ))",
            )
            .with_input("zeta", z)
            .with_input("m", m as f64)
            .with_input("eps", eps()?)]
        }
        BoundName::ChannelErrors => {
            let d = need(a.d, "d")?;
            let b = bounds::channel_error_bounds(g()?, f()?, d)?;
            let base = "ε_x ≥ Γ_N(1−f^cho_U)";
            [("diamond", b.diamond, base), ("worst_case", b.worst_case, base), ("choi", b.choi, base), ("average", b.average, "ε_ave ≥ d/(d+1)·Γ_N(1−f^cho_U)")]
                .into_iter()
                .map(|(n, v, anchor)| {
                    finite(&format!("channel_error_{n}"), v, ErrorLowerBound, anchor)
                        .with_input("gamma", a.gamma.unwrap_or_default())
                        .with_input("f_cho", a.f.unwrap_or_default())
                        .with_input("d", d as f64)
                })
                .collect()
        }
        BoundName::QecError => {
            let n = a.n.unwrap_or(1);
            vec![finite("qec_error", bounds::qec_error_bound_independent(g()?, n, f()?)?, ErrorLowerBound, "ε ≥ Γ^n(1−f^cho_{id_L})")
                .with_input("gamma", g()?)
                .with_input("f", f()?)
                .with_input("n", n as f64)]
        }
        BoundName::CapacityUses => {
            let k = need(a.k, "k")?;
            vec![BoundReport::new("capacity_min_uses", bounds::capacity_min_uses(g()?, k, eps()?)?, CopyLowerBound, "n ≥ log((1−2^{−k})/ε) / log(1/Γ)")
                .with_input("gamma", g()?)
                .with_input("k", k as f64)
                .with_input("eps", eps()?)]
        }
        BoundName::CapacityRate => {
            let n = need(a.n, "n")?;
            vec![BoundReport::new(
                "capacity_rate",
                bounds::capacity_rate_bound(g()?, n, eps()?)?,
                RateUpperBound,
                "k/n ≤ −(1/n)·log₂(1 − ε/Γⁿ), valid for ε ≤ Γⁿ",
            )
            .with_input("gamma", g()?)
            .with_input("n", n as f64)
            .with_input("eps", eps()?)]
        }
        BoundName::CczCount => vec![BoundReport::new(
            "noisy_ccz_count",
            bounds::noisy_ccz_count(g()?, eps()?)?,
            CopyLowerBound,
            "n ≥ log((1−f)/ε) / log(1/Γ) with f = 9/16, a worst-case overlap constant used in place of the Choi overlap",
        )
        .with_input("gamma", g()?)
        .with_input("f", bounds::CCZ_OVERLAP_BOUND)
        .with_input("eps", eps()?)],
        BoundName::Cv => {
            let r = need(a.r, "r")?;
            vec![finite("cv_error", bounds::cv_error_bound(g()?, r)?, ErrorLowerBound, "ε ≥ Γ(1 − 1/cosh r)")
                .with_input("gamma", g()?)
                .with_input("r", r)]
        }
        BoundName::MinEigenvalue => {
            let spec = a.state.as_deref().ok_or_else(|| Error::Parse("this bound needs --state".into()))?;
            let rho = load_state(spec)?;
            vec![finite("min_eigenvalue", bounds::min_eigenvalue_bound(&rho, f()?)?, ErrorLowerBound, "ε ≥ λ_min(1−f), smallest nonzero eigenvalue")
                .with_input("lambda_min", states::min_nonzero_eigenvalue(&rho)?)
                .with_input("f", f()?)]
        }
    })
}

fn render_reports(reports: &[BoundReport], o: &Output) -> Result<String> {
    Ok(match o.format {
        Format::Text => reports
            .iter()
            .map(|r| {
                let v = match r.value {
                    BoundValue::Finite(x) => fmt_g(x, o.digits),
                    other => other.to_string(),
                };
                if reports.len() == 1 { format!("{v}\n") } else { format!("{} {v}\n", r.name) }
            })
            .collect(),
        Format::Json => {
            let text = if reports.len() == 1 {
                serde_json::to_string_pretty(&reports[0])
            } else {
                serde_json::to_string_pretty(reports)
            };
            text.expect("json") + "\n"
        }
        Format::Csv => {
            let mut out = reports[0].csv_header();
            out.push('\n');
            for r in reports {
                out.push_str(&r.csv_row(g12));
                out.push('\n');
            }
            out
        }
        Format::Svg => return Err(Error::Parse("svg output is only available for figures".into())),
    })
}

fn bound(a: &BoundArgs) -> std::result::Result<(), Failure> {
    let reports = bound_reports(a)?;
    write_output(&a.output.out, &render_reports(&reports, &a.output)?)
}

pub fn figure_config(fig: Figure, path: Option<&Path>) -> Result<FigureConfig> {
    match path {
        Some(p) => FigureConfig::parse(&std::fs::read_to_string(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?),
        None => FigureConfig::parse(fig.default_config()),
    }
}

fn figure(a: &FigureArgs) -> std::result::Result<(), Failure> {
    let cfg = figure_config(a.figure, a.config.as_deref())?;
    let data = figures::compute(a.figure, &cfg)?;
    let doc = match a.format {
        Format::Json => data.table.to_json(),
        Format::Svg => svg::emit_svg(&data.series, &data.style)?,
        Format::Csv | Format::Text => data.table.to_csv(),
    };
    write_output(&a.out, &doc)?;
    if let Some(p) = &a.svg {
        let doc = svg::emit_svg(&data.series, &data.style)?;
        std::fs::write(p, doc).map_err(|e| io_failure(p, e))?;
    }
    Ok(())
}

fn table_output(t: &Table, o: &Output) -> std::result::Result<(), Failure> {
    let text = match o.format {
        Format::Json => t.to_json(),
        Format::Svg => return Err(Error::Parse("svg output is only available for figures".into()).into()),
        Format::Csv | Format::Text => t.to_csv(),
    };
    write_output(&o.out, &text)
}

fn capacity(a: &CapacityArgs) -> std::result::Result<(), Failure> {
    let ch = load_channel(&a.channel)?;
    let set = match &a.free_set {
        Some(s) => FreeSetDescriptor::parse(s)?,
        None => FreeSetDescriptor::ppt(ch.dim_in(), ch.dim_out())?,
    };
    let gamma = free_sets::free_component_channel(&ch, &set)?.gamma;
    let mut t = Table::new(["gamma", "k", "eps", "min_uses", "min_uses_ceil", "n", "gamma_pow_n", "rate_bound"]);
    for &eps in &a.eps {
        let uses = bounds::capacity_min_uses(gamma, a.k, eps)?;
        for n in 1..=a.n_max {
            let rate = bounds::capacity_rate_bound(gamma, n, eps)?;
            t.push(vec![
                g12(gamma),
                a.k.to_string(),
                g12(eps),
                bound_cell(uses),
                ceil_cell(uses),
                n.to_string(),
                g12(gamma.powi(n as i32)),
                bound_cell(rate),
            ]);
        }
    }
    table_output(&t, &a.output)
}

fn tcount(a: &TcountArgs) -> std::result::Result<(), Failure> {
    let f = a.f.unwrap_or(bounds::CCZ_OVERLAP_BOUND);
    let mut gammas = Vec::with_capacity(a.mu.len());
    for &mu in &a.mu {
        gammas.push(fig::noisy_t_gamma(mu)?);
    }
    let mut t = Table::new(["mu", "gamma", "eps", "count", "count_ceil"]);
    for (&mu, &g) in a.mu.iter().zip(&gammas) {
        for &eps in &a.eps {
            let count = bounds::noisy_gate_count(g, f, eps)?;
            t.push(vec![g12(mu), g12(g), g12(eps), bound_cell(count), ceil_cell(count)]);
        }
    }
    table_output(&t, &a.output)
}

fn qec(a: &QecArgs) -> std::result::Result<(), Failure> {
    let noise = load_channel(&a.noise)?;
    let set = FreeSetDescriptor::parse(&a.free_set)?;
    let dl = a.logical_dim;
    let logical_set = match &a.logical_free_set {
        Some(s) => FreeSetDescriptor::parse(s)?,
        None => FreeSetDescriptor::ppt(dl, dl)?,
    };
    if let Some(enc) = &a.encoder {
        let encoder = load_channel(enc)?;
        let logical: Vec<PureState> = a.logical_state.iter().map(|s| load_pure(s)).collect::<Result<_>>()?;
        let out = fig::qec_state_bounds(&encoder, &noise, &logical, &set, &logical_set)?;
        let mut t = Table::new(["state", "error_bound"]);
        for (s, v) in a.logical_state.iter().zip(&out.per_state) {
            t.push(vec![s.replace(',', ";"), g12(*v)]);
        }
        t.push(vec!["worst".into(), g12(out.worst)]);
        t.push(vec!["average".into(), g12(out.average)]);
        return table_output(&t, &a.output);
    }
    let gamma = match a.mu {
        Some(mu) => mu,
        None => free_sets::free_component_channel(&noise, &set)?.gamma,
    };
    let f = free_sets::max_overlap_choi_unitary(&Channel::identity(dl), &logical_set)?;
    let mut t = Table::new(["gamma", "f_id_cho", "blocks", "error_bound", "eps", "copies", "copies_ceil"]);
    let err = bounds::qec_error_bound_independent(gamma, a.blocks, f)?;
    let (eps, copies, copies_ceil) = match a.eps {
        Some(e) => {
            let c = bounds::qec_copies(gamma, f, e)?;
            (g12(e), bound_cell(c), ceil_cell(c))
        }
        None => (String::new(), String::new(), String::new()),
    };
    t.push(vec![g12(gamma), g12(f), a.blocks.to_string(), g12(err), eps, copies, copies_ceil]);
    table_output(&t, &a.output)
}
