//! `rdich` — batch front end for the radial dichotomy toolkit.
//!
//! One subcommand per pipeline stage: `spectrum` (eigendecomposition and
//! hypothesis report), `verify-lemmas` (sampled estimate verification),
//! `symbols` (symbol tables), `dichotomy` (field propagation and decay
//! rates), `solve` (annulus boundary value problems). All artifacts are
//! written atomically (temp file + rename) and every run is deterministic:
//! identical inputs produce byte-identical outputs, at any thread count.
//!
//! Exit codes: 0 success; 1 usage, configuration, or I/O error;
//! 2 spectral hypothesis violation; 3 verification completed with failing
//! lemmas; 4 numerical failure (quadrature/ODE budget exhausted).

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use rdich_core::config::{OutputFormat, RunConfig};
use rdich_core::dichotomy::{measure_decay, stable_propagate, unstable_propagate};
use rdich_core::error::{DichotomyError, LemmaError};
use rdich_core::harmonics::{laplace_eigenvalue, BasisTag, SpectralField};
use rdich_core::io as fio;
use rdich_core::lemma_lab::{verify_lemma, LemmaId, LemmaReport, SamplePlan};
use rdich_core::par::ExecMode;
use rdich_core::spectral::{check_hypotheses, eigendecompose_capped, EigenData, HypothesisReport};
use rdich_core::symbols::SymbolSample;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "rdich", version, about = "Exponential dichotomies for radial elliptic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigendecompose the potential and report the spectral hypotheses.
    Spectrum(SpectrumArgs),
    /// Sample-verify the quantitative estimates and estimate their constants.
    #[command(name = "verify-lemmas")]
    VerifyLemmas(VerifyArgs),
    /// Symbol tables γ, ∂_rγ over a radius grid.
    Symbols(SymbolsArgs),
    /// Propagate a coefficient field along the dichotomy, or fit decay rates.
    Dichotomy(DichotomyArgs),
    /// Solve the annulus boundary value problem mode by mode.
    Solve(SolveArgs),
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output path for the eigenvalue table; defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config output format.
    #[arg(long)]
    format: Option<FormatFlag>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Lemma id (A1..A8, A7a, A7b) or "all".
    #[arg(long, default_value = "all")]
    lemma: String,
    /// Sampling seed; precedence: this flag, then the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    /// Largest Laplace–Beltrami eigenvalue sampled.
    #[arg(long, default_value_t = 1e6)]
    mu_max: f64,
    /// Largest radius sampled.
    #[arg(long, default_value_t = 1e3)]
    r_max: f64,
    /// λ sampling box, as re_lo,re_hi,im_lo,im_hi.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    lambda_box: Option<Vec<f64>>,
    /// Report output path (JSON array); defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SymbolsArgs {
    #[command(subcommand)]
    action: SymbolsAction,
}

#[derive(Subcommand, Debug)]
enum SymbolsAction {
    /// Emit γ and ∂_rγ along a radius grid as CSV.
    Dump(SymbolsDumpArgs),
}

#[derive(Args, Debug)]
struct SymbolsDumpArgs {
    /// Run configuration; λ is taken from the potential's eigenvalues.
    #[arg(long)]
    config: PathBuf,
    /// Eigenvalue index ℓ (0-based).
    #[arg(long, default_value_t = 0)]
    ell: usize,
    /// Laplace–Beltrami eigenvalue μ (overrides --degree).
    #[arg(long)]
    mu: Option<f64>,
    /// Harmonic degree k whose μ_k to use.
    #[arg(long, default_value_t = 1)]
    degree: u32,
    #[arg(long, default_value_t = 1.0)]
    r_from: f64,
    #[arg(long, default_value_t = 10.0)]
    r_to: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DichotomyArgs {
    #[command(subcommand)]
    action: Option<DichotomyAction>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input field CSV (eigen basis); synthesized as all-ones when absent.
    #[arg(long)]
    field: Option<PathBuf>,
    #[arg(long)]
    r_from: Option<f64>,
    #[arg(long)]
    r_to: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum DichotomyAction {
    /// Measure propagator decay and fit (K, η).
    Rates(RatesArgs),
}

#[derive(Args, Debug)]
struct RatesArgs {
    #[arg(long)]
    config: PathBuf,
    /// Number of radius pairs in the measurement ladder.
    #[arg(long, default_value_t = 12)]
    pairs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    /// Boundary data (JSON: {"inner": field, "outer": field or "decay"}).
    #[arg(long)]
    bc: PathBuf,
    #[arg(long)]
    r0: f64,
    #[arg(long)]
    r1: f64,
    #[arg(long = "N", default_value_t = 256)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum FormatFlag {
    Csv,
    Json,
}

/// One-line JSON diagnostic on stderr.
fn diag(level: &str, event: &str, detail: &str) {
    let line = serde_json::json!({"level": level, "event": event, "detail": detail});
    eprintln!("{line}");
}

/// Atomic write: temp file in the destination directory, then rename.
fn write_artifact(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => write_artifact(path, content.as_bytes())
            .map_err(|e| format!("writing {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: msg.into() }
    }
    fn hypothesis(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_HYPOTHESIS, message: msg.into() }
    }
    fn numeric(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_NUMERIC, message: msg.into() }
    }
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("reading {}: {e}", path.display())))?;
    RunConfig::from_json(&text).map_err(|e| Failure::usage(format!("config: {e}")))
}

/// Decompose the potential; a defective matrix counts as a hypothesis
/// violation (the H2 machinery is unusable).
fn decompose(cfg: &RunConfig) -> Result<EigenData, Failure> {
    eigendecompose_capped(&cfg.potential_matrix(), cfg.tolerances.cond_cap)
        .map_err(|e| Failure::hypothesis(format!("eigendecomposition: {e}")))
}

/// Require H1 (and optionally H2); on failure emit the hypothesis report to
/// stderr and fail with exit 2.
fn require_hypotheses(eig: &EigenData, need_h2: bool) -> Result<HypothesisReport, Failure> {
    let rep = check_hypotheses(eig);
    let ok = if need_h2 { rep.h2 } else { rep.h1 };
    if !ok {
        let js = serde_json::to_string(&rep).unwrap();
        eprintln!("{js}");
        return Err(Failure::hypothesis(format!(
            "spectral hypotheses violated (need {})",
            if need_h2 { "H2" } else { "H1" }
        )));
    }
    Ok(rep)
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with successful exit.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::VerifyLemmas(a) => cmd_verify(a),
        Command::Symbols(a) => match a.action {
            SymbolsAction::Dump(d) => cmd_symbols_dump(d),
        },
        Command::Dichotomy(a) => cmd_dichotomy(a),
        Command::Solve(a) => cmd_solve(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            diag("error", "failed", &f.message);
            f.code
        }
    }
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    lambdas: Vec<[f64; 2]>,
    cond: f64,
    potential_norm: f64,
    #[serde(flatten)]
    hypotheses: &'a HypothesisReport,
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<i32, Failure> {
    let cfg = load_config(&a.config)?;
    let eig = decompose(&cfg)?;
    let rep = check_hypotheses(&eig);
    let format = match a.format {
        Some(FormatFlag::Csv) => OutputFormat::Csv,
        Some(FormatFlag::Json) => OutputFormat::Json,
        None => cfg.format,
    };
    let content = match format {
        OutputFormat::Json => {
            let doc = SpectrumReport {
                lambdas: eig.lambdas().iter().map(|l| [l.re, l.im]).collect(),
                cond: eig.cond(),
                potential_norm: eig.potential_norm(),
                hypotheses: &rep,
            };
            serde_json::to_string_pretty(&doc).unwrap() + "\n"
        }
        OutputFormat::Csv => {
            let mut s = String::from("l,re,im\n");
            for (ell, l) in eig.lambdas().iter().enumerate() {
                s.push_str(&format!("{ell},{},{}\n", l.re, l.im));
            }
            s
        }
    };
    emit(a.out.as_ref(), &content).map_err(Failure::usage)?;
    diag(
        "info",
        "spectrum",
        &format!("h1={} h2={} gamma_lower={}", rep.h1, rep.h2, rep.gamma_lower),
    );
    Ok(EXIT_OK)
}

fn cmd_verify(a: VerifyArgs) -> Result<i32, Failure> {
    let cfg = load_config(&a.config)?;
    let eig = decompose(&cfg)?;
    let seed = a.seed.unwrap_or(cfg.seed);
    let mut plan = SamplePlan::new(seed, a.count);
    plan.mu_range = [0.0, a.mu_max];
    plan.r_range = [1.0, a.r_max];
    plan.sphere = cfg.sphere;
    if let Some(b) = &a.lambda_box {
        plan.lambda_box = rdich_core::lemma_lab::LambdaBox {
            re: [b[0], b[1]],
            im: [b[2], b[3]],
        };
    }
    plan.validate().map_err(Failure::usage)?;

    let ids: Vec<LemmaId> = if a.lemma.eq_ignore_ascii_case("all") {
        LemmaId::ALL.to_vec()
    } else {
        vec![a.lemma.parse().map_err(Failure::usage)?]
    };

    let mut reports: Vec<LemmaReport> = Vec::with_capacity(ids.len());
    for id in ids {
        match verify_lemma(id, &eig, &plan) {
            Ok(rep) => reports.push(rep),
            Err(LemmaError::HypothesisViolation { lemma, needed }) => {
                let hrep = check_hypotheses(&eig);
                eprintln!("{}", serde_json::to_string(&hrep).unwrap());
                return Err(Failure::hypothesis(format!(
                    "lemma {lemma} requires {needed}"
                )));
            }
            Err(e @ LemmaError::Symbol(rdich_core::error::SymbolError::BranchCut { .. })) => {
                // The symbol hit the cut while evaluating: an H1-type failure.
                let hrep = check_hypotheses(&eig);
                eprintln!("{}", serde_json::to_string(&hrep).unwrap());
                return Err(Failure::hypothesis(format!("lemma {id}: {e}")));
            }
            Err(e) => return Err(Failure::numeric(format!("lemma {id}: {e}"))),
        }
    }
    let all_pass = reports.iter().all(|r| r.pass);
    let content = serde_json::to_string_pretty(&reports).unwrap() + "\n";
    emit(a.out.as_ref(), &content).map_err(Failure::usage)?;
    for r in &reports {
        diag(
            "info",
            "lemma",
            &format!("{} pass={} c_estimate={:.6e}", r.lemma, r.pass, r.c_estimate),
        );
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn cmd_symbols_dump(a: SymbolsDumpArgs) -> Result<i32, Failure> {
    let cfg = load_config(&a.config)?;
    let eig = decompose(&cfg)?;
    require_hypotheses(&eig, false)?;
    if a.ell >= eig.dim() {
        return Err(Failure::usage(format!(
            "--ell {} out of range for d = {}",
            a.ell,
            eig.dim()
        )));
    }
    if !(1.0 <= a.r_from && a.r_from < a.r_to) {
        return Err(Failure::usage("need 1 <= r_from < r_to"));
    }
    if a.points < 2 {
        return Err(Failure::usage("need at least 2 points"));
    }
    let lambda = eig.lambdas()[a.ell];
    let mu = a.mu.unwrap_or_else(|| laplace_eigenvalue(a.degree, cfg.sphere.n));
    if mu < 0.0 {
        return Err(Failure::usage("mu must be nonnegative"));
    }
    let grid: Vec<f64> = (0..a.points)
        .map(|i| a.r_from + (a.r_to - a.r_from) * i as f64 / (a.points - 1) as f64)
        .collect();
    let sample = SymbolSample::compute(lambda, mu, grid, ExecMode::Auto)
        .map_err(|e| Failure::hypothesis(format!("symbol evaluation: {e}")))?;
    emit(a.out.as_ref(), &fio::symbol_sample_to_csv(&sample)).map_err(Failure::usage)?;
    Ok(EXIT_OK)
}

fn ones_field(cfg: &RunConfig) -> SpectralField {
    let template = SpectralField::zeros(cfg.sphere, cfg.potential.d, BasisTag::Eigen);
    SpectralField::from_coeffs(
        cfg.sphere,
        cfg.potential.d,
        BasisTag::Eigen,
        vec![Complex64::new(1.0, 0.0); template.coeffs().len()],
    )
}

fn cmd_dichotomy(a: DichotomyArgs) -> Result<i32, Failure> {
    if let Some(DichotomyAction::Rates(r)) = a.action {
        return cmd_rates(r);
    }
    let config = a.config.ok_or_else(|| Failure::usage("--config is required"))?;
    let (r_from, r_to) = match (a.r_from, a.r_to) {
        (Some(f), Some(t)) => (f, t),
        _ => return Err(Failure::usage("--r-from and --r-to are required")),
    };
    if r_from < 1.0 || r_to < 1.0 {
        return Err(Failure::usage("radii must be at least 1"));
    }
    let cfg = load_config(&config)?;
    let eig = decompose(&cfg)?;
    require_hypotheses(&eig, true)?;
    let field = match &a.field {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("reading {}: {e}", path.display())))?;
            fio::field_from_csv(&text, cfg.sphere, cfg.potential.d, BasisTag::Eigen)
                .map_err(Failure::usage)?
        }
        None => ones_field(&cfg),
    };
    let opts = cfg.tolerances.ode_options();
    let evolved = if r_to >= r_from {
        stable_propagate(&field, &eig, r_from, r_to, ExecMode::Auto, &opts)
    } else {
        unstable_propagate(&field, &eig, r_from, r_to, ExecMode::Auto, &opts)
    }
    .map_err(|e| match e {
        DichotomyError::Symbol(_) => Failure::hypothesis(format!("propagation: {e}")),
        other => Failure::numeric(format!("propagation: {other}")),
    })?;
    emit(a.out.as_ref(), &fio::field_to_csv(&evolved)).map_err(Failure::usage)?;
    diag("info", "dichotomy", &format!("propagated {} -> {}", r_from, r_to));
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RatesReport {
    eta: f64,
    k_const: f64,
    rate_floor: f64,
    pairs: usize,
}

fn cmd_rates(a: RatesArgs) -> Result<i32, Failure> {
    let cfg = load_config(&a.config)?;
    let eig = decompose(&cfg)?;
    require_hypotheses(&eig, true)?;
    if a.pairs < 2 {
        return Err(Failure::usage("need at least 2 pairs"));
    }
    let mus: Vec<f64> = (0..=cfg.sphere.k_max)
        .map(|k| laplace_eigenvalue(k, cfg.sphere.n))
        .collect();
    // Separation ladder from 0.1 to 10 with a fixed base radius.
    let pairs: Vec<(f64, f64)> = (0..a.pairs)
        .map(|i| {
            let sep = 0.1 + (10.0 - 0.1) * i as f64 / (a.pairs - 1) as f64;
            (1.0 + sep, 1.0)
        })
        .collect();
    let fit = measure_decay(&eig, &mus, &pairs, ExecMode::Auto, &cfg.tolerances.ode_options())
        .map_err(|e| Failure::numeric(format!("decay fit: {e}")))?;
    let floor = eig
        .lambdas()
        .iter()
        .map(|l| l.sqrt().re)
        .fold(f64::INFINITY, f64::min);
    let doc = RatesReport {
        eta: fit.eta,
        k_const: fit.k_const,
        rate_floor: floor,
        pairs: a.pairs,
    };
    emit(a.out.as_ref(), &(serde_json::to_string_pretty(&doc).unwrap() + "\n"))
        .map_err(Failure::usage)?;
    Ok(EXIT_OK)
}

fn cmd_solve(a: SolveArgs) -> Result<i32, Failure> {
    use rdich_core::bvp::{solve_annulus, BoundaryData, OuterFieldBc};
    let cfg = load_config(&a.config)?;
    let eig = decompose(&cfg)?;
    require_hypotheses(&eig, false)?;
    if !(1.0 <= a.r0 && a.r0 < a.r1) {
        return Err(Failure::usage("need 1 <= r0 < r1"));
    }
    let bc_text = std::fs::read_to_string(&a.bc)
        .map_err(|e| Failure::usage(format!("reading {}: {e}", a.bc.display())))?;
    let bc_json: serde_json::Value =
        serde_json::from_str(&bc_text).map_err(|e| Failure::usage(format!("bc: {e}")))?;
    let inner_val = bc_json
        .get("inner")
        .ok_or_else(|| Failure::usage("bc: missing \"inner\""))?;
    let inner = fio::field_from_json(&inner_val.to_string()).map_err(Failure::usage)?;
    let outer = match bc_json.get("outer") {
        None => return Err(Failure::usage("bc: missing \"outer\" (field or \"decay\")")),
        Some(serde_json::Value::String(s)) if s == "decay" => OuterFieldBc::Decay,
        Some(v) => OuterFieldBc::Field(fio::field_from_json(&v.to_string()).map_err(Failure::usage)?),
    };
    if inner.sphere() != cfg.sphere || inner.fiber_dim() != cfg.potential.d {
        return Err(Failure::usage("bc: inner field does not match config sphere/potential"));
    }
    if inner.basis() != BasisTag::Eigen {
        return Err(Failure::usage("bc: fields must be in the eigen basis"));
    }
    let bc = BoundaryData { inner, outer };
    let profiles = solve_annulus(&eig, &bc, a.r0, a.r1, a.n, ExecMode::Auto).map_err(|e| {
        match e {
            rdich_core::error::BvpError::Symbol(_)
            | rdich_core::error::BvpError::SingularSystem { .. } => {
                Failure::hypothesis(format!("solve: {e}"))
            }
            other => Failure::usage(format!("solve: {other}")),
        }
    })?;
    // Solution CSV: k,j,l,r,re,im.
    let mut out = String::from("k,j,l,r,re,im\n");
    for p in &profiles {
        for (r, v) in p.r_grid.iter().zip(p.values.iter()) {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.mode.k, p.mode.j, p.mode.ell, r, v.re, v.im
            ));
        }
    }
    emit(a.out.as_ref(), &out).map_err(Failure::usage)?;
    diag("info", "solve", &format!("{} mode profiles", profiles.len()));
    Ok(EXIT_OK)
}
