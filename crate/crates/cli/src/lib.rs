//! `ngon`: batch front end for the polygon laboratory.
//!
//! Every subcommand writes one report (JSON by default, CSV with
//! `--format csv`) to stdout or `--out`. Reports carry the seed, fields
//! appear in declaration order, and floats are printed with 17 significant
//! digits, so identical invocations produce identical bytes.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on
//! input or usage errors.

pub mod json;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ngon_core::calculus::{
    self, sigma_estimate, verify_deficit_gradient, verify_hessian_phi, DerivativeReport,
    SigmaEstimate,
};
use ngon_core::convexify::{convexify, FlipStep, DEFAULT_MAX_FLIPS};
use ngon_core::lab::{
    estimate_cn, holdout_check, scaling_check, sharpness_probe, verify, verify_polygon,
    ConstantEstimate, Constants, HoldoutReport, InequalityReport, LocalModel, ScalingReport,
    SharpnessReport, Target,
};
use ngon_core::manifold::{residuals, sample_with, seeded_rng};
use ngon_core::spectral::{build_circulant, min_eig_on_z};
use ngon_core::{ConstraintResiduals, Error, ManifoldPoint, SamplerConfig, VertexPolygon};

use json::format_f64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ngon", version, about = "Numerical laboratory for the quantitative polygonal isoperimetric inequality")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Seed of every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Subcommand-specific pass threshold.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Vertex counts: `8`, `3-8` or `3,5,8`.
#[derive(Debug, Clone)]
struct Counts(Vec<usize>);

fn parse_counts(s: &str) -> Result<Counts, String> {
    let bad = |_| format!("invalid vertex count list {s:?}");
    let counts: Vec<usize> = if let Some((a, b)) = s.split_once('-') {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?);
        (a..=b).collect()
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(bad)).collect::<Result<_, _>>()?
    };
    if counts.is_empty() {
        return Err(format!("empty vertex count list {s:?}"));
    }
    Ok(Counts(counts))
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every inequality and identity on one polygon.
    Verify {
        /// Vertex CSV (`x,y` per line) or manifold point JSON (`{"n","x","r"}`).
        #[arg(long)]
        input: PathBuf,
        /// Constant of the main bound, enables its check.
        #[arg(long)]
        cn: Option<f64>,
        /// Constant of the side-variance bound, enables its check.
        #[arg(long)]
        c4: Option<f64>,
    },
    /// Emit random manifold points as JSON lines.
    Sample {
        #[arg(long)]
        n: usize,
        /// Number of points.
        #[arg(long, default_value_t = 10)]
        budget: usize,
        /// Keep only convex polygons.
        #[arg(long)]
        convex: bool,
    },
    /// Estimate the main-bound constant and re-check it on fresh convex samples.
    EstimateCn {
        #[arg(long, value_parser = parse_counts, default_value = "3-8")]
        n: Counts,
        /// Samples of the global phase.
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        /// Convex holdout samples.
        #[arg(long, default_value_t = 1000)]
        holdout: usize,
    },
    /// Follow the ratio along retracted curves into the regular polygon.
    Sharpness {
        #[arg(long, value_parser = parse_counts, default_value = "3-8")]
        n: Counts,
        /// Number of random tangent directions per n.
        #[arg(long, default_value_t = 20)]
        budget: usize,
    },
    /// Circulant spectrum and coercivity of the block Hessian on Z.
    Spectral {
        #[arg(long, value_parser = parse_counts)]
        n: Counts,
    },
    /// Finite-difference derivatives at the regular polygon against closed forms.
    Derivatives {
        #[arg(long, value_parser = parse_counts, default_value = "3-12")]
        n: Counts,
    },
    /// Flip pockets of a simple polygon until it is convex.
    Convexify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_FLIPS)]
        max_flips: usize,
        /// Per-step JSON-lines trace.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Dilation laws of the deficit and the angle variance.
    Scaling {
        /// Vertex CSV; a random manifold point is used when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        n: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Verify { .. } => "verify",
            Command::Sample { .. } => "sample",
            Command::EstimateCn { .. } => "estimate-cn",
            Command::Sharpness { .. } => "sharpness",
            Command::Spectral { .. } => "spectral",
            Command::Derivatives { .. } => "derivatives",
            Command::Convexify { .. } => "convexify",
            Command::Scaling { .. } => "scaling",
        }
    }
}

/// A failed run: exit code plus the error kind and message for the report.
#[derive(Debug)]
struct Failure {
    code: i32,
    kind: String,
    message: String,
}

impl Failure {
    fn input(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT_ERROR,
            kind: kind.into(),
            message: message.into(),
        }
    }
}

fn error_kind(e: &Error) -> String {
    let debug = format!("{e:?}");
    debug
        .split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or_default()
        .to_string()
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::TooFewVertices(_)
            | Error::DuplicateConsecutiveVertex(..)
            | Error::DegenerateZeroArea
            | Error::BarycenterOutside { .. }
            | Error::ZeroRadius(_)
            | Error::InvalidManifoldPoint(_)
            | Error::NotOnManifold(_)
            | Error::NonpositiveArea(_)
            | Error::DimensionMismatch { .. }
            | Error::StepOutOfRange(_)
            | Error::BudgetTooSmall(_)
            | Error::NotSimple
            | Error::Parse(_) => EXIT_INPUT_ERROR,
            _ => EXIT_CHECK_FAILED,
        };
        Failure {
            code,
            kind: error_kind(&e),
            message: e.to_string(),
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    command: &'a str,
    seed: u64,
    pass: bool,
    report: T,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    command: &'a str,
    seed: u64,
    pass: bool,
    error: &'a str,
    message: &'a str,
}

/// A finished report: rendered text and whether every check passed.
struct Output {
    text: String,
    pass: bool,
}

impl Output {
    fn json<T: Serialize>(command: &str, seed: u64, pass: bool, report: T) -> Self {
        let mut text = json::to_pretty(&Envelope {
            command,
            seed,
            pass,
            report,
        });
        text.push('\n');
        Output { text, pass }
    }

    fn csv(command: &str, seed: u64, pass: bool, header: &str, rows: Vec<Vec<String>>) -> Self {
        let mut text = format!("# ngon {command} seed={seed} pass={pass}\n{header}\n");
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        Output { text, pass }
    }
}

fn f(v: f64) -> String {
    format_f64(v)
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::input("Io", format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::input("Io", format!("cannot write {}: {e}", path.display())))
}

fn is_json(path: &Path, text: &str) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || text.trim_start().starts_with('{')
}

fn read_polygon(path: &Path) -> Result<VertexPolygon, Failure> {
    let text = read_input(path)?;
    if is_json(path, &text) {
        let m: ManifoldPoint = serde_json::from_str(&text)
            .map_err(|e| Failure::from(Error::Parse(e.to_string())))?;
        return Ok(m.to_vertices()?);
    }
    Ok(VertexPolygon::from_csv_str(&text)?)
}

fn csv_unsupported(command: &str) -> Failure {
    Failure::input("UnsupportedFormat", format!("{command} has no CSV output"))
}

fn cmd_verify(c: &Common, input: &Path, cn: Option<f64>, c4: Option<f64>) -> Result<Output, Failure> {
    let consts = Constants {
        c_n: cn,
        side_variance: c4,
    };
    let text = read_input(input)?;
    let report: InequalityReport = if is_json(input, &text) {
        let m: ManifoldPoint = serde_json::from_str(&text)
            .map_err(|e| Failure::from(Error::Parse(e.to_string())))?;
        verify(&m, &consts)?
    } else {
        verify_polygon(&VertexPolygon::from_csv_str(&text)?, &consts)?
    };
    let pass = report.all_pass();
    Ok(match c.format {
        Format::Json => Output::json("verify", c.seed, pass, report),
        Format::Csv => {
            let rows = report
                .records
                .iter()
                .map(|r| vec![r.name.to_string(), f(r.lhs), f(r.rhs), f(r.slack), r.pass.to_string()])
                .collect();
            Output::csv("verify", c.seed, pass, "name,lhs,rhs,slack,pass", rows)
        }
    })
}

#[derive(Serialize)]
struct SampleRecord<'a> {
    index: usize,
    seed: u64,
    n: usize,
    convex: bool,
    x: &'a [f64],
    r: &'a [f64],
    residuals: ConstraintResiduals,
    max_residual: f64,
    deficit: f64,
    phi: f64,
}

fn cmd_sample(c: &Common, n: usize, budget: usize, convex: bool) -> Result<Output, Failure> {
    if c.format == Format::Csv {
        return Err(csv_unsupported("sample"));
    }
    let config = if convex {
        SamplerConfig::convex()
    } else {
        SamplerConfig::default()
    };
    let mut rng = seeded_rng(c.seed);
    let mut text = String::new();
    for index in 0..budget {
        let m = sample_with(n, &config, &mut rng, 100_000)?;
        let res = residuals(m.x(), m.r());
        let s = m.summary()?;
        text.push_str(&json::to_line(&SampleRecord {
            index,
            seed: c.seed,
            n,
            convex: m.is_convex(),
            x: m.x(),
            r: m.r(),
            residuals: res,
            max_residual: res.max_abs(),
            deficit: s.deficit,
            phi: s.phi,
        }));
        text.push('\n');
    }
    Ok(Output { text, pass: true })
}

#[derive(Serialize)]
struct ConstantRow {
    n: usize,
    c_hat: f64,
    sigma: f64,
    min_eig_on_z: f64,
    estimate: ConstantEstimate,
    holdout: HoldoutReport,
}

fn cmd_estimate_cn(c: &Common, counts: &[usize], budget: usize, holdout: usize) -> Result<Output, Failure> {
    let mut rows = Vec::with_capacity(counts.len());
    for &n in counts {
        let estimate = estimate_cn(n, budget, c.seed)?;
        let holdout = holdout_check(&estimate, holdout, c.seed.wrapping_add(1))?;
        rows.push(ConstantRow {
            n,
            c_hat: estimate.c_hat,
            sigma: sigma_estimate(n, calculus::DEFAULT_STEP)?.sigma,
            min_eig_on_z: min_eig_on_z(n).numerical,
            estimate,
            holdout,
        });
    }
    let pass = rows.iter().all(|r| r.holdout.violations == 0);
    Ok(match c.format {
        Format::Json => Output::json("estimate-cn", c.seed, pass, rows),
        Format::Csv => {
            let table = rows
                .iter()
                .map(|r| vec![r.n.to_string(), f(r.c_hat), f(r.sigma), f(r.min_eig_on_z)])
                .collect();
            Output::csv("estimate-cn", c.seed, pass, "n,c_hat,sigma,min_eig_on_Z", table)
        }
    })
}

const SHARPNESS_T: [f64; 3] = [1e-2, 3e-3, 1e-3];

#[derive(Serialize)]
struct SharpnessRow {
    n: usize,
    rayleigh_max: f64,
    max_relative_error: f64,
    min_limit: f64,
    directions: Vec<SharpnessReport>,
}

fn cmd_sharpness(c: &Common, counts: &[usize], budget: usize) -> Result<Output, Failure> {
    let tol = c.tol.unwrap_or(2e-2);
    let t_min = SHARPNESS_T[SHARPNESS_T.len() - 1];
    let mut rows = Vec::with_capacity(counts.len());
    for &n in counts {
        let model = LocalModel::new(n, Target::MainTheorem)?;
        let (rayleigh_max, _) = model.max_rayleigh()?;
        let mut rng = seeded_rng(c.seed.wrapping_add(n as u64));
        let mut directions = Vec::with_capacity(budget);
        for _ in 0..budget {
            let w = model.basis.random_unit(&mut rng);
            directions.push(sharpness_probe(&model, &w, &SHARPNESS_T)?);
        }
        rows.push(SharpnessRow {
            n,
            rayleigh_max,
            max_relative_error: directions
                .iter()
                .map(|d| d.relative_error_at(t_min).unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max),
            min_limit: directions
                .iter()
                .map(|d| if d.positive { d.limit } else { 0.0 })
                .fold(f64::INFINITY, f64::min),
            directions,
        });
    }
    let pass = rows
        .iter()
        .all(|r| r.max_relative_error <= tol && r.min_limit > 0.0);
    Ok(match c.format {
        Format::Json => Output::json("sharpness", c.seed, pass, rows),
        Format::Csv => {
            let table = rows
                .iter()
                .map(|r| {
                    vec![r.n.to_string(), f(r.rayleigh_max), f(r.max_relative_error), f(r.min_limit)]
                })
                .collect();
            Output::csv(
                "sharpness",
                c.seed,
                pass,
                "n,rayleigh_max,max_relative_error,min_limit",
                table,
            )
        }
    })
}

#[derive(Serialize)]
struct SpectralRow {
    n: usize,
    generator: Vec<f64>,
    eigenvalues: Vec<f64>,
    basis_norms: Vec<f64>,
    min_eig_on_z: f64,
    closed_form: f64,
    relative_gap: f64,
}

fn cmd_spectral(c: &Common, counts: &[usize]) -> Result<Output, Failure> {
    let tol = c.tol.unwrap_or(1e-9);
    let mut rows = Vec::with_capacity(counts.len());
    for &n in counts {
        if n < 3 {
            return Err(Error::TooFewVertices(n).into());
        }
        let sys = build_circulant(n);
        let coercivity = min_eig_on_z(n);
        rows.push(SpectralRow {
            n,
            generator: sys.generator().to_vec(),
            eigenvalues: sys.eigenvalues().to_vec(),
            basis_norms: sys.basis_norms(),
            min_eig_on_z: coercivity.numerical,
            closed_form: coercivity.closed_form,
            relative_gap: coercivity.relative_gap(),
        });
    }
    let pass = rows.iter().all(|r| r.relative_gap <= tol);
    Ok(match c.format {
        Format::Json => Output::json("spectral", c.seed, pass, rows),
        Format::Csv => {
            let table = rows
                .iter()
                .map(|r| vec![r.n.to_string(), f(r.min_eig_on_z), f(r.closed_form), f(r.relative_gap)])
                .collect();
            Output::csv("spectral", c.seed, pass, "n,min_eig_on_Z,closed_form,relative_gap", table)
        }
    })
}

#[derive(Serialize)]
struct DerivativeRow {
    n: usize,
    phi: DerivativeReport,
    deficit: DerivativeReport,
    sigma_coarse: SigmaEstimate,
    sigma_fine: SigmaEstimate,
    sigma_step_drift: f64,
}

fn cmd_derivatives(c: &Common, counts: &[usize]) -> Result<Output, Failure> {
    let tol = c.tol.unwrap_or(1e-3);
    let mut rows = Vec::with_capacity(counts.len());
    for &n in counts {
        if n < 3 {
            return Err(Error::TooFewVertices(n).into());
        }
        let sigma_coarse = sigma_estimate(n, 1e-4)?;
        let sigma_fine = sigma_estimate(n, calculus::DEFAULT_STEP)?;
        rows.push(DerivativeRow {
            n,
            phi: verify_hessian_phi(n, calculus::DEFAULT_STEP)?,
            deficit: verify_deficit_gradient(n, calculus::DEFAULT_STEP)?,
            sigma_step_drift: (sigma_coarse.sigma - sigma_fine.sigma).abs() / sigma_fine.sigma,
            sigma_coarse,
            sigma_fine,
        });
    }
    let pass = rows
        .iter()
        .all(|r| r.phi.gradient_max_abs_error <= 1e-6 && r.sigma_step_drift <= tol);
    Ok(match c.format {
        Format::Json => Output::json("derivatives", c.seed, pass, rows),
        Format::Csv => {
            let table = rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        f(r.phi.gradient_max_abs_error),
                        f(r.phi.hessian_max_rel_error),
                        f(r.deficit.gradient_max_abs_error),
                        f(r.sigma_fine.sigma),
                        f(r.sigma_step_drift),
                    ]
                })
                .collect();
            Output::csv(
                "derivatives",
                c.seed,
                pass,
                "n,grad_phi,hessian_phi_rel,grad_deficit,sigma,sigma_step_drift",
                table,
            )
        }
    })
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    seed: u64,
    #[serde(flatten)]
    step: &'a FlipStep,
}

#[derive(Serialize)]
struct ConvexifyReport<'a> {
    n: usize,
    flips: usize,
    convex: bool,
    perimeter_drift: f64,
    area_strictly_increasing: bool,
    deficit_nonincreasing: bool,
    initial: &'a FlipStep,
    result: &'a FlipStep,
}

fn cmd_convexify(c: &Common, input: &Path, max_flips: usize, trace_path: Option<&Path>) -> Result<Output, Failure> {
    let tol = c.tol.unwrap_or(1e-9);
    let p = read_polygon(input)?;
    let (q, trace) = convexify(&p, max_flips)?;
    if let Some(path) = trace_path {
        let lines: String = trace
            .steps
            .iter()
            .map(|step| json::to_line(&TraceRecord { seed: c.seed, step }) + "\n")
            .collect();
        write_file(path, &lines)?;
    }
    let report = ConvexifyReport {
        n: p.n(),
        flips: trace.flips(),
        convex: q.is_convex(),
        perimeter_drift: trace.perimeter_drift(),
        area_strictly_increasing: trace.area_strictly_increasing(),
        deficit_nonincreasing: trace.deficit_nonincreasing(),
        initial: &trace.steps[0],
        result: &trace.steps[trace.steps.len() - 1],
    };
    let pass = report.convex
        && report.perimeter_drift <= tol
        && report.area_strictly_increasing
        && report.deficit_nonincreasing;
    Ok(match c.format {
        Format::Json => Output::json("convexify", c.seed, pass, report),
        Format::Csv => {
            let rows = q.vertices().iter().map(|v| vec![f(v.x), f(v.y)]).collect();
            Output::csv("convexify", c.seed, pass, "# x,y", rows)
        }
    })
}

#[derive(Serialize)]
struct GrowthPoint {
    alpha: f64,
    angle_variance_over_deficit: f64,
}

#[derive(Serialize)]
struct ScalingSummary {
    n: usize,
    source: &'static str,
    max_law_error: f64,
    laws: Vec<ScalingReport>,
    growth: Vec<GrowthPoint>,
    unbounded_as_alpha_to_zero: bool,
}

const SCALING_ALPHAS: [f64; 3] = [0.5, 2.0, 10.0];
const GROWTH_ALPHAS: [f64; 4] = [1.0, 1e-1, 1e-2, 1e-3];

fn cmd_scaling(c: &Common, input: Option<&Path>, n: usize) -> Result<Output, Failure> {
    let tol = c.tol.unwrap_or(1e-12);
    let (p, source) = match input {
        Some(path) => (read_polygon(path)?, "input"),
        None => {
            let m = sample_with(n, &SamplerConfig::convex(), &mut seeded_rng(c.seed), 100_000)?;
            (m.to_vertices()?, "sample")
        }
    };
    let laws = SCALING_ALPHAS
        .iter()
        .map(|&a| scaling_check(&p, a))
        .collect::<Result<Vec<_>, _>>()?;
    let growth = GROWTH_ALPHAS
        .iter()
        .map(|&alpha| {
            scaling_check(&p, alpha).map(|r| GrowthPoint {
                alpha,
                angle_variance_over_deficit: r.ratio_scaled,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let max_law_error = laws
        .iter()
        .map(|r| r.deficit_law_error.max(r.angle_law_error))
        .fold(0.0, f64::max);
    let unbounded = growth.windows(2).all(|w| {
        w[1].angle_variance_over_deficit > 50.0 * w[0].angle_variance_over_deficit
    });
    let summary = ScalingSummary {
        n: p.n(),
        source,
        max_law_error,
        laws,
        growth,
        unbounded_as_alpha_to_zero: unbounded,
    };
    let pass = max_law_error <= tol && unbounded;
    Ok(match c.format {
        Format::Json => Output::json("scaling", c.seed, pass, summary),
        Format::Csv => {
            let rows = summary
                .laws
                .iter()
                .map(|r| vec![f(r.alpha), f(r.deficit_law_error), f(r.angle_law_error), f(r.ratio_scaled)])
                .collect();
            Output::csv(
                "scaling",
                c.seed,
                pass,
                "alpha,deficit_law_error,angle_law_error,angle_variance_over_deficit",
                rows,
            )
        }
    })
}

fn dispatch(cli: &Cli) -> Result<Output, Failure> {
    let c = &cli.common;
    match &cli.command {
        Command::Verify { input, cn, c4 } => cmd_verify(c, input, *cn, *c4),
        Command::Sample { n, budget, convex } => cmd_sample(c, *n, *budget, *convex),
        Command::EstimateCn { n, budget, holdout } => cmd_estimate_cn(c, &n.0, *budget, *holdout),
        Command::Sharpness { n, budget } => cmd_sharpness(c, &n.0, *budget),
        Command::Spectral { n } => cmd_spectral(c, &n.0),
        Command::Derivatives { n } => cmd_derivatives(c, &n.0),
        Command::Convexify {
            input,
            max_flips,
            trace,
        } => cmd_convexify(c, input, *max_flips, trace.as_deref()),
        Command::Scaling { input, n } => cmd_scaling(c, input.as_deref(), *n),
    }
}

fn emit(common: &Common, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match &common.out {
        Some(path) => write_file(path, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::input("Io", e.to_string())),
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_INPUT_ERROR
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let command = cli.command.name();
    let result = dispatch(&cli).and_then(|out| {
        emit(&cli.common, &out.text, stdout)?;
        Ok(out.pass)
    });
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(failure) => {
            let _ = writeln!(stderr, "ngon {command}: {}", failure.message);
            let report = json::to_pretty(&ErrorReport {
                command,
                seed: cli.common.seed,
                pass: false,
                error: &failure.kind,
                message: &failure.message,
            }) + "\n";
            let _ = emit(&cli.common, &report, stdout);
            failure.code
        }
    }
}
