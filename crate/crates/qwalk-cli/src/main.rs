//! Command-line front end for the walk library: simulate either walk and
//! emit its position distribution, tabulate the limit densities, and run
//! verification suites that print machine-readable JSON reports.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 invalid
//! parameters, 3 I/O failure, 4 an iterative solve did not converge.
//! CSV output is deterministic: ascending x, LF line endings, floats in
//! scientific notation with 17 significant digits. The QWALK_THREADS
//! environment variable caps the parallelism of verification suites.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use qwalk::ctqw::default_step;
use qwalk::density::DensityProfile;
use qwalk::fuchsian::{
    residual_scan, scaled_heun, FuchsianEquation, GaussParams, HeunParams, SolutionBundle,
};
use qwalk::inozemtsev::{eigen_defect, eigen_residual, eigenvalue, InozemtsevParams};
use qwalk::{
    closed_form, confluence_error, evolve, integrate, ks_distance, solve_lattice,
    truncation_radius, CoinOperator, DtqwState,
};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const KS_GRID: usize = 2001;
const DENSITY_MARGIN: f64 = 1e-4;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NO_CONVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "qwalk",
    version,
    about = "Quantum walks, their limit densities, and verification suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a walk and emit its position distribution.
    Simulate {
        #[command(subcommand)]
        walk: Walk,
    },
    /// Tabulate a limit density over its open support.
    Density(DensityArgs),
    /// Run a verification suite and print a JSON report.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum Walk {
    /// Discrete-time coined walk from the symmetric initial state.
    Dtqw(DtqwArgs),
    /// Continuous-time walk from a point source.
    Ctqw(CtqwArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct DtqwArgs {
    /// Use the Hadamard coin a = b = c = 1/sqrt(2), d = -1/sqrt(2).
    #[arg(long)]
    hadamard: bool,
    /// Coin entries as eight reals: a_re,a_im,b_re,b_im,c_re,c_im,d_re,d_im.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coin: Option<Vec<f64>>,
    /// Number of steps.
    #[arg(short = 't', long = "t")]
    t: usize,
    /// Also emit the two amplitude components' real and imaginary parts.
    #[arg(long)]
    amplitudes: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CtqwArgs {
    /// Hopping rate.
    #[arg(long)]
    nu: f64,
    /// Evolution time.
    #[arg(short = 't', long = "t")]
    t: f64,
    /// Evaluation backend.
    #[arg(long, value_enum, default_value_t = Backend::Closed)]
    backend: Backend,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    /// Bessel-function closed form.
    Closed,
    /// Explicit fourth-order integrator.
    Integrator,
}

#[derive(Args)]
struct DensityArgs {
    /// Density family.
    #[arg(long, value_enum)]
    kind: Kind,
    /// Coin amplitude magnitude |a| for the discrete-walk kinds.
    #[arg(long)]
    a: Option<f64>,
    /// Hopping rate for the continuous-walk kinds.
    #[arg(long)]
    nu: Option<f64>,
    /// Number of evenly spaced sample points.
    #[arg(long, default_value_t = 2001)]
    points: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Kind {
    /// Discrete-time limit density on (-|a|, |a|).
    KonnoD,
    /// Continuous-time limit density on (-2 nu, 2 nu).
    ArcsineC,
    /// Measure form of the discrete-time limit on (0, |a|^2).
    MeasureD,
    /// Measure form of the continuous-time limit on (0, 1).
    MeasureC,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite to run.
    #[arg(value_enum)]
    suite: Suite,
    /// Coin amplitude magnitude |a| for the heun and inozemtsev suites.
    #[arg(long)]
    a: Option<f64>,
    /// Walk time for the convergence suite.
    #[arg(long = "t")]
    t: Option<usize>,
    /// Restrict the convergence suite to one walk.
    #[arg(long, value_enum)]
    walk: Option<WalkKind>,
    /// Add the decreasing-distance trend check to the convergence suite.
    #[arg(long)]
    trend: bool,
    /// Override the primary tolerance of every check in the suite.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Suite {
    Heun,
    Gauss,
    Confluence,
    Inozemtsev,
    Convergence,
    All,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum WalkKind {
    Dtqw,
    Ctqw,
}

/// Failure modes mapped onto the documented exit codes.
enum Failure {
    ChecksFailed,
    Invalid(String),
    Io(String),
    NoConvergence(String),
}

impl Failure {
    fn exit(&self) -> u8 {
        match self {
            Self::ChecksFailed => EXIT_CHECK_FAILED,
            Self::Invalid(_) => EXIT_INVALID,
            Self::Io(_) => EXIT_IO,
            Self::NoConvergence(_) => EXIT_NO_CONVERGENCE,
        }
    }
}

impl From<qwalk::Error> for Failure {
    fn from(e: qwalk::Error) -> Self {
        match e {
            qwalk::Error::NoConvergence { .. } => Self::NoConvergence(e.to_string()),
            _ => Self::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { walk } => match walk {
            Walk::Dtqw(args) => simulate_dtqw(&args),
            Walk::Ctqw(args) => simulate_ctqw(&args),
        },
        Command::Density(args) => density(&args),
        Command::Verify(args) => verify(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::ChecksFailed => eprintln!("error: one or more checks failed"),
                Failure::Invalid(m) => eprintln!("error: {m}"),
                Failure::Io(m) => eprintln!("error: {m}"),
                Failure::NoConvergence(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.exit())
        }
    }
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn simulate_dtqw(args: &DtqwArgs) -> Result<(), Failure> {
    let coin = match (args.hadamard, &args.coin) {
        (true, None) => CoinOperator::hadamard(),
        (false, Some(v)) => {
            if v.len() != 8 {
                return Err(Failure::Invalid(format!(
                    "--coin needs 8 comma-separated reals, got {}",
                    v.len()
                )));
            }
            CoinOperator::new(
                C64::new(v[0], v[1]),
                C64::new(v[2], v[3]),
                C64::new(v[4], v[5]),
                C64::new(v[6], v[7]),
            )?
        }
        _ => {
            return Err(Failure::Invalid(
                "specify exactly one of --hadamard or --coin".into(),
            ))
        }
    };
    let state = evolve(&coin, &DtqwState::symmetric_initial(), args.t);
    let content = match args.output.format {
        Format::Csv => {
            let mut s = String::new();
            if args.amplitudes {
                s.push_str("x,p,psi0_re,psi0_im,psi1_re,psi1_im\n");
            } else {
                s.push_str("x,p\n");
            }
            for (x, p) in state.distribution() {
                if args.amplitudes {
                    let [l, r] = state.amplitude(x);
                    let _ = writeln!(
                        s,
                        "{x},{p:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                        l.re, l.im, r.re, r.im
                    );
                } else {
                    let _ = writeln!(s, "{x},{p:.16e}");
                }
            }
            s
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = state
                .distribution()
                .into_iter()
                .map(|(x, p)| {
                    if args.amplitudes {
                        let [l, r] = state.amplitude(x);
                        json!({"x": x, "p": p, "psi": [[l.re, l.im], [r.re, r.im]]})
                    } else {
                        json!({"x": x, "p": p})
                    }
                })
                .collect();
            let doc = json!({"schema": 1, "walk": "dtqw", "t": args.t, "rows": rows});
            format!(
                "{}\n",
                serde_json::to_string_pretty(&doc).expect("serializable")
            )
        }
    };
    write_output(&args.output.out, &content)
}

fn simulate_ctqw(args: &CtqwArgs) -> Result<(), Failure> {
    let state = match args.backend {
        Backend::Closed => closed_form(args.nu, args.t, truncation_radius(args.nu, args.t))?,
        Backend::Integrator => integrate(args.nu, args.t, default_step(args.nu))?,
    };
    let rows: Vec<(i64, f64)> = state
        .distribution()
        .into_iter()
        .filter(|&(_, p)| p > 0.0)
        .collect();
    let content = match args.output.format {
        Format::Csv => {
            let mut s = String::from("x,p\n");
            for (x, p) in &rows {
                let _ = writeln!(s, "{x},{p:.16e}");
            }
            s
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> =
                rows.iter().map(|&(x, p)| json!({"x": x, "p": p})).collect();
            let doc =
                json!({"schema": 1, "walk": "ctqw", "t": args.t, "nu": args.nu, "rows": rows});
            format!(
                "{}\n",
                serde_json::to_string_pretty(&doc).expect("serializable")
            )
        }
    };
    write_output(&args.output.out, &content)
}

fn density(args: &DensityArgs) -> Result<(), Failure> {
    let need = |opt: Option<f64>, flag: &str, kind: &str| {
        opt.ok_or_else(|| Failure::Invalid(format!("{flag} is required for {kind}")))
    };
    let (profile, kind_name) = match args.kind {
        Kind::KonnoD => (
            DensityProfile::konno_d(need(args.a, "--a", "konno_d")?)?,
            "konno_d",
        ),
        Kind::ArcsineC => (
            DensityProfile::arcsine_c(need(args.nu, "--nu", "arcsine_c")?)?,
            "arcsine_c",
        ),
        Kind::MeasureD => (
            DensityProfile::measure_d(need(args.a, "--a", "measure_d")?)?,
            "measure_d",
        ),
        Kind::MeasureC => (
            DensityProfile::measure_c(need(args.nu, "--nu", "measure_c")?)?,
            "measure_c",
        ),
    };
    if args.points < 2 {
        return Err(Failure::Invalid(format!(
            "--points must be at least 2, got {}",
            args.points
        )));
    }
    let (lo, hi) = profile.support();
    let (lo, hi) = (lo + DENSITY_MARGIN, hi - DENSITY_MARGIN);
    if lo >= hi {
        return Err(Failure::Invalid(
            "support is narrower than twice the endpoint margin".into(),
        ));
    }
    let n = args.points;
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        rows.push((x, profile.density(x)?));
    }
    let content = match args.output.format {
        Format::Csv => {
            let mut s = String::from("x,f\n");
            for (x, f) in &rows {
                let _ = writeln!(s, "{x:.16e},{f:.16e}");
            }
            s
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> =
                rows.iter().map(|&(x, f)| json!({"x": x, "f": f})).collect();
            let doc = json!({"schema": 1, "kind": kind_name, "rows": rows});
            format!(
                "{}\n",
                serde_json::to_string_pretty(&doc).expect("serializable")
            )
        }
    };
    write_output(&args.output.out, &content)
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    /// Passes when the value is at most the tolerance.
    fn le(name: String, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    /// Passes when the value is at least the tolerance (detection floors).
    fn ge(name: String, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            tolerance,
            pass: value >= tolerance,
        }
    }
}

#[derive(Serialize)]
struct Report {
    schema: u32,
    suite: String,
    checks: Vec<Check>,
}

type CheckFn = Box<dyn Fn() -> qwalk::Result<Check> + Send + Sync>;

fn scan(eq: FuchsianEquation, bundle: SolutionBundle, hi: f64) -> qwalk::Result<f64> {
    residual_scan(&eq, &bundle, 1e-3, hi - 1e-3, 100)
}

fn heun_checks(a: f64, tol: f64) -> Vec<CheckFn> {
    let theta = a * a;
    vec![
        Box::new(move || {
            let eq = FuchsianEquation::Heun(HeunParams::konno_density(a)?);
            let res = scan(eq, SolutionBundle::KonnoDensity { theta }, theta)?;
            Ok(Check::le(
                format!("heun_density_residual_theta_{theta:.4}"),
                res,
                tol,
            ))
        }),
        Box::new(move || {
            let eq = FuchsianEquation::Heun(HeunParams::konno_measure(a)?);
            let res = scan(eq, SolutionBundle::KonnoMeasure { theta }, theta)?;
            Ok(Check::le(
                format!("heun_measure_residual_theta_{theta:.4}"),
                res,
                tol,
            ))
        }),
    ]
}

fn gauss_checks(tol: f64) -> Vec<CheckFn> {
    vec![
        Box::new(move || {
            let eq = FuchsianEquation::Gauss(GaussParams::arcsine_density());
            let bundle = SolutionBundle::ArcsineDensity {
                nu: 0.5 * FRAC_1_SQRT_2,
            };
            let res = scan(eq, bundle, 1.0)?;
            Ok(Check::le("gauss_density_residual".into(), res, tol))
        }),
        Box::new(move || {
            let eq = FuchsianEquation::Gauss(GaussParams::arcsine_measure());
            let res = scan(eq, SolutionBundle::ArcsineMeasure { nu: 0.4 }, 1.0)?;
            Ok(Check::le("gauss_measure_residual".into(), res, tol))
        }),
    ]
}

fn confluence_checks() -> Vec<CheckFn> {
    let mut checks: Vec<CheckFn> = Vec::new();
    for k in 2..=4u32 {
        let tau = 10f64.powi(k as i32);
        checks.push(Box::new(move || {
            let coarse = confluence_error(tau, 0.05, 0.95, 181)?;
            let fine = confluence_error(10.0 * tau, 0.05, 0.95, 181)?;
            let ratio = coarse / fine;
            let pass = (5.0..=20.0).contains(&ratio);
            Ok(Check {
                name: format!("confluence_decade_ratio_tau_1e{k}_to_1e{}", k + 1),
                value: ratio,
                tolerance: 20.0,
                pass,
            })
        }));
    }
    checks.push(Box::new(|| {
        // The infinite-scale coefficients must equal the three-singularity
        // instance's polynomials exactly, so the allowed deviation is zero.
        let (c1n, c0n) = scaled_heun(f64::INFINITY)?
            .normalized_polys()
            .expect("infinite scale has polynomial form");
        let g = GaussParams::arcsine_density();
        let want1 = [-g.gamma.re, (g.alpha + g.beta).re + 1.0, 0.0];
        let want0 = [(g.alpha * g.beta).re, 0.0];
        let worst = c1n
            .iter()
            .zip(want1.iter())
            .chain(c0n.iter().zip(want0.iter()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        Ok(Check::le(
            "confluence_limit_coefficients_exact".into(),
            worst,
            0.0,
        ))
    }));
    checks
}

fn inozemtsev_checks(a: Option<f64>, tol: f64) -> Vec<CheckFn> {
    let thetas: Vec<f64> = match a {
        Some(a) => vec![a * a],
        None => vec![0.25, 0.5, 0.75],
    };
    let mut checks: Vec<CheckFn> = Vec::new();
    for theta in thetas {
        checks.push(Box::new(move || {
            let res = eigen_residual(theta, 50)?;
            Ok(Check::le(
                format!("eigen_residual_theta_{theta:.4}"),
                res,
                tol,
            ))
        }));
        checks.push(Box::new(move || {
            let lat = solve_lattice(theta)?;
            let e = eigenvalue(&lat) * 1.001;
            let res = eigen_defect(&lat, &InozemtsevParams::preset_a(), theta, e, 50, None)?;
            Ok(Check::ge(
                format!("perturbed_energy_detected_theta_{theta:.4}"),
                res,
                1e-4,
            ))
        }));
    }
    checks
}

fn dtqw_ks(t: usize) -> f64 {
    let coin = CoinOperator::hadamard();
    let state = evolve(&coin, &DtqwState::symmetric_initial(), t);
    let profile = DensityProfile::konno_d(coin.a_abs()).expect("valid coin");
    ks_distance(&state.rescaled_cdf(), &profile, KS_GRID)
}

fn ctqw_ks(t: f64) -> qwalk::Result<f64> {
    let nu = 0.5 * FRAC_1_SQRT_2;
    let state = closed_form(nu, t, truncation_radius(nu, t))?;
    let profile = DensityProfile::arcsine_c(nu)?;
    Ok(ks_distance(&state.rescaled_cdf(), &profile, KS_GRID))
}

fn convergence_checks(walk: Option<WalkKind>, t: usize, trend: bool, tol: f64) -> Vec<CheckFn> {
    let wants = |k: WalkKind| walk.is_none() || walk == Some(k);
    let mut checks: Vec<CheckFn> = Vec::new();
    const TREND_TIMES: [usize; 4] = [125, 250, 500, 1000];
    if wants(WalkKind::Dtqw) {
        checks.push(Box::new(move || {
            Ok(Check::le(format!("ks_dtqw_t_{t}"), dtqw_ks(t), tol))
        }));
        if trend {
            checks.push(Box::new(move || {
                let ks: Vec<f64> = TREND_TIMES.iter().map(|&t| dtqw_ks(t)).collect();
                let wiggle = ks.windows(2).map(|w| w[1] / w[0]).fold(0.0f64, f64::max);
                Ok(Check::le("ks_trend_dtqw_max_wiggle".into(), wiggle, 1.3))
            }));
        }
    }
    if wants(WalkKind::Ctqw) {
        checks.push(Box::new(move || {
            Ok(Check::le(format!("ks_ctqw_t_{t}"), ctqw_ks(t as f64)?, tol))
        }));
        if trend {
            checks.push(Box::new(move || {
                let mut ks = Vec::new();
                for &t in &TREND_TIMES {
                    ks.push(ctqw_ks(t as f64)?);
                }
                let wiggle = ks.windows(2).map(|w| w[1] / w[0]).fold(0.0f64, f64::max);
                Ok(Check::le("ks_trend_ctqw_max_wiggle".into(), wiggle, 1.3))
            }));
        }
        checks.push(Box::new(|| {
            // Cross-backend agreement at the documented instance t = 50.
            let nu = 0.5 * FRAC_1_SQRT_2;
            let num = integrate(nu, 50.0, default_step(nu))?;
            let exact = closed_form(nu, 50.0, num.radius())?;
            let worst = num
                .window()
                .map(|x| (num.amplitude(x).norm() - exact.amplitude(x).norm()).abs())
                .fold(0.0f64, f64::max);
            Ok(Check::le("ctqw_backend_agreement_t_50".into(), worst, 1e-8))
        }));
    }
    checks
}

fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("QWALK_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                builder = builder.num_threads(n);
            }
        }
    }
    builder.build().expect("thread pool")
}

fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    if let Some(a) = args.a {
        if !(a > 0.0 && a < 1.0) {
            return Err(Failure::Invalid(format!(
                "--a must lie strictly inside (0, 1), got {a}"
            )));
        }
    }
    let a = args.a.unwrap_or(FRAC_1_SQRT_2);
    let t = args.t.unwrap_or(500);
    let residual_tol = args.tolerance.unwrap_or(1e-9);
    let eigen_tol = args.tolerance.unwrap_or(1e-6);
    let ks_tol = args.tolerance.unwrap_or(0.05);
    let (suite_name, checks): (&str, Vec<CheckFn>) = match args.suite {
        Suite::Heun => ("heun", heun_checks(a, residual_tol)),
        Suite::Gauss => ("gauss", gauss_checks(residual_tol)),
        Suite::Confluence => ("confluence", confluence_checks()),
        Suite::Inozemtsev => ("inozemtsev", inozemtsev_checks(args.a, eigen_tol)),
        Suite::Convergence => (
            "convergence",
            convergence_checks(args.walk, t, args.trend, ks_tol),
        ),
        Suite::All => {
            let mut all = heun_checks(a, residual_tol);
            all.extend(gauss_checks(residual_tol));
            all.extend(confluence_checks());
            all.extend(inozemtsev_checks(None, eigen_tol));
            all.extend(convergence_checks(None, t, true, ks_tol));
            ("all", all)
        }
    };
    let results: Vec<qwalk::Result<Check>> =
        thread_pool().install(|| checks.par_iter().map(|f| f()).collect());
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        out.push(r.map_err(Failure::from)?);
    }
    let report = Report {
        schema: 1,
        suite: suite_name.to_string(),
        checks: out,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("serializable")
    );
    if report.checks.iter().all(|c| c.pass) {
        Ok(())
    } else {
        Err(Failure::ChecksFailed)
    }
}
