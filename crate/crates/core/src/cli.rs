//! The `hfunm` command-line front end.
//!
//! Every command prints a line-oriented `key=value` report, a `---` separator
//! and the same report as JSON. Exit codes: 0 success, 2 annihilation check
//! failed, 3 quadrature failed, 64 usage error, 65 unreadable or invalid input
//! data, 1 anything else.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::annihilator::{characteristic_polynomial, spec_from_matrix, verify_annihilates, AnnihilatorSpec, DEFAULT_CLUSTER_TOL};
use crate::error::Error;
use crate::hermite::{hermite_interpolant_with, parse_complex_list, taylor_coeffs_closed_form, taylor_coeffs_series, Builtin, CoeffMethod};
use crate::io::{read_matrix, read_spec, write_matrix, FileError};
use crate::matfun::{
    check_annihilates, jordan_parts, residual_tolerance, spectral_decomposition_with, CenteredBasis, EvalOptions,
    DEFAULT_RESIDUAL_RTOL,
};
use crate::matrix::Matrix;
use crate::odekernel::{solve_ivp, Forcing, IVProblem, DEFAULT_QUAD_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_ANNIHILATION: i32 = 2;
pub const EXIT_QUADRATURE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;

#[derive(Parser, Debug)]
#[command(name = "hfunm", version, about = "Matrix functions via Hermite interpolation on an annihilating polynomial")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate f(A)
    Funm {
        #[command(flatten)]
        input: MatrixInput,
        /// exp, exp:t=<real>, sin, cos, sinh, cosh, poly:<c0,c1,...>
        #[arg(short, long)]
        function: String,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Evaluate e^{tA}
    Expm {
        #[command(flatten)]
        input: MatrixInput,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t: f64,
        #[command(flatten)]
        eval: EvalArgs,
    },
    /// Spectral projectors E_p, nilpotents N_p and the Jordan split S + N
    Spectral {
        #[command(flatten)]
        input: MatrixInput,
        /// Directory receiving E_<p>.json, N_<p>.json, S.json and N.json
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESIDUAL_RTOL)]
        residual_rtol: f64,
    },
    /// Solve Q(d/dt) u = h with given u(0), ..., u^(d-1)(0)
    Ode {
        #[arg(long)]
        spec: PathBuf,
        /// Comma-separated initial values, e.g. 1,0 or 1+2i,0
        #[arg(long, allow_hyphen_values = true)]
        init: String,
        /// zero, const:<re,im>, cos, sin, exp:<re,im>, poly:<c0,c1,...>
        #[arg(long, default_value = "zero")]
        forcing: String,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, default_value_t = DEFAULT_QUAD_TOL)]
        quad_tol: f64,
        /// Also tabulate N+1 equally spaced samples on [0, T]
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Taylor coefficients b_{p,0..N} of 1/Q_p at a_p
    Coeffs {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Closed)]
        method: MethodArg,
    },
    /// Characteristic polynomial of A (Faddeev–LeVerrier)
    Charpoly {
        #[arg(long)]
        matrix: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct MatrixInput {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long, required_unless_present = "auto_spec", conflicts_with = "auto_spec")]
    pub spec: Option<PathBuf>,
    /// Derive the spec from the characteristic polynomial of A
    #[arg(long)]
    pub auto_spec: bool,
    #[arg(long, default_value_t = DEFAULT_CLUSTER_TOL)]
    pub cluster_tol: f64,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_RESIDUAL_RTOL)]
    pub residual_rtol: f64,
    /// Skip the Q(A) = 0 check
    #[arg(long)]
    pub no_check: bool,
    /// Route for the Taylor coefficients of 1/Q_p
    #[arg(long, value_enum, default_value_t = MethodArg::Closed)]
    pub method: MethodArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Closed,
    Series,
    Both,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    pub annihilation_residual: Option<f64>,
    pub residual_tolerance: Option<f64>,
    pub worst_invariant_deviation: Option<f64>,
    pub timing_ms: f64,
    pub warnings: Vec<String>,
}

/// What a command did, printed on stdout.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub status: String,
    pub inputs: Map<String, Value>,
    pub outputs: Map<String, Value>,
    pub diagnostics: Diagnostics,
}

impl RunReport {
    fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            status: "ok".to_string(),
            inputs: Map::new(),
            outputs: Map::new(),
            diagnostics: Diagnostics::default(),
        }
    }

    fn input(&mut self, key: &str, value: impl Serialize) {
        self.inputs.insert(key.into(), json!(value));
    }

    fn output(&mut self, key: &str, value: impl Serialize) {
        self.outputs.insert(key.into(), json!(value));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        line("command", self.command.clone());
        line("status", self.status.clone());
        for (k, v) in &self.inputs {
            line(&format!("input.{k}"), flat(v));
        }
        for (k, v) in &self.outputs {
            line(&format!("output.{k}"), flat(v));
        }
        let d = &self.diagnostics;
        let opt = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), num);
        line("annihilation_residual", opt(d.annihilation_residual));
        line("residual_tolerance", opt(d.residual_tolerance));
        line("worst_invariant_deviation", opt(d.worst_invariant_deviation));
        line("timing_ms", format!("{:.3}", d.timing_ms));
        for w in &d.warnings {
            line("warning", w.clone());
        }
        out.push_str("---\n");
        out.push_str(&serde_json::to_string_pretty(self).expect("reports serialize"));
        out.push('\n');
        out
    }
}

/// Full double precision, 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn complex(z: Complex64) -> String {
    format!("{},{}", num(z.re), num(z.im))
}

fn flat(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_i64() && !n.is_u64() => num(x),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
    pub report: Option<Box<RunReport>>,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
            report: None,
        }
    }

    fn with_report(mut self, report: &RunReport) -> Self {
        let mut r = report.clone();
        r.status = "error".into();
        r.output("error", &self.message);
        self.report = Some(Box::new(r));
        self
    }
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        CliError {
            code: EXIT_DATA,
            message: e.to_string(),
            report: None,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::AnnihilationResidual { .. } => EXIT_ANNIHILATION,
            Error::Quadrature { .. } => EXIT_QUADRATURE,
            Error::Selector(_) | Error::IndexOutOfRange { .. } | Error::InvalidArgument(_) => EXIT_USAGE,
            Error::DimensionMismatch { .. } | Error::InvalidSpec(_) | Error::RootsNotDistinct { .. } | Error::NonFinite(_) => {
                EXIT_DATA
            }
            _ => EXIT_FAILURE,
        };
        CliError {
            code,
            message: e.to_string(),
            report: None,
        }
    }
}

/// Parses `args` (including the program name), runs the command and writes the
/// report to `stdout`. Diagnostics go to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    let started = Instant::now();
    match execute(cli.command, started) {
        Ok(report) => {
            let _ = write!(stdout, "{}", report.render());
            EXIT_OK
        }
        Err(err) => {
            if let Some(mut report) = err.report {
                report.diagnostics.timing_ms = elapsed_ms(started);
                let _ = write!(stdout, "{}", report.render());
            }
            let _ = writeln!(stderr, "error: {}", err.message);
            err.code
        }
    }
}

fn elapsed_ms(started: Instant) -> f64 {
    started.elapsed().as_secs_f64() * 1e3
}

fn execute(command: Command, started: Instant) -> Result<RunReport, CliError> {
    let mut report = match command {
        Command::Funm { input, function, eval } => {
            let f: Builtin = function.parse().map_err(CliError::from)?;
            cmd_funm("funm", &input, f, &eval)?
        }
        Command::Expm { input, t, eval } => {
            if !t.is_finite() {
                return Err(CliError::usage(format!("--t must be finite, got {t}")));
            }
            cmd_funm("expm", &input, Builtin::ExpScaled(t), &eval)?
        }
        Command::Spectral {
            input,
            out_dir,
            residual_rtol,
        } => cmd_spectral(&input, &out_dir, residual_rtol)?,
        Command::Ode {
            spec,
            init,
            forcing,
            t,
            quad_tol,
            grid,
        } => cmd_ode(&spec, &init, &forcing, t, quad_tol, grid)?,
        Command::Coeffs { spec, p, n_max, method } => cmd_coeffs(&spec, p, n_max, method)?,
        Command::Charpoly { matrix } => cmd_charpoly(&matrix)?,
    };
    report.diagnostics.timing_ms = elapsed_ms(started);
    Ok(report)
}

fn load_spec(input: &MatrixInput, a: &Matrix, report: &mut RunReport) -> Result<AnnihilatorSpec, CliError> {
    let spec = match (&input.spec, input.auto_spec) {
        (_, true) => {
            if !(input.cluster_tol >= 0.0) {
                return Err(CliError::usage("--cluster-tol must be nonnegative"));
            }
            report.input("spec_source", "auto");
            report.input("cluster_tol", input.cluster_tol);
            spec_from_matrix(a, input.cluster_tol)?
        }
        (Some(path), false) => {
            report.input("spec_source", path.display().to_string());
            read_spec(path)?
        }
        (None, false) => return Err(CliError::usage("either --spec or --auto-spec is required")),
    };
    report.input("spec", &spec);
    if spec.is_near_confluent() {
        report.diagnostics.warnings.push(format!(
            "near-confluent roots (separation {:e}); results may be inaccurate",
            spec.min_separation()
        ));
    }
    Ok(spec)
}

fn check(a: &Matrix, spec: &AnnihilatorSpec, rtol: Option<f64>, report: &mut RunReport) -> Result<(), CliError> {
    // Always measure and report, even when the check is disabled.
    let residual = verify_annihilates(a, spec);
    report.diagnostics.annihilation_residual = Some(residual);
    if let Some(rtol) = rtol {
        report.diagnostics.residual_tolerance = Some(residual_tolerance(a, spec, rtol));
    }
    check_annihilates(a, spec, &EvalOptions { residual_rtol: rtol })
        .map(|_| ())
        .map_err(|e| CliError::from(e).with_report(report))
}

fn matrix_value(m: &Matrix) -> Value {
    json!(m.rows().collect::<Vec<_>>())
}

fn cmd_funm(name: &str, input: &MatrixInput, f: Builtin, eval: &EvalArgs) -> Result<RunReport, CliError> {
    let mut report = RunReport::new(name);
    report.input("matrix", input.matrix.display().to_string());
    report.input("function", f.to_string());
    let a = read_matrix(&input.matrix)?;
    let spec = load_spec(input, &a, &mut report)?;
    if !(eval.residual_rtol > 0.0) {
        return Err(CliError::usage("--residual-rtol must be positive"));
    }
    let rtol = (!eval.no_check).then_some(eval.residual_rtol);
    check(&a, &spec, rtol, &mut report)?;

    let basis = CenteredBasis::new(&a, &spec);
    let closed = basis.evaluate(&hermite_interpolant_with(&f, &spec, CoeffMethod::ClosedForm)?);
    let result = match eval.method {
        MethodArg::Closed => closed,
        MethodArg::Series | MethodArg::Both => {
            let series = basis.evaluate(&hermite_interpolant_with(&f, &spec, CoeffMethod::Series)?);
            if eval.method == MethodArg::Both {
                report.output("method_deviation", closed.max_abs_diff(&series));
            }
            series
        }
    };
    report.input("method", format!("{:?}", eval.method).to_lowercase());
    report.output("n", a.dim());
    report.output("result", matrix_value(&result));
    if let Some(out) = &eval.out {
        let meta = json!({
            "command": name,
            "function": f.to_string(),
            "spec": spec,
            "annihilation_residual": report.diagnostics.annihilation_residual,
        });
        write_matrix(out, &result, Some(meta))?;
        report.output("written", out.display().to_string());
    }
    Ok(report)
}

fn cmd_spectral(input: &MatrixInput, out_dir: &Path, residual_rtol: f64) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("spectral");
    report.input("matrix", input.matrix.display().to_string());
    let a = read_matrix(&input.matrix)?;
    let spec = load_spec(input, &a, &mut report)?;
    if !(residual_rtol > 0.0) {
        return Err(CliError::usage("--residual-rtol must be positive"));
    }
    check(&a, &spec, Some(residual_rtol), &mut report)?;
    let dec = spectral_decomposition_with(&a, &spec, &EvalOptions::unchecked())?;
    let diag = dec.diagnostics().clone();
    report.diagnostics.worst_invariant_deviation = Some(diag.worst_deviation());
    for v in &diag.violations {
        report.diagnostics.warnings.push(format!(
            "invariant '{}' deviates by {:e} (tolerance {:e})",
            v.invariant, v.deviation, v.tolerance
        ));
    }

    fs::create_dir_all(out_dir).map_err(|source| FileError::Io {
        path: out_dir.to_owned(),
        source,
    })?;
    let meta = json!({
        "spec": spec,
        "annihilation_residual": diag.annihilation_residual,
        "deviations": diag,
    });
    let mut files = Vec::new();
    let mut emit = |name: String, m: &Matrix| -> Result<(), CliError> {
        let path = out_dir.join(&name);
        write_matrix(&path, m, Some(meta.clone()))?;
        files.push(path.display().to_string());
        Ok(())
    };
    for (p, (e, n)) in dec.projectors().iter().zip(dec.nilpotent_parts()).enumerate() {
        emit(format!("E_{p}.json"), e)?;
        emit(format!("N_{p}.json"), n)?;
    }
    let (s, n) = jordan_parts(&dec);
    emit("S.json".into(), s)?;
    emit("N.json".into(), n)?;

    report.output("k", spec.k());
    report.output("files", files);
    report.output("partition_of_unity", diag.partition_of_unity);
    report.output("idempotence", diag.idempotence);
    report.output("nilpotency", diag.nilpotency);
    report.output("reconstruction", diag.reconstruction);
    report.output("commutation", diag.commutation);
    report.output("extraneous_roots", &diag.extraneous_roots);
    Ok(report)
}

fn cmd_ode(
    spec_path: &Path,
    init: &str,
    forcing: &str,
    t: f64,
    quad_tol: f64,
    grid: Option<usize>,
) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("ode");
    let spec = read_spec(spec_path)?;
    let init = parse_complex_list(init).ok_or_else(|| CliError::usage(format!("cannot parse --init {init:?}")))?;
    let forcing: Forcing = forcing.parse()?;
    if !t.is_finite() || !(quad_tol > 0.0) {
        return Err(CliError::usage("--t must be finite and --quad-tol positive"));
    }
    report.input("spec", &spec);
    report.input("init", init.iter().map(|&z| complex(z)).collect::<Vec<_>>());
    report.input("forcing", forcing.to_string());
    report.input("t", t);
    report.input("quad_tol", quad_tol);
    let prob = IVProblem::new(spec, init, forcing).map_err(|e| match e {
        Error::DimensionMismatch { expected, got } => {
            CliError::usage(format!("--init needs {expected} values (the degree of Q), got {got}"))
        }
        other => other.into(),
    })?;

    let solve = |t: f64, report: &RunReport| -> Result<Complex64, CliError> {
        solve_ivp(&prob, t, quad_tol).map_err(|e| {
            let mut partial = report.clone();
            if let Error::Quadrature { estimate, achieved, .. } = &e {
                partial.output("estimate", [estimate.re, estimate.im]);
                partial.output("achieved_tolerance", achieved);
            }
            CliError::from(e).with_report(&partial)
        })
    };
    let u = solve(t, &report)?;
    report.output("u", [u.re, u.im]);
    if let Some(n) = grid {
        if n == 0 {
            return Err(CliError::usage("--grid needs at least one interval"));
        }
        let rows = (0..=n)
            .map(|i| {
                let ti = t * i as f64 / n as f64;
                solve(ti, &report).map(|ui| [ti, ui.re, ui.im])
            })
            .collect::<Result<Vec<_>, _>>()?;
        report.output("grid", rows);
    }
    Ok(report)
}

fn cmd_coeffs(spec_path: &Path, p: usize, n_max: usize, method: MethodArg) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("coeffs");
    let spec = read_spec(spec_path)?;
    report.input("spec", &spec);
    report.input("p", p);
    report.input("n_max", n_max);
    report.input("method", format!("{method:?}").to_lowercase());
    spec.root(p)?;
    let as_pairs = |v: &[Complex64]| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
    let closed = matches!(method, MethodArg::Closed | MethodArg::Both)
        .then(|| taylor_coeffs_closed_form(&spec, p, n_max))
        .transpose()?;
    let series = matches!(method, MethodArg::Series | MethodArg::Both)
        .then(|| taylor_coeffs_series(&spec, p, n_max))
        .transpose()?;
    if let Some(c) = &closed {
        report.output("closed", as_pairs(c));
    }
    if let Some(s) = &series {
        report.output("series", as_pairs(s));
    }
    if let (Some(c), Some(s)) = (&closed, &series) {
        let dev = c.iter().zip(s).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        report.output("max_deviation", dev);
    }
    Ok(report)
}

fn cmd_charpoly(path: &Path) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("charpoly");
    report.input("matrix", path.display().to_string());
    let a = read_matrix(path)?;
    let q = characteristic_polynomial(&a);
    report.output("degree", a.dim());
    report.output("coeffs", q.coeffs().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>());
    Ok(report)
}
