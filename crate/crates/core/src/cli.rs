//! Command-line driver: TOML job files in, TOML result documents out.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use thiserror::Error as ThisError;
use toml::{Table, Value};

use crate::coefficients::{build_table, Method};
use crate::derivatives::{derivative_with, SpectralDerivative};
use crate::error::Error;
use crate::inverse::{
    grad_spectral, inverse_grad, log_inverse_integral, sylvester_commutator, sylvester_power,
    power_residual, DEFAULT_QUAD_POINTS,
};
use crate::multilinear::{compose4, FourthTensor};
use crate::oracle::finite_diff_derivative;
use crate::scalar::{ScalarFn, StrainMeasureFn};
use crate::spectral::{decompose, Spectrum, DEFAULT_CLUSTER_TOL};
use crate::tensor::{Mat3, SymTensor};

/// Symmetry tolerance for input matrices, relative to their largest entry.
pub const SYMMETRY_TOL: f64 = 1e-12;
pub const MAX_ORDER: usize = 6;
pub const MAX_DENSE_ORDER: usize = 4;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Compute(#[from] Error),
}

impl CliError {
    /// 2 parse/validation, 3 domain, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io { .. } => 2,
            CliError::Compute(e) => match e {
                Error::InvalidArgument(_)
                | Error::Arity { .. }
                | Error::DerivativeOrder { .. }
                | Error::UnsupportedPattern(_) => 2,
                Error::Domain { .. }
                | Error::NotPositiveDefinite(_)
                | Error::NonMonotone(_)
                | Error::SingleEigenvalue => 3,
                Error::NonFinite(_)
                | Error::EigenNoConvergence { .. }
                | Error::CoincidentNodes(..)
                | Error::IllConditioned(_) => 4,
            },
        }
    }
}

fn parse_err(msg: impl Into<String>) -> CliError {
    CliError::Parse(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Eval,
    Grad,
    Taylor,
    Solve,
    Check,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Grad => "grad",
            Command::Taylor => "taylor",
            Command::Solve => "solve",
            Command::Check => "check",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Command::from_str(s, false).ok()
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tensor-derivs",
    version,
    about = "Derivatives of spectral functions of symmetric 3x3 tensors"
)]
pub struct Args {
    /// eval | grad | taylor | solve | check (may instead be given in the job file)
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Job file (TOML)
    #[arg(long)]
    pub input: PathBuf,
    /// Scalar function, e.g. exp, log, monomial:3, seth_hill:-2, poly:1,0,-2
    #[arg(long = "fn")]
    pub func: Option<String>,
    /// Derivative order (1 to 6)
    #[arg(long)]
    pub order: Option<usize>,
    /// Include dense component arrays (order ≤ 4)
    #[arg(long)]
    pub dense: bool,
    /// Tolerance used by every property in `check`
    #[arg(long)]
    pub tol: Option<f64>,
    /// Gauss–Legendre points for the log inverse
    #[arg(long)]
    pub quad_points: Option<usize>,
    /// Coefficient route: dd, residue or interp
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveKind {
    Power,
    Commutator,
    LogInverse,
}

#[derive(Clone, Debug)]
pub struct SolveSpec {
    pub kind: SolveKind,
    pub m: u32,
    pub c: Option<Mat3>,
    pub y: Option<Mat3>,
}

/// A validated job.
#[derive(Clone, Debug)]
pub struct JobSpec {
    pub command: Command,
    pub func: Option<ScalarFn>,
    pub a: SymTensor,
    pub order: usize,
    pub x: Option<SymTensor>,
    pub directions: Vec<SymTensor>,
    pub method: Method,
    pub dense: bool,
    pub tol: Option<f64>,
    pub cluster_tol: f64,
    pub quad_points: usize,
    pub solve: Option<SolveSpec>,
}

fn get_f64(v: &Value, what: &str) -> Result<f64, CliError> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(parse_err(format!("{what}: expected a number"))),
    }
}

fn get_matrix(v: &Value, what: &str) -> Result<Mat3, CliError> {
    let rows = v
        .as_array()
        .filter(|r| r.len() == 3)
        .ok_or_else(|| parse_err(format!("{what}: expected a 3x3 array of numbers")))?;
    let mut m = Mat3::ZERO;
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .filter(|r| r.len() == 3)
            .ok_or_else(|| parse_err(format!("{what}: row {} must have 3 entries", i + 1)))?;
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = get_f64(e, what)?;
        }
    }
    if !m.is_finite() {
        return Err(parse_err(format!("{what}: non-finite entry")));
    }
    Ok(m)
}

fn get_sym(v: &Value, what: &str) -> Result<SymTensor, CliError> {
    let m = get_matrix(v, what)?;
    SymTensor::from_rows(m.0, SYMMETRY_TOL)
        .map_err(|e| parse_err(format!("{what}: {e}")))
}

fn get_usize(v: &Value, what: &str) -> Result<usize, CliError> {
    v.as_integer()
        .filter(|i| *i >= 0)
        .map(|i| i as usize)
        .ok_or_else(|| parse_err(format!("{what}: expected a non-negative integer")))
}

fn get_str<'a>(v: &'a Value, what: &str) -> Result<&'a str, CliError> {
    v.as_str()
        .ok_or_else(|| parse_err(format!("{what}: expected a string")))
}

const JOB_KEYS: &[&str] = &[
    "command",
    "fn",
    "a",
    "order",
    "x",
    "directions",
    "method",
    "dense",
    "tol",
    "cluster_tol",
    "quad_points",
    "solve",
];

impl JobSpec {
    /// Parses a job document; command-line options override file values.
    pub fn from_toml(text: &str, args: &Args) -> Result<Self, CliError> {
        let table: Table = toml::from_str(text).map_err(|e| parse_err(format!("job file: {e}")))?;
        for key in table.keys() {
            if !JOB_KEYS.contains(&key.as_str()) {
                return Err(parse_err(format!("job file: unknown key '{key}'")));
            }
        }
        let file_cmd = match table.get("command") {
            Some(v) => Some(
                Command::from_name(get_str(v, "command")?)
                    .ok_or_else(|| parse_err("command: expected eval, grad, taylor, solve or check"))?,
            ),
            None => None,
        };
        let command = match (args.command, file_cmd) {
            (Some(a), Some(f)) if a != f => {
                return Err(parse_err(format!(
                    "command '{}' conflicts with job file command '{}'",
                    a.name(),
                    f.name()
                )))
            }
            (Some(c), _) | (None, Some(c)) => c,
            (None, None) => return Err(parse_err("no command given")),
        };
        let func_text = match &args.func {
            Some(s) => Some(s.clone()),
            None => table.get("fn").map(|v| get_str(v, "fn").map(str::to_owned)).transpose()?,
        };
        let func = func_text
            .map(|s| s.parse::<ScalarFn>().map_err(|e| parse_err(format!("fn: {e}"))))
            .transpose()?;
        let a = get_sym(
            table.get("a").ok_or_else(|| parse_err("job file: missing matrix 'a'"))?,
            "a",
        )?;
        let order = match args.order {
            Some(n) => n,
            None => table.get("order").map(|v| get_usize(v, "order")).transpose()?.unwrap_or(1),
        };
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(parse_err(format!("order must be between 1 and {MAX_ORDER}, got {order}")));
        }
        let x = table.get("x").map(|v| get_sym(v, "x")).transpose()?;
        let directions = match table.get("directions") {
            Some(v) => v
                .as_array()
                .ok_or_else(|| parse_err("directions: expected an array of 3x3 matrices"))?
                .iter()
                .enumerate()
                .map(|(i, d)| get_sym(d, &format!("directions[{i}]")))
                .collect::<Result<Vec<_>, _>>()?,
            None => Vec::new(),
        };
        let method_text = match &args.method {
            Some(m) => Some(m.clone()),
            None => table.get("method").map(|v| get_str(v, "method").map(str::to_owned)).transpose()?,
        };
        let method = method_text
            .map(|m| m.parse::<Method>().map_err(|e| parse_err(e.to_string())))
            .transpose()?
            .unwrap_or_default();
        let dense = args.dense
            || table
                .get("dense")
                .map(|v| v.as_bool().ok_or_else(|| parse_err("dense: expected true or false")))
                .transpose()?
                .unwrap_or(false);
        let tol = match args.tol {
            Some(t) => Some(t),
            None => table.get("tol").map(|v| get_f64(v, "tol")).transpose()?,
        };
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(parse_err(format!("tol must be positive, got {t}")));
            }
        }
        let cluster_tol = table
            .get("cluster_tol")
            .map(|v| get_f64(v, "cluster_tol"))
            .transpose()?
            .unwrap_or(DEFAULT_CLUSTER_TOL);
        if !(cluster_tol >= 0.0 && cluster_tol.is_finite()) {
            return Err(parse_err("cluster_tol must be a non-negative number"));
        }
        let quad_points = match args.quad_points {
            Some(q) => q,
            None => table
                .get("quad_points")
                .map(|v| get_usize(v, "quad_points"))
                .transpose()?
                .unwrap_or(DEFAULT_QUAD_POINTS),
        };
        if quad_points == 0 {
            return Err(parse_err("quad_points must be at least 1"));
        }
        let solve = table.get("solve").map(parse_solve).transpose()?;

        let job = JobSpec {
            command,
            func,
            a,
            order,
            x,
            directions,
            method,
            dense,
            tol,
            cluster_tol,
            quad_points,
            solve,
        };
        job.validate()?;
        Ok(job)
    }

    fn validate(&self) -> Result<(), CliError> {
        let needs_fn = matches!(
            self.command,
            Command::Eval | Command::Grad | Command::Taylor | Command::Check
        );
        if needs_fn && self.func.is_none() {
            return Err(parse_err(format!("'{}' needs a function (fn)", self.command.name())));
        }
        if self.dense && self.order > MAX_DENSE_ORDER {
            return Err(parse_err(format!(
                "dense export is limited to order {MAX_DENSE_ORDER}, got {}",
                self.order
            )));
        }
        if self.command == Command::Taylor && self.x.is_none() {
            return Err(parse_err("'taylor' needs a direction matrix x"));
        }
        if self.command == Command::Grad && !self.directions.is_empty() && self.directions.len() != self.order {
            return Err(parse_err(format!(
                "directions: expected {} matrices for order {}, got {}",
                self.order,
                self.order,
                self.directions.len()
            )));
        }
        if self.command == Command::Solve && self.solve.is_none() {
            return Err(parse_err("'solve' needs a [solve] table"));
        }
        Ok(())
    }
}

fn parse_solve(v: &Value) -> Result<SolveSpec, CliError> {
    let t = v
        .as_table()
        .ok_or_else(|| parse_err("solve: expected a table"))?;
    for key in t.keys() {
        if !["kind", "m", "c", "y"].contains(&key.as_str()) {
            return Err(parse_err(format!("solve: unknown key '{key}'")));
        }
    }
    let kind = match t.get("kind").map(|k| get_str(k, "solve.kind")).transpose()? {
        Some("power") => SolveKind::Power,
        Some("commutator") => SolveKind::Commutator,
        Some("log_inverse") => SolveKind::LogInverse,
        Some(other) => {
            return Err(parse_err(format!(
                "solve.kind: expected power, commutator or log_inverse, got '{other}'"
            )))
        }
        None => return Err(parse_err("solve.kind is required")),
    };
    let m = t.get("m").map(|v| get_usize(v, "solve.m")).transpose()?.unwrap_or(2);
    let c = match t.get("c") {
        Some(v) => Some(get_sym(v, "solve.c")?.to_mat()),
        None => None,
    };
    let y = t.get("y").map(|v| get_matrix(v, "solve.y")).transpose()?;
    match kind {
        SolveKind::Power | SolveKind::LogInverse if c.is_none() => {
            return Err(parse_err("solve.c is required"))
        }
        SolveKind::Commutator if y.is_none() => return Err(parse_err("solve.y is required")),
        SolveKind::Power if m == 0 || m > 64 => {
            return Err(parse_err(format!("solve.m must be between 1 and 64, got {m}")))
        }
        _ => {}
    }
    Ok(SolveSpec {
        kind,
        m: m as u32,
        c,
        y,
    })
}

/// Minimal TOML emitter. Floats carry 17 significant digits so that a
/// re-parse reproduces every bit.
#[derive(Default)]
pub struct Document {
    out: String,
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn quote(s: &str) -> String {
    let mut q = String::from("\"");
    for ch in s.chars() {
        match ch {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            c if c.is_control() => {
                let _ = write!(q, "\\u{:04X}", c as u32);
            }
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

fn float_array(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|x| format_float(*x)).collect();
    format!("[{}]", items.join(", "))
}

fn matrix_value(m: &Mat3) -> String {
    let rows: Vec<String> = m.0.iter().map(|r| float_array(r)).collect();
    format!("[{}]", rows.join(", "))
}

impl Document {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn header(&mut self, name: &str) {
        let _ = writeln!(self.out, "\n[{name}]");
    }

    pub fn array_header(&mut self, name: &str) {
        let _ = writeln!(self.out, "\n[[{name}]]");
    }

    pub fn string(&mut self, key: &str, v: &str) {
        let _ = writeln!(self.out, "{key} = {}", quote(v));
    }

    pub fn int(&mut self, key: &str, v: i64) {
        let _ = writeln!(self.out, "{key} = {v}");
    }

    pub fn boolean(&mut self, key: &str, v: bool) {
        let _ = writeln!(self.out, "{key} = {v}");
    }

    pub fn float(&mut self, key: &str, v: f64) {
        let _ = writeln!(self.out, "{key} = {}", format_float(v));
    }

    pub fn floats(&mut self, key: &str, v: &[f64]) {
        let _ = writeln!(self.out, "{key} = {}", float_array(v));
    }

    pub fn matrix(&mut self, key: &str, m: &Mat3) {
        let _ = writeln!(self.out, "{key} = {}", matrix_value(m));
    }

    pub fn matrices(&mut self, key: &str, ms: &[Mat3]) {
        let items: Vec<String> = ms.iter().map(matrix_value).collect();
        let _ = writeln!(self.out, "{key} = [{}]", items.join(", "));
    }

    pub fn int_rows(&mut self, key: &str, rows: &[Vec<usize>]) {
        let items: Vec<String> = rows
            .iter()
            .map(|r| {
                let v: Vec<String> = r.iter().map(|i| i.to_string()).collect();
                format!("[{}]", v.join(", "))
            })
            .collect();
        let _ = writeln!(self.out, "{key} = [{}]", items.join(", "));
    }

    pub fn into_string(self) -> String {
        self.out
    }
}

fn spectrum_section(doc: &mut Document, s: &Spectrum) {
    doc.header("spectrum");
    doc.int("d", s.d() as i64);
    doc.floats("alphas", s.alphas());
    doc.matrices("projectors", &s.projector_mats());
}

fn func(job: &JobSpec) -> &ScalarFn {
    job.func.as_ref().expect("validated")
}

fn preamble(doc: &mut Document, job: &JobSpec) {
    doc.string("command", job.command.name());
    if let Some(f) = &job.func {
        doc.string("fn", &f.to_string());
    }
}

/// Result document plus whether every `check` property held.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub document: String,
    pub passed: bool,
}

/// Runs a job and renders the result document.
pub fn run(job: &JobSpec) -> Result<Outcome, CliError> {
    let mut doc = Document::new();
    preamble(&mut doc, job);
    let s = decompose(&job.a, job.cluster_tol)?;
    match job.command {
        Command::Eval => {
            doc.matrix("result", &s.apply(func(job))?.to_mat());
        }
        Command::Grad => run_grad(&mut doc, job, &s)?,
        Command::Taylor => run_taylor(&mut doc, job, &s)?,
        Command::Solve => run_solve(&mut doc, job)?,
        Command::Check => {
            let passed = run_check(&mut doc, job, &s)?;
            return Ok(Outcome { document: doc.into_string(), passed });
        }
    }
    Ok(Outcome { document: doc.into_string(), passed: true })
}

fn run_grad(doc: &mut Document, job: &JobSpec, s: &Spectrum) -> Result<(), CliError> {
    let dv = derivative_with(func(job), s, job.order, job.method)?;
    doc.int("order", job.order as i64);
    doc.string("method", &job.method.to_string());
    spectrum_section(doc, s);
    doc.header("coefficients");
    let keys: Vec<Vec<usize>> = dv
        .table()
        .entries()
        .keys()
        .map(|k| k.iter().map(|i| i + 1).collect())
        .collect();
    let values: Vec<f64> = dv.table().entries().values().copied().collect();
    doc.int_rows("indices", &keys);
    doc.floats("values", &values);
    if !job.directions.is_empty() {
        let xs: Vec<Mat3> = job.directions.iter().map(Mat3::from).collect();
        doc.header("action");
        doc.matrix("result", &dv.derivative_action(&xs)?);
    }
    if job.dense {
        dense_section(doc, &dv);
    }
    Ok(())
}

fn dense_section(doc: &mut Document, dv: &SpectralDerivative) {
    doc.header("dense");
    doc.int("rank", 2 * (dv.order() as i64 + 1));
    doc.floats("components", &dv.dense_components());
}

fn run_taylor(doc: &mut Document, job: &JobSpec, s: &Spectrum) -> Result<(), CliError> {
    let f = func(job);
    let x = job.x.expect("validated");
    let shifted = decompose(&(job.a + x), job.cluster_tol)?;
    let exact: Mat3 = shifted.apply(f)?.into();
    let mut total: Mat3 = s.apply(f)?.into();
    let xm: Mat3 = x.into();
    for k in 1..=job.order {
        total += derivative_with(f, s, k, job.method)?.contract_dirs(&vec![xm; k])?;
    }
    doc.int("order", job.order as i64);
    doc.matrix("result", &total);
    doc.matrix("exact", &exact);
    doc.float("remainder_norm", (exact - total).norm());
    Ok(())
}

fn run_solve(doc: &mut Document, job: &JobSpec) -> Result<(), CliError> {
    let spec = job.solve.as_ref().expect("validated");
    let am: Mat3 = job.a.into();
    doc.header("solve");
    match spec.kind {
        SolveKind::Power => {
            let c = spec.c.expect("validated");
            let x = sylvester_power(spec.m, &job.a, &c)?;
            doc.string("kind", "power");
            doc.int("m", spec.m as i64);
            doc.matrix("x", &x);
            doc.float("residual_norm", power_residual(spec.m, &job.a, &x, &c).norm());
        }
        SolveKind::Commutator => {
            let y = spec.y.expect("validated");
            let sol = sylvester_commutator(&job.a, &y)?;
            doc.string("kind", "commutator");
            doc.matrix("x", &sol.x);
            doc.float("null_residual", sol.null_residual);
            doc.float("residual_norm", (am * sol.x - sol.x * am - y).norm());
        }
        SolveKind::LogInverse => {
            let c = spec.c.expect("validated");
            let inv = log_inverse_integral(&job.a, job.quad_points)?;
            let x = inv.apply(&c);
            let g = crate::derivatives::gradient(&ScalarFn::Log, &job.a)?;
            doc.string("kind", "log_inverse");
            doc.int("quad_points", job.quad_points as i64);
            doc.matrix("x", &x);
            doc.float("residual_norm", (g.apply(&x) - c).norm());
        }
    }
    Ok(())
}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
    detail: Option<String>,
}

fn unit_probes() -> Vec<Mat3> {
    let mut out = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            let mut m = Mat3::ZERO;
            m[(i, j)] = 1.0;
            out.push(m);
        }
    }
    out
}

fn collect_checks(job: &JobSpec, s: &Spectrum) -> Result<Vec<Check>, CliError> {
    let f = func(job);
    let tol = |default: f64| job.tol.unwrap_or(default);
    let probes = unit_probes();
    let mut checks = Vec::new();

    let (orth, unity) = s.projector_residuals();
    checks.push(Check { name: "projector_orthogonality", value: orth, tolerance: tol(1e-10), detail: None });
    checks.push(Check { name: "partition_of_unity", value: unity, tolerance: tol(1e-12), detail: None });
    let scale = job.a.norm().max(f64::MIN_POSITIVE);
    let recon = (s.reconstruct() - job.a).norm() / scale;
    checks.push(Check { name: "reconstruction", value: recon, tolerance: tol(1e-10), detail: None });

    // (A⊠I − I⊠A)∇f = f(A)⊠I − I⊠f(A)
    let grad = derivative_with(f, s, 1, Method::DividedDifference)?.to_fourth()?;
    let am: Mat3 = job.a.into();
    let fa: Mat3 = s.apply(f)?.into();
    let j = FourthTensor::from_terms(vec![(1.0, am, Mat3::IDENTITY), (-1.0, Mat3::IDENTITY, am)]);
    let jf = FourthTensor::from_terms(vec![(1.0, fa, Mat3::IDENTITY), (-1.0, Mat3::IDENTITY, fa)]);
    let lemma = compose4(&j, &grad).max_action_diff(&jf, &probes) / fa.norm().max(1.0);
    checks.push(Check { name: "commutator_identity", value: lemma, tolerance: tol(1e-10), detail: None });

    // coefficient routes
    let dd = build_table(f, s, job.order, Method::DividedDifference)?;
    for (name, method) in [("residue_agreement", Method::Residue), ("interpolation_agreement", Method::Interpolation)] {
        match build_table(f, s, job.order, method) {
            Ok(t) => {
                let diff = dd
                    .entries()
                    .iter()
                    .map(|(k, v)| (v - t.entries()[k]).abs() / v.abs().max(1e-300))
                    .fold(0.0, f64::max);
                checks.push(Check { name, value: diff, tolerance: tol(1e-8), detail: None });
            }
            Err(e @ Error::IllConditioned(_)) => checks.push(Check {
                name,
                value: 0.0,
                tolerance: tol(1e-8),
                detail: Some(format!("skipped: {e}")),
            }),
            Err(e) => return Err(e.into()),
        }
    }

    // finite differences along the direction x, or the identity
    let x = job.x.unwrap_or_else(|| SymTensor::diag([1.0, 0.5, 0.25]));
    let xm: Mat3 = x.into();
    let mut fd_worst: f64 = 0.0;
    for k in 1..=job.order.min(3) {
        let exact = derivative_with(f, s, k, Method::DividedDifference)?.derivative_action(&vec![xm; k])?;
        let fd = finite_diff_derivative(f, &job.a, &vec![x; k], None)?;
        fd_worst = fd_worst.max((fd - exact).norm() / exact.norm().max(1.0));
    }
    checks.push(Check { name: "finite_difference", value: fd_worst, tolerance: tol(1e-5), detail: None });

    if let Ok(measure) = StrainMeasureFn::new(f.clone()) {
        if s.is_positive() {
            match (grad_spectral(&measure, s), inverse_grad(&measure, s)) {
                (Ok(g), Ok(gi)) => {
                    let r = compose4(&g, &gi).max_action_diff(&FourthTensor::identity(), &probes);
                    checks.push(Check { name: "inverse_gradient", value: r, tolerance: tol(1e-10), detail: None });
                }
                (Err(e), _) | (_, Err(e)) => checks.push(Check {
                    name: "inverse_gradient",
                    value: f64::INFINITY,
                    tolerance: tol(1e-10),
                    detail: Some(e.to_string()),
                }),
            }
        }
    }
    Ok(checks)
}

fn run_check(doc: &mut Document, job: &JobSpec, s: &Spectrum) -> Result<bool, CliError> {
    let checks = collect_checks(job, s)?;
    let all = checks.iter().all(|c| c.value <= c.tolerance);
    doc.int("order", job.order as i64);
    doc.boolean("all_pass", all);
    for c in &checks {
        doc.array_header("checks");
        doc.string("name", c.name);
        doc.float("value", c.value);
        doc.float("tolerance", c.tolerance);
        doc.boolean("pass", c.value <= c.tolerance);
        if let Some(d) = &c.detail {
            doc.string("detail", d);
        }
    }
    Ok(all)
}

/// Parses arguments, runs the job, prints the document and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&args) {
        Ok(out) => {
            print!("{}", out.document);
            if out.passed {
                0
            } else {
                eprintln!("error: one or more checks failed");
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Reads the job file and runs it.
pub fn execute(args: &Args) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(&args.input).map_err(|source| CliError::Io {
        path: args.input.clone(),
        source,
    })?;
    let job = JobSpec::from_toml(&text, args)?;
    run(&job)
}
