//! Command-line front end: `propagate`, `sweep`, `validate`, `oracle`.
//!
//! Exit codes: 0 success, 1 usage or invalid input, 2 singular point, 3 accuracy failure,
//! 4 failed validation check.

use crate::correction::{full_propagator, PropagatorResult};
use crate::error::Error;
use crate::lattice::{wn_quadrature, wn_series_exact, ModelParams};
use crate::specfun::TruncationPolicy;
use crate::validate::{is_singular, rel_diff, run_suite, Check, Suite};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_SINGULAR: i32 = 2;
pub const EXIT_ACCURACY: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "anhosc", version, about = "Imaginary-time propagator of the quartic anharmonic oscillator")]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Subcommand, Debug)]
enum CommandArgs {
    /// Evaluate the fixed-origin propagator at one endpoint.
    Propagate(ModelArgs),
    /// Evaluate the propagator along a one-parameter sweep (CSV by default).
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        sweep: SweepParam,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Run invariant suites and report each check.
    Validate {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the exact lattice series with direct quadrature for N slices.
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct ModelArgs {
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    xf: Option<f64>,
    /// Poincaré truncation order 𝒥.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    pmax: Option<usize>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Per-index cutoff of the lattice series.
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` file merged under the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    A,
    B,
    Beta,
    Xf,
}

impl SweepParam {
    fn name(&self) -> &'static str {
        match self {
            SweepParam::A => "a",
            SweepParam::B => "b",
            SweepParam::Beta => "beta",
            SweepParam::Xf => "xf",
        }
    }

    fn apply(&self, p: &ModelParams, v: f64) -> ModelParams {
        match self {
            SweepParam::A => p.with_a(v),
            SweepParam::B => p.with_b(v),
            SweepParam::Beta => p.with_beta(v),
            SweepParam::Xf => p.with_x_f(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let h = (self.to - self.from) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.to } else { self.from + k as f64 * h })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Propagate,
    Sweep,
    Validate,
    Oracle,
}

/// Fully resolved run: flags over config file over defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub policy: TruncationPolicy,
    pub command: Command,
    pub sweep_spec: Option<SweepSpec>,
    pub output: Format,
    pub output_path: Option<PathBuf>,
}

/// Defaults when neither flag nor config sets a value.
pub const DEFAULT_PARAMS: (f64, f64, f64, f64, f64) = (0.0, 0.5, 1.0, 1.0, 0.0);

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let k = k.trim().to_string();
        const KEYS: [&str; 11] = ["a", "b", "c", "beta", "xf", "order", "pmax", "tol", "cutoff", "format", "out"];
        if !KEYS.contains(&k.as_str()) {
            return Err(format!("config line {}: unknown key '{k}'", i + 1));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

fn pick<T: std::str::FromStr>(flag: Option<T>, cfg: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match cfg.get(key) {
        Some(s) => s.parse().map(Some).map_err(|_| format!("config: cannot parse {key} = {s}")),
        None => Ok(None),
    }
}

fn resolve(m: &ModelArgs, command: Command, sweep_spec: Option<SweepSpec>) -> Result<RunConfig, String> {
    let cfg = match &m.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
            parse_config(&text)?
        }
        None => BTreeMap::new(),
    };
    let (a0, b0, c0, beta0, x0) = DEFAULT_PARAMS;
    let params = ModelParams::new(
        pick(m.a, &cfg, "a")?.unwrap_or(a0),
        pick(m.b, &cfg, "b")?.unwrap_or(b0),
        pick(m.c, &cfg, "c")?.unwrap_or(c0),
        pick(m.beta, &cfg, "beta")?.unwrap_or(beta0),
        pick(m.xf, &cfg, "xf")?.unwrap_or(x0),
    );
    let mut policy = TruncationPolicy::default();
    if let Some(v) = pick(m.order, &cfg, "order")? {
        policy.poincare_order = v;
    }
    if let Some(v) = pick(m.pmax, &cfg, "pmax")? {
        policy.p_max = v;
    }
    if let Some(v) = pick(m.tol, &cfg, "tol")? {
        policy.quad_rel_tol = v;
    }
    if let Some(v) = pick(m.cutoff, &cfg, "cutoff")? {
        policy.series_cutoff = v;
    }
    policy.validate().map_err(|e| e.to_string())?;
    let format = match m.format {
        Some(f) => f,
        None => match cfg.get("format").map(String::as_str) {
            Some("json") => Format::Json,
            Some("csv") => Format::Csv,
            Some(other) => return Err(format!("config: unknown format '{other}'")),
            None if command == Command::Sweep => Format::Csv,
            None => Format::Json,
        },
    };
    let output_path = m.out.clone().or_else(|| cfg.get("out").map(PathBuf::from));
    if let Some(s) = &sweep_spec {
        if s.steps < 2 {
            return Err("--steps must be at least 2".into());
        }
    }
    Ok(RunConfig {
        params: params.map_err(|e| e.to_string())?,
        policy,
        command,
        sweep_spec,
        output: format,
        output_path,
    })
}

/// Fixed scientific notation with 17 significant digits; non-finite values become null.
pub fn num(v: f64) -> String {
    // print 0 rather than -0
    let v = if v == 0.0 { 0.0 } else { v };
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

fn csv_num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

fn json_str(s: &str) -> String {
    let mut out = String::from("\"");
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Outcome of one propagator evaluation, classified for the exit code and status column.
#[derive(Debug, Clone)]
pub enum Outcome {
    Ok(PropagatorResult),
    Singular(String),
    Accuracy { detail: String, achieved: f64 },
    Invalid(String),
}

impl Outcome {
    pub fn evaluate(params: &ModelParams, policy: &TruncationPolicy) -> Self {
        match full_propagator(params, policy) {
            Ok(r) => Outcome::Ok(r),
            Err(e) if is_singular(&e) => Outcome::Singular(e.to_string()),
            Err(Error::Accuracy { detail, achieved, .. }) => Outcome::Accuracy { detail, achieved },
            Err(e) => Outcome::Invalid(e.to_string()),
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            Outcome::Ok(_) => "ok",
            Outcome::Singular(_) => "singular",
            Outcome::Accuracy { .. } => "accuracy",
            Outcome::Invalid(_) => "error",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Ok(_) => EXIT_OK,
            Outcome::Singular(_) => EXIT_SINGULAR,
            Outcome::Accuracy { .. } => EXIT_ACCURACY,
            Outcome::Invalid(_) => EXIT_USAGE,
        }
    }

    fn message(&self) -> Option<&str> {
        match self {
            Outcome::Ok(_) => None,
            Outcome::Singular(m) | Outcome::Invalid(m) => Some(m),
            Outcome::Accuracy { detail, .. } => Some(detail),
        }
    }

    /// The five result fields, NaN when unavailable.
    fn fields(&self) -> [f64; 5] {
        match self {
            Outcome::Ok(r) => [
                r.harmonic_prefactor,
                r.harmonic_exponent,
                r.universal_exponent,
                r.polynomial_factor,
                r.value,
            ],
            _ => [f64::NAN; 5],
        }
    }

    fn tail_estimates(&self) -> Vec<f64> {
        match self {
            Outcome::Ok(r) => r.diagnostics.iter().map(|d| d.tail_estimate).collect(),
            Outcome::Accuracy { achieved, .. } => vec![*achieved],
            _ => Vec::new(),
        }
    }
}

const RESULT_KEYS: [&str; 5] = [
    "harmonic_prefactor",
    "harmonic_exponent",
    "universal_exponent",
    "polynomial_factor",
    "propagator",
];

pub fn propagate_json(params: &ModelParams, policy: &TruncationPolicy, outcome: &Outcome) -> String {
    let f = outcome.fields();
    let result: Vec<String> = RESULT_KEYS.iter().zip(f).map(|(k, v)| format!("\"{k}\":{}", num(v))).collect();
    let tails: Vec<String> = outcome.tail_estimates().into_iter().map(num).collect();
    format!(
        "{{\"params\":{{\"a\":{},\"b\":{},\"c\":{},\"beta\":{},\"xf\":{}}},\
\"truncation\":{{\"order\":{},\"pmax\":{},\"tol\":{},\"cutoff\":{}}},\
\"result\":{{{}}},\"diagnostics\":{{\"tail_estimates\":[{}],\"status\":{}}}}}",
        num(params.a),
        num(params.b),
        num(params.c),
        num(params.beta),
        num(params.x_f),
        policy.poincare_order,
        policy.p_max,
        num(policy.quad_rel_tol),
        policy.series_cutoff,
        result.join(","),
        tails.join(","),
        json_str(outcome.status()),
    )
}

pub const SWEEP_HEADER: &str =
    "param,value,harmonic_prefactor,harmonic_exponent,universal_exponent,polynomial_factor,propagator,status";

fn csv_row(lead: &[String], outcome: &Outcome) -> String {
    let mut cells: Vec<String> = lead.to_vec();
    cells.extend(outcome.fields().iter().map(|v| csv_num(*v)));
    cells.push(outcome.status().to_string());
    cells.join(",")
}

fn thread_pool() -> Option<rayon::ThreadPool> {
    let n: usize = std::env::var("ANHOSC_THREADS").ok()?.trim().parse().ok()?;
    rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok()
}

/// Evaluates every sweep point; rows come back in sweep order.
pub fn sweep_rows(config: &RunConfig, spec: &SweepSpec) -> Vec<(f64, ModelParams, Outcome)> {
    let values = spec.values();
    let work = || {
        values
            .par_iter()
            .map(|&v| {
                let p = spec.param.apply(&config.params, v);
                let outcome = match p.validate() {
                    Ok(()) => Outcome::evaluate(&p, &config.policy),
                    Err(e) => Outcome::Invalid(e.to_string()),
                };
                (v, p, outcome)
            })
            .collect::<Vec<_>>()
    };
    match thread_pool() {
        Some(pool) => pool.install(work),
        None => work(),
    }
}

fn check_json(suite: Suite, checks: &[Check]) -> String {
    let items: Vec<String> = checks
        .iter()
        .map(|c| {
            format!(
                "{{\"name\":{},\"status\":{},\"measured\":{},\"tolerance\":{}}}",
                json_str(&c.name),
                json_str(if c.passed { "pass" } else { "fail" }),
                num(c.measured),
                num(c.tolerance)
            )
        })
        .collect();
    format!("{{\"suite\":{},\"checks\":[{}]}}", json_str(suite.name()), items.join(","))
}

fn emit(text: &str, path: &Option<PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match path {
        Some(p) => match std::fs::write(p, text) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", p.display());
                EXIT_USAGE
            }
        },
        None => match stdout.write_all(text.as_bytes()) {
            Ok(()) => EXIT_OK,
            Err(_) => EXIT_USAGE,
        },
    }
}

fn usage_error(stderr: &mut dyn Write, msg: &str) -> i32 {
    let _ = writeln!(stderr, "error: {msg}\n\nFor more information, try '--help'.");
    EXIT_USAGE
}

pub fn cmd_propagate(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = Outcome::evaluate(&config.params, &config.policy);
    if let Outcome::Invalid(m) = &outcome {
        return usage_error(stderr, m);
    }
    if let Some(m) = outcome.message() {
        let _ = writeln!(stderr, "{}: {m}", outcome.status());
    }
    let p = &config.params;
    let text = match config.output {
        Format::Json => propagate_json(p, &config.policy, &outcome) + "\n",
        Format::Csv => {
            let lead: Vec<String> = [p.a, p.b, p.c, p.beta, p.x_f].iter().map(|v| csv_num(*v)).collect();
            format!(
                "a,b,c,beta,xf,{},status\n{}\n",
                RESULT_KEYS.join(","),
                csv_row(&lead, &outcome)
            )
        }
    };
    let code = emit(&text, &config.output_path, stdout, stderr);
    if code != EXIT_OK {
        return code;
    }
    outcome.exit_code()
}

pub fn cmd_sweep(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let Some(spec) = config.sweep_spec else {
        return usage_error(stderr, "sweep needs --sweep, --from, --to and --steps");
    };
    let rows = sweep_rows(config, &spec);
    let text = match config.output {
        Format::Csv => {
            let mut s = String::from(SWEEP_HEADER);
            s.push('\n');
            for (v, _, o) in &rows {
                s.push_str(&csv_row(&[spec.param.name().to_string(), csv_num(*v)], o));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let items: Vec<String> = rows.iter().map(|(_, p, o)| propagate_json(p, &config.policy, o)).collect();
            format!("[{}]\n", items.join(","))
        }
    };
    emit(&text, &config.output_path, stdout, stderr)
}

pub fn cmd_validate(suite: Suite, out: &Option<PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let checks = run_suite(suite);
    let code = emit(&(check_json(suite, &checks) + "\n"), out, stdout, stderr);
    if code != EXIT_OK {
        return code;
    }
    for c in checks.iter().filter(|c| !c.passed) {
        let _ = writeln!(stderr, "FAIL {}: measured {} tolerance {}", c.name, c.measured, c.tolerance);
    }
    if checks.iter().all(|c| c.passed) {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    }
}

/// Oracle tolerance between the lattice series and direct quadrature.
pub const ORACLE_TOL: f64 = 1e-6;

pub fn cmd_oracle(config: &RunConfig, n: usize, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let p = &config.params;
    let series = wn_series_exact(p, n, &config.policy);
    let quad = wn_quadrature(p, n, &config.policy);
    let (series, quad) = match (series, quad) {
        (Ok(s), Ok(q)) => (s, q),
        (Err(e), _) | (_, Err(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            return match e {
                e if is_singular(&e) => EXIT_SINGULAR,
                Error::Accuracy { .. } => EXIT_ACCURACY,
                _ => EXIT_USAGE,
            };
        }
    };
    let diff = rel_diff(series.value, quad);
    let passed = diff <= ORACLE_TOL;
    let text = format!(
        "{{\"params\":{{\"a\":{},\"b\":{},\"c\":{},\"beta\":{},\"xf\":{}}},\"n\":{},\"series\":{},\"tail_estimate\":{},\"quadrature\":{},\"rel_diff\":{},\"tolerance\":{},\"status\":{}}}\n",
        num(p.a),
        num(p.b),
        num(p.c),
        num(p.beta),
        num(p.x_f),
        n,
        num(series.value),
        num(series.tail_estimate),
        num(quad),
        num(diff),
        num(ORACLE_TOL),
        json_str(if passed { "pass" } else { "fail" }),
    );
    let code = emit(&text, &config.output_path, stdout, stderr);
    if code != EXIT_OK {
        return code;
    }
    if passed {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    }
}

/// Parses arguments and runs the command; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let resolved = match &cli.command {
        CommandArgs::Propagate(m) => resolve(m, Command::Propagate, None),
        CommandArgs::Sweep {
            model,
            sweep,
            from,
            to,
            steps,
        } => resolve(
            model,
            Command::Sweep,
            Some(SweepSpec {
                param: *sweep,
                from: *from,
                to: *to,
                steps: *steps,
            }),
        ),
        CommandArgs::Oracle { model, .. } => resolve(model, Command::Oracle, None),
        CommandArgs::Validate { suite, out } => {
            return match suite.parse::<Suite>() {
                Ok(s) => cmd_validate(s, out, stdout, stderr),
                Err(m) => usage_error(stderr, &m),
            };
        }
    };
    let config = match resolved {
        Ok(c) => c,
        Err(m) => return usage_error(stderr, &m),
    };
    match (&cli.command, config.command) {
        (_, Command::Propagate) => cmd_propagate(&config, stdout, stderr),
        (_, Command::Sweep) => cmd_sweep(&config, stdout, stderr),
        (CommandArgs::Oracle { n, .. }, Command::Oracle) => cmd_oracle(&config, *n, stdout, stderr),
        _ => unreachable!("validate returns early"),
    }
}
