//! Command-line front end: `invert`, `eval`, `series` and `selftest`.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 ambiguity, non-convergence
//! or a numerical failure, 3 self-test failure.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};
use serde_json::Number;

use crate::error::{Error, Result};
use crate::forward::eval_j;
use crate::hecke::{denominator_formula_check_with_table, two_variable_identity_check_with_table, IdentityReport};
use crate::inverter::{invert_j, Config, InversionResult};
use crate::maass::{maass_coefficients, maass_coefficients_floating, Alpha, FloatPrecision};
use crate::mpnum::{bits_for_digits, MPComplex, MPReal};
use crate::qseries::{cached_j_series, delta, eisenstein, GaussianRational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_SELFTEST: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "jinv", version, about = "Invert the modular j-function from Fourier coefficients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Find z in the fundamental domain with j(z) = α.
    Invert(InvertArgs),
    /// Evaluate j(τ).
    Eval(EvalArgs),
    /// Print q-expansion coefficients, one `<exponent> <coefficient>` per line.
    Series(SeriesArgs),
    /// Run the exact identity checks.
    Selftest(SelftestArgs),
}

#[derive(clap::Args, Debug, Default)]
pub struct InvertArgs {
    /// `re` or `re,im`; integers may be written as sums of `a*b^c` terms.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long)]
    pub terms: Option<usize>,
    #[arg(long)]
    pub max_terms: Option<usize>,
    #[arg(long)]
    pub precision_bits: Option<u32>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub no_refine: bool,
    #[arg(long)]
    pub window: Option<usize>,
    /// Stable digits of the y estimate required before N stops doubling.
    #[arg(long)]
    pub stable_digits: Option<u32>,
    /// Significant digits printed for z.
    #[arg(long)]
    pub digits: Option<usize>,
    /// Use floating coefficients even for exact α.
    #[arg(long)]
    pub float: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// `key=value` file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct EvalArgs {
    /// `re,im` with im > 0.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: String,
    #[arg(long, default_value_t = 30)]
    pub digits: u32,
}

#[derive(clap::Args, Debug, Clone)]
pub struct SeriesArgs {
    #[arg(long, value_enum)]
    pub kind: SeriesKind,
    /// Truncation order (number of coefficients for power series).
    #[arg(long, default_value_t = 10)]
    pub terms: i64,
    /// Required for `maass`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Use floating coefficients for `maass`.
    #[arg(long)]
    pub float: bool,
    /// Digits printed for floating coefficients.
    #[arg(long, default_value_t = 30)]
    pub digits: usize,
}

#[derive(clap::Args, Debug)]
pub struct SelftestArgs {
    #[arg(long, value_enum, default_value_t = Level::Quick)]
    pub level: Level,
    /// Add 1 to c(n) before checking (fault injection).
    #[arg(long)]
    pub corrupt: Option<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SeriesKind {
    J,
    #[value(name = "E2")]
    E2,
    #[value(name = "E4")]
    E4,
    #[value(name = "E6")]
    E6,
    Delta,
    Maass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

impl FromStr for SeriesKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s, false).map_err(|_| parse_err(format!("unknown series kind `{s}`")))
    }
}

impl FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s, true).map_err(|_| parse_err(format!("unknown level `{s}`")))
    }
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Integer expression: a sum of `±a`, `±a^c`, `±a*b^c…` terms.
pub fn parse_integer_expression(s: &str) -> Result<Integer> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(parse_err("empty expression"));
    }
    let bytes = t.as_bytes();
    let mut pos = 0;
    let mut total = Integer::new();
    let number = |pos: &mut usize| -> Result<Integer> {
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Err(parse_err(format!("expected digits at offset {start} in `{s}`")));
        }
        Integer::from_str(&t[start..*pos]).map_err(|e| parse_err(e.to_string()))
    };
    while pos < bytes.len() {
        let mut sign = 1;
        while pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
            if bytes[pos] == b'-' {
                sign = -sign;
            }
            pos += 1;
        }
        let mut term = Integer::from(1);
        loop {
            let base = number(&mut pos)?;
            let factor = if pos < bytes.len() && bytes[pos] == b'^' {
                pos += 1;
                let e = number(&mut pos)?;
                let e = e.to_u32().ok_or_else(|| parse_err("exponent too large"))?;
                base.pow(e)
            } else {
                base
            };
            term *= factor;
            if pos < bytes.len() && bytes[pos] == b'*' {
                pos += 1;
                continue;
            }
            break;
        }
        if sign < 0 {
            term = -term;
        }
        total += term;
        if pos < bytes.len() && bytes[pos] != b'+' && bytes[pos] != b'-' {
            return Err(parse_err(format!("unexpected `{}` in `{s}`", bytes[pos] as char)));
        }
    }
    Ok(total)
}

/// Decimal literal (`-1.25`, `3e-4`) as an exact rational.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let t = s.trim();
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => {
            let e = t[i + 1..].parse::<i32>().map_err(|_| parse_err(format!("bad exponent in `{t}`")))?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let valid = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    if (int_part.is_empty() && frac_part.is_empty()) || !valid(int_part) || !valid(frac_part) {
        return Err(parse_err(format!("not a decimal number: `{t}`")));
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from(Integer::from_str(&digits).map_err(|e| parse_err(e.to_string()))?);
    let scale = exp - frac_part.len() as i32;
    let ten = Integer::from(10).pow(scale.unsigned_abs());
    if scale >= 0 {
        value *= Rational::from(ten);
    } else {
        value /= Rational::from(ten);
    }
    if neg {
        value = -value;
    }
    Ok(value)
}

fn parse_component(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.contains(['*', '^']) || (t.len() > 1 && t[1..].contains(['+', '-']) && !t.contains(['e', 'E'])) {
        return Ok(Rational::from(parse_integer_expression(t)?));
    }
    parse_decimal(t)
}

/// `re` or `re,im`, exact.
pub fn parse_alpha(s: &str) -> Result<Alpha> {
    let (re, im) = match s.split_once(',') {
        Some((a, b)) => (parse_component(a)?, parse_component(b)?),
        None => (parse_component(s)?, Rational::new()),
    };
    Ok(Alpha::from_gaussian(GaussianRational::new(re, im)))
}

/// `re,im` at `prec` bits.
pub fn parse_tau(s: &str, prec: u32) -> Result<MPComplex> {
    let (a, b) = s.split_once(',').ok_or_else(|| parse_err(format!("expected `re,im`, got `{s}`")))?;
    let re = MPReal::from_rational(prec, &parse_decimal(a)?);
    let im = MPReal::from_rational(prec, &parse_decimal(b)?);
    if im.is_sign_negative() || im.is_zero() {
        return Err(Error::Domain(format!("Im(tau) must be positive, got {}", b.trim())));
    }
    Ok(MPComplex::new(re, im))
}

/// Settings for `invert` after merging a config file and flags.
#[derive(Clone, Debug, PartialEq)]
pub struct InvertSettings {
    pub config: Config,
    pub format: Format,
    pub digits: usize,
}

impl Default for InvertSettings {
    fn default() -> Self {
        InvertSettings {
            config: Config::default(),
            format: Format::Text,
            digits: 25,
        }
    }
}

fn bool_value(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(parse_err(format!("{key}: expected a boolean, got `{v}`"))),
    }
}

fn num_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| parse_err(format!("{key}: cannot parse `{v}`")))
}

/// Applies `key=value` lines (`#` starts a comment) on top of `base`.
pub fn apply_config_text(base: &mut InvertSettings, text: &str) -> Result<()> {
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("line {}: expected key=value", lineno + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        let c = &mut base.config;
        match k {
            "terms" => c.terms = num_value(k, v)?,
            "max_terms" => c.max_terms = num_value(k, v)?,
            "precision_bits" => c.precision_bits = Some(num_value(k, v)?),
            "tol" => c.tol = num_value(k, v)?,
            "refine" => c.refine = bool_value(k, v)?,
            "window" => c.window = num_value(k, v)?,
            "stable_digits" => c.digits = num_value(k, v)?,
            "max_iter" => c.max_iter = num_value(k, v)?,
            "float" => c.force_float = bool_value(k, v)?,
            "digits" => base.digits = num_value(k, v)?,
            "format" => {
                base.format = Format::from_str(v, true).map_err(|_| parse_err(format!("format: unknown `{v}`")))?
            }
            _ => return Err(parse_err(format!("line {}: unknown key `{k}`", lineno + 1))),
        }
    }
    Ok(())
}

pub fn invert_settings(args: &InvertArgs) -> Result<InvertSettings> {
    let mut s = InvertSettings::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| parse_err(format!("cannot read config {}: {e}", path.display())))?;
        apply_config_text(&mut s, &text)?;
    }
    let c = &mut s.config;
    if let Some(v) = args.terms {
        c.terms = v;
        c.max_terms = c.max_terms.max(v);
    }
    if let Some(v) = args.max_terms {
        c.max_terms = v;
    }
    if args.precision_bits.is_some() {
        c.precision_bits = args.precision_bits;
    }
    if let Some(v) = args.tol {
        c.tol = v;
    }
    if args.no_refine {
        c.refine = false;
    }
    if let Some(v) = args.window {
        c.window = v;
    }
    if let Some(v) = args.stable_digits {
        c.digits = v;
    }
    if args.float {
        c.force_float = true;
    }
    if let Some(v) = args.digits {
        s.digits = v;
    }
    if let Some(f) = args.format {
        s.format = f;
    }
    s.config.validate()?;
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: Number,
    pub im: Number,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointJson {
    pub x: Number,
    pub y: Number,
}

/// The machine-readable `invert` report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvertReport {
    pub alpha: ComplexJson,
    pub z: PointJson,
    pub residual: Number,
    pub branch: String,
    pub terms_used: usize,
    pub precision_bits: u32,
    pub b_trace: Vec<(usize, Number)>,
    pub candidates: Vec<(Number, Number)>,
    pub refined: bool,
    pub converged: bool,
}

fn num(x: &MPReal, digits: usize) -> Number {
    let s = x.to_sci(digits);
    Number::from_str(&s).unwrap_or_else(|_| Number::from(0))
}

impl InvertReport {
    pub fn from_result(r: &InversionResult, digits: usize) -> Self {
        InvertReport {
            alpha: ComplexJson {
                re: num(r.alpha.re(), digits),
                im: num(r.alpha.im(), digits),
            },
            z: PointJson {
                x: num(r.z.re(), digits),
                y: num(r.z.im(), digits),
            },
            residual: num(&r.residual, 6),
            branch: r.branch.as_str().to_string(),
            terms_used: r.terms_used,
            precision_bits: r.precision_bits,
            b_trace: r.y_trace.iter().map(|(n, b)| (*n, num(b, 20))).collect(),
            candidates: r.candidates.iter().map(|(x, s)| (num(x, 16), num(s, 6))).collect(),
            refined: r.refined,
            converged: r.converged,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "alpha          = {} + {}i", self.alpha.re, self.alpha.im);
        let _ = writeln!(out, "z              = {} + {}i", self.z.x, self.z.y);
        let _ = writeln!(out, "residual       = {}", self.residual);
        let _ = writeln!(out, "branch         = {}", self.branch);
        let _ = writeln!(out, "terms_used     = {}", self.terms_used);
        let _ = writeln!(out, "precision_bits = {}", self.precision_bits);
        let _ = writeln!(out, "refined        = {}", self.refined);
        let _ = writeln!(out, "converged      = {}", self.converged);
        let _ = writeln!(out, "b(n) trace:");
        for (n, b) in &self.b_trace {
            let _ = writeln!(out, "  {n:>6}  {b}");
        }
        let _ = writeln!(out, "candidates (x, |j(x + i y0) - alpha|):");
        for (x, s) in &self.candidates {
            let _ = writeln!(out, "  {x}  {s}");
        }
        out
    }
}

/// Output of one command: text for stdout, text for stderr, exit code.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Argument(_) | Error::Domain(_) => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

fn failure(e: Error) -> Outcome {
    Outcome {
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
        code: exit_code_for(&e),
    }
}

pub fn cmd_invert(args: &InvertArgs) -> Outcome {
    let settings = match invert_settings(args) {
        Ok(s) => s,
        Err(e) => return failure(e),
    };
    let alpha = match parse_alpha(&args.alpha) {
        Ok(a) => a,
        Err(e) => return failure(e),
    };
    let result = match invert_j(&alpha, &settings.config) {
        Ok(r) => r,
        Err(e) => return failure(e),
    };
    let report = InvertReport::from_result(&result, settings.digits);
    let stdout = match settings.format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    };
    let ok = result.succeeded(settings.config.tol);
    let mut stderr = String::new();
    if result.ambiguous {
        stderr.push_str("warning: x-candidates are ambiguous; try more terms\n");
    }
    if !ok && !result.ambiguous {
        stderr.push_str("warning: residual above tolerance\n");
    }
    Outcome {
        stdout,
        stderr,
        code: if ok { EXIT_OK } else { EXIT_NUMERIC },
    }
}

/// `re ± im i` with `digits` significant digits relative to `max(1, |z|)`.
pub fn format_value(z: &MPComplex, digits: u32) -> String {
    let scale = z.abs().to_f64().max(1.0);
    let mag = scale.log10().floor() as i64;
    let decimals = (i64::from(digits) - 1 - mag).max(0) as usize;
    let cutoff = 0.5 * 10f64.powi(-(decimals as i32));
    let part = |x: &MPReal| {
        if x.abs().to_f64() < cutoff {
            MPReal::zero(x.prec()).to_decimal(decimals)
        } else {
            x.to_decimal(decimals)
        }
    };
    let re = part(z.re());
    let im = part(z.im());
    match im.strip_prefix('-') {
        Some(abs) => format!("{re} - {abs}i"),
        None => format!("{re} + {im}i"),
    }
}

pub fn cmd_eval(args: &EvalArgs) -> Outcome {
    let prec = bits_for_digits(args.digits) + 32;
    let tau = match parse_tau(&args.tau, prec) {
        Ok(t) => t,
        Err(e) => return failure(e),
    };
    match eval_j(&tau, args.digits) {
        Ok(j) => Outcome {
            stdout: format_value(&j, args.digits) + "\n",
            stderr: String::new(),
            code: EXIT_OK,
        },
        Err(e) => failure(e),
    }
}

pub fn series_dump(args: &SeriesArgs) -> Result<String> {
    let n = args.terms;
    if n < 1 {
        return Err(Error::Argument("terms must be >= 1".into()));
    }
    if args.kind == SeriesKind::Maass {
        let text = args
            .alpha
            .as_deref()
            .ok_or_else(|| Error::Argument("--alpha is required for --kind maass".into()))?;
        let alpha = parse_alpha(text)?;
        let mc = if args.float {
            let z = alpha.to_mpcomplex(128);
            maass_coefficients_floating(&z, n as usize, FloatPrecision::Auto { y_hat: None })?
        } else {
            maass_coefficients(&alpha, n as usize)?
        };
        return Ok(match mc.to_series() {
            crate::maass::CoefficientSeries::Floating(s) => {
                let mut out = String::new();
                for (e, c) in s.terms() {
                    let _ = writeln!(out, "{e} {}", c.to_sci(args.digits));
                }
                out
            }
            _ => mc.dump(),
        });
    }
    if args.alpha.is_some() {
        return Err(Error::Argument("--alpha only applies to --kind maass".into()));
    }
    let s = match args.kind {
        SeriesKind::J => cached_j_series(n.max(2))?.series().truncate(n)?,
        SeriesKind::E2 => eisenstein(2, n)?,
        SeriesKind::E4 => eisenstein(4, n)?,
        SeriesKind::E6 => eisenstein(6, n)?,
        SeriesKind::Delta => delta(n)?,
        SeriesKind::Maass => unreachable!("handled above"),
    };
    Ok(s.dump())
}

pub fn cmd_series(args: &SeriesArgs) -> Outcome {
    match series_dump(args) {
        Ok(stdout) => Outcome {
            stdout,
            stderr: String::new(),
            code: EXIT_OK,
        },
        Err(e) => failure(e),
    }
}

/// Reports for the two identity checks at the sizes of `level`.
pub fn selftest_reports(level: Level, corrupt: Option<i64>) -> Result<Vec<IdentityReport>> {
    let ((np, nq), (m, mq)) = match level {
        Level::Quick => ((10, 6), (4, 4)),
        Level::Full => ((20, 10), (5, 5)),
    };
    let need = (np.max(nq) * (nq + 2) + 4).max(m * mq + 2);
    let mut table = (*cached_j_series(need)?).clone();
    if let Some(k) = corrupt {
        if k < 1 || k >= table.trunc() {
            return Err(Error::Argument(format!("--corrupt index must be in 1..{}", table.trunc())));
        }
        let bumped = Integer::from(table.c(k)? + 1u32);
        table = table.with_coefficient(k, bumped);
    }
    Ok(vec![
        two_variable_identity_check_with_table(&table, np, nq)?,
        denominator_formula_check_with_table(&table, m, mq)?,
    ])
}

pub fn cmd_selftest(args: &SelftestArgs) -> Outcome {
    match selftest_reports(args.level, args.corrupt) {
        Ok(reports) => {
            let mut stdout = String::new();
            for r in &reports {
                let _ = writeln!(stdout, "{r}");
            }
            let code = if reports.iter().all(IdentityReport::passed) { EXIT_OK } else { EXIT_SELFTEST };
            Outcome {
                stdout,
                stderr: String::new(),
                code,
            }
        }
        Err(e) => failure(e),
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return if e.use_stderr() {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code,
                }
            } else {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code,
                }
            };
        }
    };
    match &cli.command {
        Command::Invert(a) => cmd_invert(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Series(a) => cmd_series(a),
        Command::Selftest(a) => cmd_selftest(a),
    }
}
