//! Python bindings: `invert`, `eval_j`, `maass_coefficients`, `series`, `selftest`.

use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyComplex;

use jinv::cli::{self, InvertArgs, InvertReport, Level, SeriesArgs, SeriesKind};
use jinv::inverter::invert_j;
use jinv::mpnum::bits_for_digits;
use jinv::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Parse(_) | Error::Argument(_) | Error::Domain(_) => PyValueError::new_err(e.to_string()),
        Error::Precision { .. } | Error::Range(_) | Error::Truncated { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A number given either as a decimal string or a Python float.
#[derive(FromPyObject)]
enum Decimal {
    Text(String),
    Float(f64),
}

impl Decimal {
    fn text(&self) -> String {
        match self {
            Decimal::Text(s) => s.clone(),
            Decimal::Float(f) => format!("{f:?}"),
        }
    }
}

/// Result of `invert`; coordinates are decimal strings at the requested digits.
#[pyclass(frozen, get_all, module = "pyjinv")]
struct Inversion {
    x: String,
    y: String,
    residual: f64,
    branch: String,
    converged: bool,
    refined: bool,
    ambiguous: bool,
    succeeded: bool,
    terms_used: usize,
    precision_bits: u32,
    b_trace: Vec<(usize, f64)>,
    candidates: Vec<(f64, f64)>,
    json: String,
}

#[pymethods]
impl Inversion {
    /// `z` as a Python complex (double precision).
    #[getter]
    fn z<'py>(&self, py: Python<'py>) -> Bound<'py, PyComplex> {
        let x = self.x.parse().unwrap_or(f64::NAN);
        let y = self.y.parse().unwrap_or(f64::NAN);
        PyComplex::from_doubles(py, x, y)
    }

    fn __repr__(&self) -> String {
        format!(
            "Inversion(z={} + {}i, residual={:e}, branch={:?}, converged={})",
            self.x,
            self.y,
            self.residual,
            self.branch,
            if self.converged { "True" } else { "False" }
        )
    }
}

#[pyfunction]
#[pyo3(signature = (alpha, *, terms=None, max_terms=None, tol=None, refine=true, window=None,
                    stable_digits=None, precision_bits=None, float=false, digits=25))]
#[allow(clippy::too_many_arguments)]
fn invert(
    alpha: &str,
    terms: Option<usize>,
    max_terms: Option<usize>,
    tol: Option<f64>,
    refine: bool,
    window: Option<usize>,
    stable_digits: Option<u32>,
    precision_bits: Option<u32>,
    float: bool,
    digits: usize,
) -> PyResult<Inversion> {
    let args = InvertArgs {
        alpha: alpha.to_string(),
        terms,
        max_terms,
        precision_bits,
        tol,
        no_refine: !refine,
        window,
        stable_digits,
        digits: Some(digits),
        float,
        ..InvertArgs::default()
    };
    let settings = cli::invert_settings(&args).map_err(to_py)?;
    let a = cli::parse_alpha(alpha).map_err(to_py)?;
    let r = invert_j(&a, &settings.config).map_err(to_py)?;
    let report = InvertReport::from_result(&r, digits);
    Ok(Inversion {
        x: report.z.x.to_string(),
        y: report.z.y.to_string(),
        residual: r.residual.to_f64(),
        branch: report.branch.clone(),
        converged: r.converged,
        refined: r.refined,
        ambiguous: r.ambiguous,
        succeeded: r.succeeded(settings.config.tol),
        terms_used: r.terms_used,
        precision_bits: r.precision_bits,
        b_trace: report.b_trace.iter().map(|(n, b)| (*n, b.as_f64().unwrap_or(f64::NAN))).collect(),
        candidates: report
            .candidates
            .iter()
            .map(|(x, s)| (x.as_f64().unwrap_or(f64::NAN), s.as_f64().unwrap_or(f64::NAN)))
            .collect(),
        json: report.to_json(),
    })
}

/// `j(τ)` as `(re, im)` decimal strings with `digits` significant digits.
#[pyfunction]
#[pyo3(signature = (re, im, digits=30))]
fn eval_j(re: Decimal, im: Decimal, digits: u32) -> PyResult<(String, String)> {
    let tau = cli::parse_tau(&format!("{},{}", re.text(), im.text()), bits_for_digits(digits) + 32).map_err(to_py)?;
    let j = jinv::forward::eval_j(&tau, digits).map_err(to_py)?;
    Ok((j.re().to_sci(digits as usize), j.im().to_sci(digits as usize)))
}

fn dump_pairs(text: &str) -> Vec<(i64, String)> {
    text.lines()
        .filter_map(|l| {
            let (e, c) = l.split_once(' ')?;
            Some((e.parse().ok()?, c.to_string()))
        })
        .collect()
}

/// `(exponent, coefficient)` pairs of a q-expansion, coefficients as strings.
#[pyfunction]
#[pyo3(signature = (kind, terms, alpha=None, float=false, digits=30))]
fn series(kind: &str, terms: i64, alpha: Option<String>, float: bool, digits: usize) -> PyResult<Vec<(i64, String)>> {
    let kind: SeriesKind = kind.parse().map_err(to_py)?;
    let args = SeriesArgs {
        kind,
        terms,
        alpha,
        float,
        digits,
    };
    Ok(dump_pairs(&cli::series_dump(&args).map_err(to_py)?))
}

/// `a(0) .. a(terms - 1)` of the Maass form attached to α, as strings.
#[pyfunction]
#[pyo3(signature = (alpha, terms, float=false))]
fn maass_coefficients(alpha: &str, terms: usize, float: bool) -> PyResult<Vec<String>> {
    let a = cli::parse_alpha(alpha).map_err(to_py)?;
    let mc = if float {
        let z = a.to_mpcomplex(128);
        jinv::maass::maass_coefficients_floating(&z, terms, jinv::maass::FloatPrecision::Auto { y_hat: None })
    } else {
        jinv::maass::maass_coefficients(&a, terms)
    }
    .map_err(to_py)?;
    Ok(dump_pairs(&mc.dump()).into_iter().map(|(_, c)| c).collect())
}

/// `(name, passed, report)` for each identity check.
#[pyfunction]
#[pyo3(signature = (level="quick", corrupt=None))]
fn selftest(level: &str, corrupt: Option<i64>) -> PyResult<Vec<(String, bool, String)>> {
    let level: Level = level.parse().map_err(to_py)?;
    let reports = cli::selftest_reports(level, corrupt).map_err(to_py)?;
    Ok(reports
        .into_iter()
        .map(|r| (r.name.to_string(), r.passed(), r.to_string()))
        .collect())
}

#[pymodule]
fn pyjinv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Inversion>()?;
    m.add_function(wrap_pyfunction!(invert, m)?)?;
    m.add_function(wrap_pyfunction!(eval_j, m)?)?;
    m.add_function(wrap_pyfunction!(series, m)?)?;
    m.add_function(wrap_pyfunction!(maass_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
