//! Recovering `z` with `j(z) = α` from the coefficients `a(n)`.
//!
//! The pipeline: coefficients, then `y` from the growth rate of `|a(n)|`, the
//! geometric branch, normalised cosines `c(n) ≈ cos(2πnx)` and their angles
//! `w(n)`, a short list of x-candidates scored by forward evaluation, and an
//! optional Newton polish.

use std::f64::consts::LN_2;
use std::fmt;

use crate::error::{Error, Result};
use crate::forward::{eval_j, eval_j_derivatives, reduce_fundamental};
use crate::maass::{
    coefficient_magnitude_trace, maass_coefficients_exact, maass_coefficients_floating, Alpha, FloatPrecision,
    MaassCoefficients, Mode,
};
use crate::mpnum::{bits_for_digits, mp_exp, MPComplex, MPReal};

/// Precision for logs, cosines and candidate bookkeeping.
pub const ANALYSIS_PREC: u32 = 256;

/// Interior/UnitArc separation for `s(n) = |a(n)| e^(-2πny)`.
pub const BRANCH_DELTA: f64 = 0.1;

/// Order-switch threshold for `|j'|² / (|j - α| |j''|)` in Newton.
pub const MULTIPLICITY_C: f64 = 10.0;

/// Where `z` sits in the fundamental domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchClass {
    /// `|z| > 1`.
    Interior,
    /// `|z| = 1`, `z ≠ ρ`.
    UnitArc,
    /// `α = 0`.
    AlphaZero,
    /// `z = ρ`; only reachable through `AlphaZero`.
    Corner,
}

impl BranchClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchClass::Interior => "interior",
            BranchClass::UnitArc => "unit-arc",
            BranchClass::AlphaZero => "alpha-zero",
            BranchClass::Corner => "corner",
        }
    }
}

impl fmt::Display for BranchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How the trace of `ln|a(n)|` is turned into `y0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YEstimator {
    /// `b(n_max)`.
    Last,
    /// Maximum of `ln|a(n)/2| / (2πn)` over the window, the lim sup on the arc
    /// where `|a(n)| ≈ 2|cos(2πnx)| e^(2πny)`.
    WindowMax,
}

#[derive(Clone, Debug, PartialEq)]
pub struct YEstimate {
    pub y0: MPReal,
    /// Leading decimals shared with the estimate one window earlier.
    pub stable_digits: u32,
    /// Index the estimate was read at.
    pub n: usize,
}

fn b_value(n: usize, log_abs: &MPReal) -> MPReal {
    let two_pi_n = MPReal::two_pi(log_abs.prec()) * (n as i64);
    log_abs / &two_pi_n
}

fn digits_agree(a: &MPReal, b: &MPReal) -> u32 {
    let diff = (a - b).abs();
    if diff.is_zero() {
        return 40;
    }
    let scale = a.abs().max(&b.abs());
    let rel = (&diff / &scale).to_f64();
    if rel >= 1.0 {
        return 0;
    }
    (-rel.log10()).floor().clamp(0.0, 40.0) as u32
}

fn estimate_at(trace: &[(usize, MPReal)], window: usize, estimator: YEstimator) -> Option<(MPReal, usize)> {
    let last = trace.last()?;
    match estimator {
        YEstimator::Last => Some((b_value(last.0, &last.1), last.0)),
        YEstimator::WindowMax => {
            let ln2 = MPReal::from_f64(last.1.prec(), LN_2);
            let ln2 = if last.1.prec() > 53 { MPReal::from_i64(last.1.prec(), 2).ln().unwrap_or(ln2) } else { ln2 };
            trace
                .iter()
                .rev()
                .take(window.max(1))
                .map(|(n, l)| (b_value(*n, &(l - &ln2)), *n))
                .fold(None, |best: Option<(MPReal, usize)>, cur| match best {
                    Some(b) if b.0 >= cur.0 => Some(b),
                    _ => Some(cur),
                })
        }
    }
}

/// `y0` from `(n, ln|a(n)|)` pairs of the nonzero coefficients, in increasing `n`.
pub fn estimate_y(trace: &[(usize, MPReal)], window: usize, estimator: YEstimator) -> Result<YEstimate> {
    if trace.len() < 2 {
        return Err(Error::Argument(
            "fewer than two nonzero coefficients beyond a(0); y cannot be estimated".into(),
        ));
    }
    let (y0, n) = estimate_at(trace, window, estimator).expect("nonempty");
    let n_max = trace.last().expect("nonempty").0;
    let cut = n_max.saturating_sub(window.max(1));
    let earlier: Vec<(usize, MPReal)> = trace.iter().filter(|(k, _)| *k <= cut).cloned().collect();
    let stable_digits = match estimate_at(&earlier, window, estimator) {
        Some((prev, _)) => digits_agree(&y0, &prev),
        None => 0,
    };
    Ok(YEstimate { y0, stable_digits, n })
}

/// Branch decision with its evidence.
#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub branch: BranchClass,
    pub low_confidence: bool,
    /// `(n, s(n))` over the last window.
    pub s_values: Vec<(usize, f64)>,
    /// Slope estimate of `y` used for `s(n)`.
    pub y_slope: f64,
}

/// Interior if every `s(n)` is within `δ` of 1, UnitArc otherwise.
///
/// `s(n)` is normalised with the slope of `ln|a(n)|` across the window, which
/// ignores a constant amplitude (2 on the arc).
pub fn classify_branch(alpha: &Alpha, trace: &[(usize, MPReal)], window: usize) -> Classification {
    let plain = |branch| Classification {
        branch,
        low_confidence: false,
        s_values: Vec::new(),
        y_slope: f64::NAN,
    };
    if alpha.is_zero() {
        return plain(BranchClass::AlphaZero);
    }
    let w = window.max(1);
    if trace.len() < w + 1 {
        let mut c = plain(if alpha.is_real() { BranchClass::UnitArc } else { BranchClass::Interior });
        c.low_confidence = alpha.is_real();
        return c;
    }
    let (n1, l1) = &trace[trace.len() - 1];
    let (n0, l0) = &trace[trace.len() - 1 - w];
    let two_pi = MPReal::two_pi(l1.prec());
    let y_slope = &(l1 - l0) / &(two_pi * ((n1 - n0) as i64));
    let s_values: Vec<(usize, f64)> = trace[trace.len() - w..]
        .iter()
        .map(|(n, l)| {
            let e = l - &(&MPReal::two_pi(l.prec()) * &(&y_slope * (*n as i64)));
            (*n, e.to_f64().exp())
        })
        .collect();
    let y_slope = y_slope.to_f64();
    if !alpha.is_real() {
        return Classification {
            branch: BranchClass::Interior,
            low_confidence: false,
            s_values,
            y_slope,
        };
    }
    let interior = s_values.iter().all(|(_, s)| (s - 1.0).abs() <= BRANCH_DELTA);
    let arc_like = s_values.iter().all(|(_, s)| *s <= 2.0 + BRANCH_DELTA);
    let (branch, low_confidence) = match (interior, arc_like) {
        (true, _) => (BranchClass::Interior, false),
        (false, true) => (BranchClass::UnitArc, false),
        (false, false) => (BranchClass::UnitArc, true),
    };
    Classification {
        branch,
        low_confidence,
        s_values,
        y_slope,
    }
}

/// One normalised cosine: the raw value and the angle after clamping into `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CosineSample {
    pub n: usize,
    pub raw: MPReal,
    pub w: MPReal,
}

impl CosineSample {
    pub fn clamped(&self) -> MPReal {
        self.w.cos()
    }

    /// Fit for use in x-recovery: `|c(n)| <= 1 + δ`.
    pub fn usable(&self) -> bool {
        self.raw.abs().to_f64() <= 1.0 + BRANCH_DELTA
    }
}

/// `c(n) = Re(a(n)) e^(-2πny0)`, halved on the unit arc, with `w(n) = arccos c(n)`.
pub fn normalized_cosines(
    a: &MaassCoefficients,
    y0: &MPReal,
    branch: BranchClass,
    indices: &[usize],
) -> Result<Vec<CosineSample>> {
    let prec = y0.prec().max(ANALYSIS_PREC);
    let two_pi = MPReal::two_pi(prec);
    let mut out = Vec::with_capacity(indices.len());
    for &n in indices {
        if n >= a.len() {
            return Err(Error::Argument(format!("a({n}) not computed; only {} coefficients", a.len())));
        }
        let scale = mp_exp(&-(&two_pi * &(y0 * (n as i64))), prec)?;
        let mut raw = a.value(n, prec).re() * &scale;
        if branch == BranchClass::UnitArc {
            raw = raw.mul_pow2(-1);
        }
        let w = raw.acos_clamped();
        out.push(CosineSample { n, raw, w });
    }
    Ok(out)
}

fn reduce_x(x: MPReal) -> MPReal {
    // Into [-1/2, 1/2), so that +1/2 becomes -1/2.
    let shifted = &x + 0.5;
    let k = shifted.floor_to_integer().unwrap_or_default();
    let r = &x - &MPReal::from_integer(x.prec(), &k);
    if r >= 0.5 {
        r - 1i64
    } else {
        r
    }
}

/// The six values `±(w_n ± w_prev)/2π` and `±(w_n + w_prev - 2π)/2π`, reduced
/// into `[-1/2, 1/2]` and deduplicated within `10^-3`.
pub fn x_candidates(w_n: &MPReal, w_prev: &MPReal) -> Vec<MPReal> {
    let prec = w_n.prec().max(w_prev.prec());
    let two_pi = MPReal::two_pi(prec);
    let sum = w_n + w_prev;
    let diff = w_n - w_prev;
    let wrap = &sum - &two_pi;
    let raw = [
        -(&sum / &two_pi),
        &sum / &two_pi,
        -(&diff / &two_pi),
        &diff / &two_pi,
        -(&wrap / &two_pi),
        &wrap / &two_pi,
    ];
    let mut out: Vec<MPReal> = Vec::new();
    for x in raw {
        let x = reduce_x(x);
        let near = |y: &MPReal| {
            let d = (&x - y).abs().to_f64();
            d < 1e-3 || (1.0 - d).abs() < 1e-3
        };
        if !out.iter().any(near) {
            out.push(x);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Disambiguation {
    pub best: MPReal,
    /// `(x, |j(x + i y0) - α|)` per candidate, in input order.
    pub scores: Vec<(MPReal, MPReal)>,
    pub ambiguous: bool,
}

/// Scores each candidate by the forward residual at `x + i y0`.
pub fn disambiguate(candidates: &[MPReal], y0: &MPReal, alpha: &MPComplex, digits: u32) -> Result<Disambiguation> {
    if candidates.is_empty() {
        return Err(Error::Argument("no x-candidates to score".into()));
    }
    let mut scores = Vec::with_capacity(candidates.len());
    for x in candidates {
        let tau = MPComplex::new(x.clone(), y0.clone());
        let j = eval_j(&tau, digits)?;
        scores.push((x.clone(), (&j - &alpha.with_prec(j.prec())).abs()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].1.partial_cmp(&scores[b].1).unwrap_or(std::cmp::Ordering::Equal));
    let best = scores[order[0]].0.clone();
    let ambiguous = order.len() > 1 && {
        let r1 = scores[order[0]].1.to_f64();
        let r2 = scores[order[1]].1.to_f64();
        let large = 0.1 * alpha.abs().to_f64() + 1.0;
        r1 > 0.5 * r2 && r1 > large && r2 > large
    };
    Ok(Disambiguation { best, scores, ambiguous })
}

#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    pub z: MPComplex,
    pub residual: MPReal,
    pub iterations: usize,
    pub converged: bool,
    /// Largest step multiplier used (1, 2 or 3).
    pub max_multiplicity: u32,
}

fn newton_digits(tol: f64) -> u32 {
    let d = (-tol.log10()).ceil().max(1.0) as u32;
    2 * d + 10
}

fn multiplicity_for(z: &MPComplex) -> u32 {
    let prec = z.prec();
    let i = MPComplex::i(prec);
    let half_sqrt3 = MPReal::from_i64(prec, 3).sqrt().expect("positive").mul_pow2(-1);
    let d_i = (z - &i).abs().to_f64();
    let d_rho = [-0.5, 0.5]
        .iter()
        .map(|&x| (z - &MPComplex::new(MPReal::from_f64(prec, x), half_sqrt3.clone())).abs().to_f64())
        .fold(f64::INFINITY, f64::min);
    if d_i <= d_rho {
        2
    } else {
        3
    }
}

/// Newton's method for `j(z) = α`, switching to the step `m (j - α)/j'` near the
/// critical points `i` (m = 2) and `ρ` (m = 3).
pub fn refine_newton(z0: &MPComplex, alpha: &MPComplex, tol: f64, max_iter: usize) -> Result<NewtonOutcome> {
    if z0.im().is_sign_negative() || z0.im().is_zero() {
        return Err(Error::Domain("Newton start must have Im(z) > 0".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument("tol must be positive".into()));
    }
    let digits = newton_digits(tol);
    let prec = bits_for_digits(digits) + 48;
    let alpha = alpha.with_prec(prec.max(alpha.prec()));
    let target = tol * (1.0 + alpha.abs().to_f64());
    let mut z = reduce_fundamental(&z0.with_prec(prec))?.tau;
    let mut d = eval_j_derivatives(&z, digits)?;
    let mut best: Option<(MPComplex, MPReal)> = None;
    let mut max_multiplicity = 1;
    let mut small_step = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let f = &d.j - &alpha;
        let r = f.abs();
        if best.as_ref().map_or(true, |(_, b)| r < *b) {
            best = Some((z.clone(), r.clone()));
        }
        if r.is_zero() || (small_step && r.to_f64() <= target) || d.dj.is_zero() {
            break;
        }
        iterations += 1;
        let ratio = d.dj.norm_sqr().to_f64() / (r.to_f64() * d.d2j.abs().to_f64());
        let m = if ratio < MULTIPLICITY_C { multiplicity_for(&z) } else { 1 };
        // Near a split multiple root the order-matched step can cycle, so it
        // is kept only when it lowers the residual; otherwise plain Newton.
        let orders: &[u32] = if m > 1 { &[m, 1] } else { &[1] };
        let newton = f.checked_div(&d.dj)?;
        for (k, &order) in orders.iter().enumerate() {
            let mut step = newton.mul_i64(i64::from(order));
            let mut next = &z - &step;
            while next.im().is_sign_negative() || next.im().is_zero() {
                step = step.scale(&MPReal::from_f64(prec, 0.5));
                next = &z - &step;
            }
            let next = reduce_fundamental(&next)?.tau;
            let dn = eval_j_derivatives(&next, digits)?;
            let rn = (&dn.j - &alpha).abs();
            if rn < r || k + 1 == orders.len() {
                max_multiplicity = max_multiplicity.max(order);
                small_step = step.abs().to_f64() <= tol * next.abs().to_f64().max(1.0);
                z = next;
                d = dn;
                break;
            }
        }
    }
    if iterations == max_iter {
        let r = (&d.j - &alpha).abs();
        if best.as_ref().map_or(true, |(_, b)| r < *b) {
            best = Some((z.clone(), r));
        }
    }
    let (z, residual) = best.expect("at least one evaluation");
    let z = canonicalize_boundary(z, boundary_eps(tol))?;
    let converged = residual.to_f64() <= target;
    Ok(NewtonOutcome {
        z,
        residual,
        iterations,
        converged,
        max_multiplicity,
    })
}

/// Tuning for [`invert_j`].
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    /// Initial number of coefficients `N`.
    pub terms: usize,
    /// Ceiling for automatic doubling of `N`.
    pub max_terms: usize,
    /// Fixed floating precision; `None` uses the per-index policy.
    pub precision_bits: Option<u32>,
    /// Relative residual target `|j(z) - α| <= tol (1 + |α|)`.
    pub tol: f64,
    pub refine: bool,
    /// Window `W` for the y-estimate and branch tests.
    pub window: usize,
    /// Stable digits of `y0` required before `N` stops doubling.
    pub digits: u32,
    pub max_iter: usize,
    /// Force floating arithmetic even for exact α.
    pub force_float: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            terms: 128,
            max_terms: 4096,
            precision_bits: None,
            tol: 1e-20,
            refine: true,
            window: 5,
            digits: 4,
            max_iter: 100,
            force_float: false,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.terms < 8 {
            return Err(Error::Argument(format!("terms must be >= 8, got {}", self.terms)));
        }
        if self.max_terms < self.terms {
            return Err(Error::Argument("max_terms must be >= terms".into()));
        }
        if let Some(p) = self.precision_bits {
            if p < 64 {
                return Err(Error::Argument(format!("precision_bits must be >= 64, got {p}")));
            }
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::Argument("tol must be a positive number".into()));
        }
        if self.window == 0 || self.window + 2 > self.terms {
            return Err(Error::Argument("window must be in 1..=terms-2".into()));
        }
        Ok(())
    }
}

/// Everything the inversion produced, including its intermediate evidence.
#[derive(Clone, Debug)]
pub struct InversionResult {
    pub alpha: MPComplex,
    /// Reduced representative with `j(z) ≈ α`.
    pub z: MPComplex,
    /// `|j(z) - α|` from forward evaluation.
    pub residual: MPReal,
    pub branch: BranchClass,
    pub low_confidence: bool,
    pub y0: MPReal,
    pub stable_digits: u32,
    /// Tail of `(n, b(n))`.
    pub y_trace: Vec<(usize, MPReal)>,
    pub cosines: Vec<CosineSample>,
    /// `(x, residual at x + i y0)`.
    pub candidates: Vec<(MPReal, MPReal)>,
    /// `(n, n - 1)` feeding the x-candidates.
    pub n_used: (usize, usize),
    pub terms_used: usize,
    pub precision_bits: u32,
    pub mode: Option<Mode>,
    pub pre_refinement: MPComplex,
    pub refined: bool,
    pub converged: bool,
    pub ambiguous: bool,
    pub newton_iterations: usize,
}

impl InversionResult {
    /// Meets `tol` without ambiguity.
    pub fn succeeded(&self, tol: f64) -> bool {
        !self.ambiguous && self.residual.to_f64() <= tol * (1.0 + self.alpha.abs().to_f64())
    }
}

fn coefficients(alpha: &Alpha, terms: usize, config: &Config) -> Result<MaassCoefficients> {
    match alpha {
        Alpha::Float(z) => maass_coefficients_floating(z, terms, float_precision(config)),
        _ if config.force_float => {
            let z = alpha.to_mpcomplex(ANALYSIS_PREC);
            maass_coefficients_floating(&z, terms, float_precision(config))
        }
        _ => maass_coefficients_exact(alpha, terms),
    }
}

fn float_precision(config: &Config) -> FloatPrecision {
    match config.precision_bits {
        Some(p) => FloatPrecision::Fixed(p),
        None => FloatPrecision::Auto { y_hat: None },
    }
}

/// Distance from the boundary below which a converged point is treated as on it.
fn boundary_eps(tol: f64) -> f64 {
    0.1 * tol.sqrt()
}

/// Maps `Re z ≈ 1/2` to `-1/2` and arc points with `Re z > 0` to `Re z < 0`,
/// with tolerance `eps`.
fn canonicalize_boundary(z: MPComplex, eps: f64) -> Result<MPComplex> {
    let mut z = z;
    if (z.re().to_f64() - 0.5).abs() <= eps {
        z = MPComplex::new(z.re() - 1i64, z.im().clone());
    }
    if (z.norm_sqr().to_f64() - 1.0).abs() <= eps && z.re().to_f64() > eps {
        let prec = z.prec();
        z = MPComplex::from_f64(prec, -1.0, 0.0).checked_div(&z)?;
    }
    Ok(z)
}

struct Attempt {
    candidates: Vec<(MPReal, MPReal)>,
    cosines: Vec<CosineSample>,
    n_used: (usize, usize),
    pre: MPComplex,
    ambiguous: bool,
    outcome: Option<NewtonOutcome>,
}

fn usable_pair(samples: &[CosineSample]) -> Option<(usize, usize)> {
    // samples are in decreasing n.
    samples
        .windows(2)
        .position(|w| w[0].n == w[1].n + 1 && w[0].usable() && w[1].usable())
        .map(|i| (i, i + 1))
}

fn attempt(
    a: &MaassCoefficients,
    y0: &MPReal,
    branch: BranchClass,
    alpha: &MPComplex,
    config: &Config,
) -> Result<Attempt> {
    let n_max = a.len() - 1;
    let lookback = (4 * config.window).min(n_max - 1);
    let indices: Vec<usize> = (n_max - lookback..=n_max).rev().filter(|&n| n >= 1 && !a.is_zero(n)).collect();
    let cosines = normalized_cosines(a, y0, branch, &indices)?;
    let (i, k) = usable_pair(&cosines).unwrap_or((0, 1.min(cosines.len().saturating_sub(1))));
    if cosines.len() < 2 {
        return Err(Error::Argument("not enough nonzero coefficients for x-recovery".into()));
    }
    let cands = x_candidates(&cosines[i].w, &cosines[k].w);
    let dis = disambiguate(&cands, y0, alpha, 20)?;
    let pre = canonicalize_boundary(MPComplex::new(dis.best.clone(), y0.clone()), 1e-6)?;
    let outcome = if config.refine {
        Some(refine_newton(&pre, alpha, config.tol, config.max_iter)?)
    } else {
        None
    };
    Ok(Attempt {
        candidates: dis.scores,
        cosines,
        n_used: (indices[i], indices[k]),
        pre,
        ambiguous: dis.ambiguous,
        outcome,
    })
}

fn other_branch(b: BranchClass) -> BranchClass {
    match b {
        BranchClass::Interior => BranchClass::UnitArc,
        _ => BranchClass::Interior,
    }
}

fn rho(prec: u32) -> MPComplex {
    let y = MPReal::from_i64(prec, 3).sqrt().expect("positive").mul_pow2(-1);
    MPComplex::new(MPReal::from_f64(prec, -0.5), y)
}

/// Inverts `j` at `α`: returns the fundamental-domain point `z` with `j(z) = α`.
pub fn invert_j(alpha: &Alpha, config: &Config) -> Result<InversionResult> {
    config.validate()?;
    let digits = newton_digits(config.tol);
    let work = bits_for_digits(digits) + 48;
    let alpha_c = alpha.to_mpcomplex(work);

    if alpha.is_zero() {
        let z = rho(work);
        let residual = eval_j(&z, digits)?.abs();
        return Ok(InversionResult {
            alpha: alpha_c,
            z: z.clone(),
            residual: residual.clone(),
            branch: BranchClass::AlphaZero,
            low_confidence: false,
            y0: z.im().clone(),
            stable_digits: 40,
            y_trace: Vec::new(),
            cosines: Vec::new(),
            candidates: vec![(z.re().clone(), residual)],
            n_used: (0, 0),
            terms_used: 0,
            precision_bits: work,
            mode: None,
            pre_refinement: z,
            refined: false,
            converged: true,
            ambiguous: false,
            newton_iterations: 0,
        });
    }

    let mut terms = config.terms;
    let (a, trace, class, est) = loop {
        let a = coefficients(alpha, terms, config)?;
        let trace = coefficient_magnitude_trace(&a, ANALYSIS_PREC).entries;
        let class = classify_branch(alpha, &trace, config.window);
        let estimator = match class.branch {
            BranchClass::UnitArc => YEstimator::WindowMax,
            _ => YEstimator::Last,
        };
        let est = estimate_y(&trace, config.window, estimator)?;
        if est.stable_digits >= config.digits || terms * 2 > config.max_terms {
            break (a, trace, class, est);
        }
        terms *= 2;
    };

    let mut best = attempt(&a, &est.y0, class.branch, &alpha_c, config)?;
    let mut branch = class.branch;
    let mut y0 = est.y0.clone();
    let failed = |t: &Attempt| match &t.outcome {
        Some(o) => !o.converged,
        None => t.ambiguous,
    };
    if failed(&best) && alpha.is_real() {
        let alt = other_branch(branch);
        let estimator = if alt == BranchClass::UnitArc { YEstimator::WindowMax } else { YEstimator::Last };
        let alt_est = estimate_y(&trace, config.window, estimator)?;
        let retry = attempt(&a, &alt_est.y0, alt, &alpha_c, config)?;
        let better = match (&retry.outcome, &best.outcome) {
            (Some(r), Some(b)) => r.residual < b.residual,
            _ => !retry.ambiguous,
        };
        if better {
            best = retry;
            branch = alt;
            y0 = alt_est.y0;
        }
    }

    let (z, refined, converged, iterations) = match &best.outcome {
        Some(o) => (o.z.clone(), true, o.converged, o.iterations),
        None => (reduce_fundamental(&best.pre.with_prec(work))?.tau, false, false, 0),
    };
    let z = canonicalize_boundary(z, boundary_eps(config.tol))?;
    let residual = (&eval_j(&z, digits)? - &alpha_c).abs();
    let converged = if refined {
        converged
    } else {
        residual.to_f64() <= config.tol * (1.0 + alpha_c.abs().to_f64())
    };
    let tail = trace.len().saturating_sub(4 * config.window);
    let y_trace = trace[tail..].iter().map(|(n, l)| (*n, b_value(*n, l))).collect();
    let precision_bits = match a.mode() {
        Mode::Floating { precision } => precision,
        _ => z.prec(),
    };
    Ok(InversionResult {
        alpha: alpha_c,
        z,
        residual,
        branch,
        low_confidence: class.low_confidence,
        y0,
        stable_digits: est.stable_digits,
        y_trace,
        cosines: best.cosines,
        candidates: best.candidates,
        n_used: best.n_used,
        terms_used: a.len(),
        precision_bits,
        mode: Some(a.mode()),
        pre_refinement: best.pre,
        refined,
        converged,
        ambiguous: best.ambiguous,
        newton_iterations: iterations,
    })
}
