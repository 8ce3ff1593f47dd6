//! Fourier coefficients of `H(τ) = -(1/2πi) j'(τ) / (j(τ) - α)`.
//!
//! Both numerator and denominator start with `q^-1` and coefficient 1, so the
//! quotient is an ordinary power series `Σ a(n) q^n` with `a(0) = 1`. The
//! division runs in the exact ring matching α when it can (integers, Gaussian
//! rationals) and in [`MPComplex`] otherwise.
//!
//! Floating precision follows the per-index policy
//! `P(n) = ⌈2π n ŷ / ln 2⌉ + 64 + 32⌈N/1000⌉`: enough bits that `a(n)`, whose
//! size is about `e^(2π n y)`, keeps full accuracy down to unit scale.

use std::f64::consts::{LN_2, PI};

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::mpnum::{mp_log_abs, MPComplex, MPReal, MIN_PREC};
use crate::qseries::{cached_j_series, Coefficient, GaussianRational, IntSeries, JSeries, LaurentSeries};

/// The value whose preimage under `j` is sought.
#[derive(Clone, Debug, PartialEq)]
pub enum Alpha {
    Integer(Integer),
    Gaussian(GaussianRational),
    Float(MPComplex),
}

impl Alpha {
    /// Picks the narrowest exact representation.
    pub fn from_gaussian(g: GaussianRational) -> Self {
        if g.is_real() && *g.re.denom() == 1 {
            Alpha::Integer(g.re.numer().clone())
        } else {
            Alpha::Gaussian(g)
        }
    }

    pub fn from_i64(v: i64) -> Self {
        Alpha::Integer(Integer::from(v))
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Alpha::Float(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Alpha::Integer(v) => v.cmp0().is_eq(),
            Alpha::Gaussian(g) => Coefficient::is_zero(g),
            Alpha::Float(z) => z.is_zero(),
        }
    }

    /// Real up to representation noise: exact zero imaginary part for exact
    /// values, `|Im| <= 2^(16-P)|α|` for floating ones.
    pub fn is_real(&self) -> bool {
        match self {
            Alpha::Integer(_) => true,
            Alpha::Gaussian(g) => g.is_real(),
            Alpha::Float(z) => {
                if z.im().is_zero() {
                    return true;
                }
                let bound = z.abs().mul_pow2(16 - z.prec() as i32);
                z.im().abs() <= bound
            }
        }
    }

    pub fn to_mpcomplex(&self, prec: u32) -> MPComplex {
        match self {
            Alpha::Integer(v) => MPComplex::from_integer(prec, v),
            Alpha::Gaussian(g) => g.to_mpcomplex(prec),
            Alpha::Float(z) => z.with_prec(prec.max(z.prec())),
        }
    }
}

/// Arithmetic the coefficients were computed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    ExactInteger,
    ExactGaussian,
    /// Floating, with the precision used for the last coefficient.
    Floating { precision: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientValues {
    Integer(Vec<Integer>),
    Gaussian(Vec<GaussianRational>),
    Floating(Vec<MPComplex>),
}

/// How floating runs choose precision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FloatPrecision {
    /// Per-index policy with a pilot pass to estimate `ŷ` when none is given;
    /// on detected cancellation the top precision is used for every index.
    Auto { y_hat: Option<f64> },
    /// The same precision for every coefficient.
    Fixed(u32),
}

/// `a(0) .. a(N-1)` for one α.
#[derive(Clone, Debug, PartialEq)]
pub struct MaassCoefficients {
    alpha: Alpha,
    values: CoefficientValues,
    mode: Mode,
}

impl MaassCoefficients {
    pub fn alpha(&self) -> &Alpha {
        &self.alpha
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn values(&self) -> &CoefficientValues {
        &self.values
    }

    /// Number of coefficients, `N`.
    pub fn len(&self) -> usize {
        match &self.values {
            CoefficientValues::Integer(v) => v.len(),
            CoefficientValues::Gaussian(v) => v.len(),
            CoefficientValues::Floating(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_zero(&self, n: usize) -> bool {
        match &self.values {
            CoefficientValues::Integer(v) => Coefficient::is_zero(&v[n]),
            CoefficientValues::Gaussian(v) => Coefficient::is_zero(&v[n]),
            CoefficientValues::Floating(v) => v[n].is_zero(),
        }
    }

    /// `a(n)` rounded to `prec` bits.
    pub fn value(&self, n: usize, prec: u32) -> MPComplex {
        match &self.values {
            CoefficientValues::Integer(v) => MPComplex::from_integer(prec, &v[n]),
            CoefficientValues::Gaussian(v) => v[n].to_mpcomplex(prec),
            CoefficientValues::Floating(v) => v[n].with_prec(prec),
        }
    }

    /// `ln|a(n)|` at `prec` bits, `None` when `a(n) = 0`.
    pub fn log_abs(&self, n: usize, prec: u32) -> Option<MPReal> {
        if self.is_zero(n) {
            return None;
        }
        let v = match &self.values {
            CoefficientValues::Floating(v) => v[n].clone(),
            _ => self.value(n, prec),
        };
        let l = mp_log_abs(&v).expect("nonzero coefficient");
        Some(l.with_prec(prec))
    }

    /// Coefficients as a power series known below `q^N`.
    pub fn to_series(&self) -> CoefficientSeries {
        let n = self.len() as i64;
        match &self.values {
            CoefficientValues::Integer(v) => CoefficientSeries::Integer(LaurentSeries::new(0, v.clone(), n, Integer::new())),
            CoefficientValues::Gaussian(v) => {
                CoefficientSeries::Gaussian(LaurentSeries::new(0, v.clone(), n, GaussianRational::default()))
            }
            CoefficientValues::Floating(v) => {
                let zero = MPComplex::zero(MIN_PREC);
                CoefficientSeries::Floating(LaurentSeries::new(0, v.clone(), n, zero))
            }
        }
    }

    /// Lines `<n> <a(n)>` in the series dump format.
    pub fn dump(&self) -> String {
        match self.to_series() {
            CoefficientSeries::Integer(s) => s.dump(),
            CoefficientSeries::Gaussian(s) => s.dump(),
            CoefficientSeries::Floating(s) => s.dump(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum CoefficientSeries {
    Integer(LaurentSeries<Integer>),
    Gaussian(LaurentSeries<GaussianRational>),
    Floating(LaurentSeries<MPComplex>),
}

/// Per-index floating precision `⌈2π n ŷ / ln 2⌉ + 64 + 32⌈N/1000⌉`.
pub fn precision_policy(index: usize, y_hat: f64, terms: usize) -> u32 {
    let growth = (2.0 * PI * index as f64 * y_hat.max(0.0) / LN_2).ceil() as u32;
    growth + 64 + 32 * terms.div_ceil(1000) as u32
}

/// Coefficients `a(0..terms)` in exact arithmetic if α allows it, floating otherwise.
pub fn maass_coefficients(alpha: &Alpha, terms: usize) -> Result<MaassCoefficients> {
    match alpha {
        Alpha::Float(z) => maass_coefficients_floating(z, terms, FloatPrecision::Auto { y_hat: None }),
        _ => maass_coefficients_exact(alpha, terms),
    }
}

fn check_terms(terms: usize) -> Result<()> {
    if terms < 2 {
        return Err(Error::Argument("need at least 2 coefficients".into()));
    }
    Ok(())
}

/// `j - α` and `-(1/2πi) j'`, both starting at `q^-1`, known below `q^(terms-1)`.
fn exact_parts(terms: usize) -> Result<(IntSeries, IntSeries)> {
    let trunc = terms as i64 - 1;
    let j = cached_j_series(trunc.max(2))?;
    let jt = j.series().truncate(trunc)?;
    let num = jt.neg_q_derivative();
    Ok((jt, num))
}

/// Exact coefficients; α must be an integer or a Gaussian rational.
pub fn maass_coefficients_exact(alpha: &Alpha, terms: usize) -> Result<MaassCoefficients> {
    check_terms(terms)?;
    let (j, num) = exact_parts(terms)?;
    match alpha {
        Alpha::Integer(a) => {
            let den = j.sub(&LaurentSeries::monomial(0, a.clone(), j.trunc()));
            let h = num.div(&den)?;
            let values = dense_from(&h, terms)?;
            Ok(MaassCoefficients {
                alpha: alpha.clone(),
                values: CoefficientValues::Integer(values),
                mode: Mode::ExactInteger,
            })
        }
        Alpha::Gaussian(g) => {
            let zero = GaussianRational::default();
            let lift = |s: &IntSeries| s.map(zero.clone(), |_, c| zero.from_integer_like(c));
            let den = lift(&j).sub(&LaurentSeries::monomial(0, g.clone(), j.trunc()));
            let h = lift(&num).div(&den)?;
            let values = dense_from(&h, terms)?;
            Ok(MaassCoefficients {
                alpha: alpha.clone(),
                values: CoefficientValues::Gaussian(values),
                mode: Mode::ExactGaussian,
            })
        }
        Alpha::Float(_) => Err(Error::Argument("exact mode needs an exactly representable α".into())),
    }
}

fn dense_from<C: Coefficient>(h: &LaurentSeries<C>, terms: usize) -> Result<Vec<C>> {
    if h.low() != 0 {
        return Err(Error::Internal(format!("H starts at q^{} instead of q^0", h.low())));
    }
    (0..terms as i64).map(|n| h.coeff(n).cloned()).collect()
}

/// Floating coefficients for a complex α.
pub fn maass_coefficients_floating(alpha: &MPComplex, terms: usize, precision: FloatPrecision) -> Result<MaassCoefficients> {
    check_terms(terms)?;
    let prec_at: Box<dyn Fn(usize) -> u32> = match precision {
        FloatPrecision::Fixed(p) => Box::new(move |_| p.max(MIN_PREC)),
        FloatPrecision::Auto { y_hat } => {
            let y_hat = match y_hat {
                Some(y) => y,
                None => pilot_y_hat(alpha)?,
            };
            Box::new(move |n| precision_policy(n, y_hat, terms))
        }
    };
    let last = prec_at(terms - 1);
    let values = match floating_division(alpha, terms, &*prec_at) {
        // Cancellation below the natural scale: the early, cheaper indices are
        // the bottleneck, so rerun everything at the top precision.
        Err(Error::Precision { .. }) if matches!(precision, FloatPrecision::Auto { .. }) => {
            floating_division(alpha, terms, &|_| last)?
        }
        other => other?,
    };
    Ok(MaassCoefficients {
        alpha: Alpha::Float(alpha.clone()),
        values: CoefficientValues::Floating(values),
        mode: Mode::Floating { precision: last },
    })
}

/// Cheap pass (`P = 128`, `N = 32`) giving an upper estimate of `y`.
fn pilot_y_hat(alpha: &MPComplex) -> Result<f64> {
    const PILOT_TERMS: usize = 32;
    const PILOT_PREC: u32 = 128;
    let pilot = floating_division(alpha, PILOT_TERMS, &|_| PILOT_PREC)?;
    let mut best: f64 = 0.0;
    for (n, a) in pilot.iter().enumerate().skip(PILOT_TERMS - 8) {
        if a.is_zero() {
            continue;
        }
        let b = mp_log_abs(a)?.to_f64() / (2.0 * PI * n as f64);
        best = best.max(b);
    }
    // b(n) approaches y from above on the unit arc and to within e^(-cn) elsewhere;
    // an undershoot shows up as detected cancellation and a rerun.
    Ok(if best > 0.0 { best * 1.01 + 0.01 } else { 10.0 })
}

/// Long division with the numerator coefficient for `a(n)` seeded at `P(n)` bits.
fn floating_division(alpha: &MPComplex, terms: usize, prec_at: &dyn Fn(usize) -> u32) -> Result<Vec<MPComplex>> {
    let (j, num) = exact_parts(terms)?;
    let zero = MPComplex::zero(MIN_PREC);
    let alpha_prec = alpha.prec();
    // Denominator terms are integers held exactly, except q^0 which carries α.
    let den = j.map(zero.clone(), |e, c| {
        if e == 0 {
            let c744 = MPComplex::from_integer(alpha_prec.max(64), c);
            &c744 - alpha
        } else {
            MPComplex::from_real(MPReal::from_integer_exact(c))
        }
    });
    // Numerator coefficient of q^(n-1) feeds a(n).
    let numer = num.map(zero.clone(), |e, c| MPComplex::from_integer(prec_at((e + 1) as usize), c));
    let h = numer.div(&den)?;
    let values = dense_from(&h, terms)?;
    check_cancellation(&values, &den, &numer)?;
    Ok(values)
}

/// Fails when some `a(n)` sits at the rounding-noise floor of its recurrence
/// step, i.e. within `n` ulps (plus 8 bits of slack) of the largest summand.
fn check_cancellation(values: &[MPComplex], den: &LaurentSeries<MPComplex>, numer: &LaurentSeries<MPComplex>) -> Result<()> {
    let den_exp: Vec<Option<i64>> = (0..values.len() as i64)
        .map(|k| den.coeff(k - 1).ok().and_then(MPComplex::exponent))
        .collect();
    let val_exp: Vec<Option<i64>> = values.iter().map(MPComplex::exponent).collect();
    // Rounding in a(m) reaches every later a(n) at the natural scale, so the
    // working precision of step n is the smallest one used so far.
    let mut precision = u32::MAX;
    for n in 1..values.len() {
        precision = precision.min(values[n].prec());
        let mut largest = numer.coeff(n as i64 - 1).ok().and_then(MPComplex::exponent);
        for k in 1..=n {
            if let (Some(a), Some(b)) = (den_exp[k], val_exp[n - k]) {
                largest = Some(largest.map_or(a + b, |m| m.max(a + b)));
            }
        }
        let Some(largest) = largest else { continue };
        let bits_lost = match val_exp[n] {
            Some(e) => largest - e,
            None => i64::from(precision),
        };
        let floor = i64::from(precision) - 8 - i64::from(usize::BITS - n.leading_zeros());
        if bits_lost >= floor {
            return Err(Error::Precision {
                index: n,
                bits_lost,
                precision,
            });
        }
    }
    Ok(())
}

/// `(n, ln|a(n)|)` for `n >= 1`, with zero coefficients listed separately.
#[derive(Clone, Debug, PartialEq)]
pub struct MagnitudeTrace {
    pub entries: Vec<(usize, MPReal)>,
    pub zero_indices: Vec<usize>,
}

impl MagnitudeTrace {
    /// `b(n) = ln|a(n)| / (2πn)` for every entry.
    pub fn b_values(&self) -> Vec<(usize, MPReal)> {
        self.entries
            .iter()
            .map(|(n, l)| {
                let two_pi_n = MPReal::two_pi(l.prec()) * (*n as i64);
                (*n, l / &two_pi_n)
            })
            .collect()
    }
}

pub fn coefficient_magnitude_trace(mc: &MaassCoefficients, prec: u32) -> MagnitudeTrace {
    let mut entries = Vec::new();
    let mut zero_indices = Vec::new();
    for n in 1..mc.len() {
        match mc.log_abs(n, prec) {
            Some(l) => entries.push((n, l)),
            None => zero_indices.push(n),
        }
    }
    MagnitudeTrace { entries, zero_indices }
}

/// Re-multiplies `(j - α) · H` and compares with `-(1/2πi) j'` in the exact modes.
pub fn verify_exact(mc: &MaassCoefficients, j: &JSeries) -> Result<bool> {
    let terms = mc.len() as i64;
    let jt = j.series().truncate(terms - 1)?;
    let num = jt.neg_q_derivative();
    match (mc.values(), mc.alpha()) {
        (CoefficientValues::Integer(v), Alpha::Integer(a)) => {
            let h = LaurentSeries::new(0, v.clone(), terms, Integer::new());
            let den = jt.sub(&LaurentSeries::monomial(0, a.clone(), jt.trunc()));
            Ok(den.mul(&h).first_mismatch(&num, |x, y| x == y).is_none())
        }
        (CoefficientValues::Gaussian(v), Alpha::Gaussian(g)) => {
            let zero = GaussianRational::default();
            let h = LaurentSeries::new(0, v.clone(), terms, zero.clone());
            let lift = |s: &IntSeries| s.map(zero.clone(), |_, c| zero.from_integer_like(c));
            let den = lift(&jt).sub(&LaurentSeries::monomial(0, g.clone(), jt.trunc()));
            Ok(den.mul(&h).first_mismatch(&lift(&num), |x, y| x == y).is_none())
        }
        _ => Err(Error::Argument("verify_exact needs exact coefficients".into())),
    }
}

/// `re + im·i` from two integers, for fixtures and bindings.
pub fn gaussian(re: i64, im: i64) -> Alpha {
    Alpha::from_gaussian(GaussianRational::new(Rational::from(re), Rational::from(im)))
}
