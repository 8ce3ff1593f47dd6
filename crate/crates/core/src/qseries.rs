//! Truncated Laurent series in `q` and the classical q-expansions.
//!
//! A [`LaurentSeries`] stores the coefficients of `q^low .. q^(trunc-1)`;
//! everything from `q^trunc` on is unknown. Asking for a coefficient there is
//! an error rather than a silent zero. Coefficients live in any
//! [`Coefficient`] ring: exact integers, exact Gaussian rationals,
//! [`MPComplex`], or another Laurent series (two-variable expansions).
//!
//! Eisenstein series use the normalisation with constant term 1:
//!
//! ```text
//! E2 = 1 - 24 Σ σ1(n) q^n,   E4 = 1 + 240 Σ σ3(n) q^n,   E6 = 1 - 504 Σ σ5(n) q^n
//! Δ  = (E4^3 - E6^2) / 1728,  j = E4^3 / Δ
//! ```

use std::fmt;
use std::ops::Neg;
use std::sync::{Arc, OnceLock, RwLock};

use rug::ops::Pow;
use rug::{Assign, Integer, Rational};

use crate::error::{Error, Result};
use crate::mpnum::MPComplex;

/// Ring operations needed by the series machinery.
///
/// `zero_like` and `from_integer_like` take `self` as a prototype so that
/// context-carrying rings (floating precision, inner truncation order) can
/// produce elements of the right shape.
pub trait Coefficient: Clone + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn from_integer_like(&self, v: &Integer) -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign_ref(&mut self, rhs: &Self);
    fn sub_assign_ref(&mut self, rhs: &Self);
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn mul_i64(&self, k: i64) -> Self;
    /// Exact quotient `self / rhs`, or `None` when it does not exist in the ring.
    fn checked_div(&self, rhs: &Self) -> Option<Self>;

    /// `self -= a * b`.
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        let p = a.mul_ref(b);
        self.sub_assign_ref(&p);
    }

    /// `self += a * b`.
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        let p = a.mul_ref(b);
        self.add_assign_ref(&p);
    }

    /// Coefficient text for the series dump format.
    fn dump(&self) -> String;
}

impl Coefficient for Integer {
    fn zero_like(&self) -> Self {
        Integer::new()
    }
    fn from_integer_like(&self, v: &Integer) -> Self {
        v.clone()
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == std::cmp::Ordering::Equal
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_assign_ref(&mut self, rhs: &Self) {
        *self -= rhs;
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        Integer::from(self * rhs)
    }
    fn neg_ref(&self) -> Self {
        Integer::from(-self)
    }
    fn mul_i64(&self, k: i64) -> Self {
        Integer::from(self * k)
    }
    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if Coefficient::is_zero(rhs) {
            return None;
        }
        let (q, r) = Integer::from(self).div_rem(rhs.clone());
        Coefficient::is_zero(&r).then_some(q)
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        // mpz_submul, no temporary
        *self -= a * b;
    }
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn dump(&self) -> String {
        self.to_string()
    }
}

/// Exact `re + im·i` with rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussianRational { re, im }
    }

    pub fn from_integers(re: i64, im: i64) -> Self {
        GaussianRational {
            re: Rational::from(re),
            im: Rational::from(im),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.cmp0() == std::cmp::Ordering::Equal
    }

    /// Both parts are integers.
    pub fn is_gaussian_integer(&self) -> bool {
        *self.re.denom() == 1 && *self.im.denom() == 1
    }

    pub fn to_mpcomplex(&self, prec: u32) -> MPComplex {
        use crate::mpnum::MPReal;
        MPComplex::new(
            MPReal::from_rational(prec, &self.re),
            MPReal::from_rational(prec, &self.im),
        )
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Coefficient::dump(self))
    }
}

impl Coefficient for GaussianRational {
    fn zero_like(&self) -> Self {
        GaussianRational::default()
    }
    fn from_integer_like(&self, v: &Integer) -> Self {
        GaussianRational {
            re: Rational::from(v),
            im: Rational::new(),
        }
    }
    fn is_zero(&self) -> bool {
        self.re.cmp0() == std::cmp::Ordering::Equal && self.im.cmp0() == std::cmp::Ordering::Equal
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
    fn sub_assign_ref(&mut self, rhs: &Self) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        let re = Rational::from(&self.re * &rhs.re) - Rational::from(&self.im * &rhs.im);
        let im = Rational::from(&self.re * &rhs.im) + Rational::from(&self.im * &rhs.re);
        GaussianRational { re, im }
    }
    fn neg_ref(&self) -> Self {
        GaussianRational {
            re: Rational::from(-&self.re),
            im: Rational::from(-&self.im),
        }
    }
    fn mul_i64(&self, k: i64) -> Self {
        GaussianRational {
            re: Rational::from(&self.re * k),
            im: Rational::from(&self.im * k),
        }
    }
    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            return None;
        }
        let den = Rational::from(rhs.re.square_ref()) + Rational::from(rhs.im.square_ref());
        let conj = GaussianRational {
            re: rhs.re.clone(),
            im: Rational::from(-&rhs.im),
        };
        let num = self.mul_ref(&conj);
        Some(GaussianRational {
            re: num.re / &den,
            im: num.im / &den,
        })
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        let mut t = Rational::new();
        t.assign(&a.re * &b.re);
        self.re -= &t;
        t.assign(&a.im * &b.im);
        self.re += &t;
        t.assign(&a.re * &b.im);
        self.im -= &t;
        t.assign(&a.im * &b.re);
        self.im -= &t;
    }
    fn dump(&self) -> String {
        let im = self.im.to_string();
        if im.starts_with('-') {
            format!("{}{}i", self.re, im)
        } else {
            format!("{}+{}i", self.re, im)
        }
    }
}

impl Coefficient for MPComplex {
    fn zero_like(&self) -> Self {
        MPComplex::zero(self.prec())
    }
    fn from_integer_like(&self, v: &Integer) -> Self {
        MPComplex::from_integer(self.prec(), v)
    }
    fn is_zero(&self) -> bool {
        MPComplex::is_zero(self)
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self = MPComplex::new(self.re() + rhs.re(), self.im() + rhs.im()).with_prec(self.prec());
    }
    fn sub_assign_ref(&mut self, rhs: &Self) {
        *self = MPComplex::new(self.re() - rhs.re(), self.im() - rhs.im()).with_prec(self.prec());
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn mul_i64(&self, k: i64) -> Self {
        MPComplex::mul_i64(self, k)
    }
    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        MPComplex::checked_div(self, rhs).ok()
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        MPComplex::sub_mul_assign(self, a, b);
    }
    fn add_mul_assign(&mut self, a: &Self, b: &Self) {
        MPComplex::add_mul_assign(self, a, b);
    }
    fn dump(&self) -> String {
        let digits = (f64::from(self.prec()) * std::f64::consts::LOG10_2).floor() as usize;
        self.to_sci(digits)
    }
}

/// Truncated Laurent series `Σ_{k = low}^{trunc-1} c_k q^k + O(q^trunc)`.
///
/// The coefficient vector is dense over `low..trunc`. Unless the series is
/// zero to its truncation order, the coefficient at `low` is nonzero.
#[derive(Clone, Debug)]
pub struct LaurentSeries<C> {
    low: i64,
    coeffs: Vec<C>,
    trunc: i64,
    zero: C,
}

impl<C: Coefficient> LaurentSeries<C> {
    /// Series with coefficients `coeffs[i]` at `q^(low + i)`, known below `q^trunc`.
    ///
    /// Missing coefficients up to `trunc` are zero; extra ones at or beyond
    /// `trunc` are dropped. `zero` fixes the ring context.
    pub fn new(low: i64, mut coeffs: Vec<C>, trunc: i64, zero: C) -> Self {
        let len = (trunc - low).max(0) as usize;
        coeffs.truncate(len);
        while coeffs.len() < len {
            coeffs.push(zero.zero_like());
        }
        let mut s = LaurentSeries {
            low: low.min(trunc),
            coeffs,
            trunc,
            zero: zero.zero_like(),
        };
        s.normalize();
        s
    }

    /// The zero series known below `q^trunc`.
    pub fn zero(trunc: i64, zero: C) -> Self {
        LaurentSeries {
            low: trunc,
            coeffs: Vec::new(),
            trunc,
            zero: zero.zero_like(),
        }
    }

    /// `c · q^exp + O(q^trunc)`.
    pub fn monomial(exp: i64, c: C, trunc: i64) -> Self {
        let zero = c.zero_like();
        Self::new(exp, vec![c], trunc, zero)
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            Some(0) => {}
            Some(k) => {
                self.coeffs.drain(..k);
                self.low += k as i64;
            }
            None => {
                self.coeffs.clear();
                self.low = self.trunc;
            }
        }
    }

    /// Lowest exponent with a nonzero coefficient; equals `trunc` for the zero series.
    pub fn low(&self) -> i64 {
        self.low
    }

    /// Exclusive truncation order.
    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    /// Zero element of the coefficient ring, as used by this series.
    pub fn zero_coefficient(&self) -> &C {
        &self.zero
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Leading coefficient, `None` for the zero series.
    pub fn leading(&self) -> Option<&C> {
        self.coeffs.first()
    }

    /// Coefficient of `q^exp`. Exponents at or beyond `trunc` are an error.
    pub fn coeff(&self, exp: i64) -> Result<&C> {
        if exp >= self.trunc {
            return Err(Error::Truncated {
                index: exp,
                trunc: self.trunc,
            });
        }
        if exp < self.low {
            return Ok(&self.zero);
        }
        Ok(&self.coeffs[(exp - self.low) as usize])
    }

    /// `(exponent, coefficient)` pairs for `low..trunc`.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.low + i as i64, c))
    }

    fn dense(&self, from: i64, to: i64) -> Vec<C> {
        (from..to)
            .map(|e| {
                if e < self.low {
                    self.zero.clone()
                } else {
                    self.coeffs[(e - self.low) as usize].clone()
                }
            })
            .collect()
    }

    /// Same series with the truncation lowered to `trunc` (never raised).
    pub fn truncate(&self, trunc: i64) -> Result<Self> {
        if trunc > self.trunc {
            return Err(Error::Argument(format!(
                "cannot extend truncation from {} to {trunc}",
                self.trunc
            )));
        }
        let low = self.low.min(trunc);
        Ok(Self::new(low, self.dense(low, trunc), trunc, self.zero.clone()))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.combine(rhs, false)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.combine(rhs, true)
    }

    fn combine(&self, rhs: &Self, subtract: bool) -> Self {
        let trunc = self.trunc.min(rhs.trunc);
        let low = self.low.min(rhs.low).min(trunc);
        let mut out = self.dense(low, trunc);
        for (e, c) in rhs.terms() {
            if e >= trunc {
                break;
            }
            let slot = &mut out[(e - low) as usize];
            if subtract {
                slot.sub_assign_ref(c);
            } else {
                slot.add_assign_ref(c);
            }
        }
        Self::new(low, out, trunc, self.zero.clone())
    }

    pub fn neg(&self) -> Self {
        LaurentSeries {
            low: self.low,
            coeffs: self.coeffs.iter().map(Coefficient::neg_ref).collect(),
            trunc: self.trunc,
            zero: self.zero.clone(),
        }
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &C) -> Self {
        let coeffs = self.coeffs.iter().map(|x| x.mul_ref(c)).collect();
        Self::new(self.low, coeffs, self.trunc, self.zero.clone())
    }

    /// Multiplies by `q^k` (shifts exponents and the truncation order).
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries {
            low: self.low + k,
            coeffs: self.coeffs.clone(),
            trunc: self.trunc + k,
            zero: self.zero.clone(),
        }
    }

    /// Schoolbook product. The result is known below
    /// `min(trunc1 + low2, trunc2 + low1)`.
    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            let trunc = self
                .trunc
                .saturating_add(rhs.low)
                .min(rhs.trunc.saturating_add(self.low));
            return Self::zero(trunc, self.zero.clone());
        }
        let low = self.low + rhs.low;
        let trunc = (self.trunc + rhs.low).min(rhs.trunc + self.low);
        let len = (trunc - low).max(0) as usize;
        let mut out: Vec<C> = Vec::with_capacity(len);
        for k in 0..len {
            let mut acc = self.zero.zero_like();
            let i_max = k.min(self.coeffs.len() - 1);
            let i_min = k.saturating_sub(rhs.coeffs.len() - 1);
            for i in i_min..=i_max {
                acc.add_mul_assign(&self.coeffs[i], &rhs.coeffs[k - i]);
            }
            out.push(acc);
        }
        Self::new(low, out, trunc, self.zero.clone())
    }

    /// Long division `self / rhs`. The leading coefficient of `rhs` must divide
    /// every intermediate value (a unit for integer rings).
    ///
    /// Each quotient coefficient is accumulated starting from the matching
    /// numerator coefficient, so for floating rings the numerator's per-term
    /// precision carries through to the quotient.
    pub fn div(&self, rhs: &Self) -> Result<Self> {
        let lead = rhs
            .leading()
            .ok_or_else(|| Error::Argument("division by a series that is zero to its truncation order".into()))?
            .clone();
        let low = self.low.min(self.trunc) - rhs.low;
        let rel = if self.is_zero() {
            rhs.trunc - rhs.low
        } else {
            (self.trunc - self.low).min(rhs.trunc - rhs.low)
        };
        let trunc = if self.is_zero() {
            self.trunc - rhs.low
        } else {
            low + rel
        };
        if self.is_zero() {
            return Ok(Self::zero(trunc, self.zero.clone()));
        }
        let len = (trunc - low).max(0) as usize;
        let mut quot: Vec<C> = Vec::with_capacity(len);
        for m in 0..len {
            let mut acc = if m < self.coeffs.len() {
                self.coeffs[m].clone()
            } else {
                self.zero.zero_like()
            };
            let k_max = m.min(rhs.coeffs.len() - 1);
            for k in 1..=k_max {
                acc.sub_mul_assign(&rhs.coeffs[k], &quot[m - k]);
            }
            let q = acc.checked_div(&lead).ok_or_else(|| {
                Error::Internal(format!(
                    "leading coefficient {} does not divide the coefficient of q^{}",
                    lead.dump(),
                    low + m as i64
                ))
            })?;
            quot.push(q);
        }
        Ok(Self::new(low, quot, trunc, self.zero.clone()))
    }

    /// `-q d/dq`: multiplies the coefficient of `q^e` by `-e`.
    pub fn neg_q_derivative(&self) -> Self {
        let coeffs = self.terms().map(|(e, c)| c.mul_i64(-e)).collect();
        Self::new(self.low, coeffs, self.trunc, self.zero.clone())
    }

    /// Applies `f` to every coefficient.
    pub fn map<D: Coefficient>(&self, zero: D, mut f: impl FnMut(i64, &C) -> D) -> LaurentSeries<D> {
        let coeffs = self.terms().map(|(e, c)| f(e, c)).collect();
        LaurentSeries::new(self.low, coeffs, self.trunc, zero)
    }

    /// Exact agreement of all coefficients below `min(trunc1, trunc2)`, by `eq`.
    /// Returns the first differing exponent.
    pub fn first_mismatch(&self, rhs: &Self, eq: impl Fn(&C, &C) -> bool) -> Option<i64> {
        let trunc = self.trunc.min(rhs.trunc);
        let low = self.low.min(rhs.low).min(trunc);
        (low..trunc).find(|&e| {
            let a = self.coeff(e).expect("below trunc");
            let b = rhs.coeff(e).expect("below trunc");
            !eq(a, b)
        })
    }

    /// Text dump: one `<exponent> <coefficient>` line per known exponent from `low`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (e, c) in self.terms() {
            out.push_str(&format!("{e} {}\n", c.dump()));
        }
        out
    }
}

impl<C: Coefficient + PartialEq> PartialEq for LaurentSeries<C> {
    fn eq(&self, other: &Self) -> bool {
        self.low == other.low && self.trunc == other.trunc && self.coeffs == other.coeffs
    }
}

impl<C: Coefficient> Neg for &LaurentSeries<C> {
    type Output = LaurentSeries<C>;
    fn neg(self) -> LaurentSeries<C> {
        LaurentSeries::neg(self)
    }
}

/// Series over series: the inner variable is `p`, the outer one `q`.
impl<C: Coefficient> Coefficient for LaurentSeries<C> {
    fn zero_like(&self) -> Self {
        LaurentSeries::zero(self.trunc, self.zero.clone())
    }
    fn from_integer_like(&self, v: &Integer) -> Self {
        LaurentSeries::monomial(0, self.zero.from_integer_like(v), self.trunc)
    }
    fn is_zero(&self) -> bool {
        LaurentSeries::is_zero(self)
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self = self.add(rhs);
    }
    fn sub_assign_ref(&mut self, rhs: &Self) {
        *self = self.sub(rhs);
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
    fn neg_ref(&self) -> Self {
        LaurentSeries::neg(self)
    }
    fn mul_i64(&self, k: i64) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c.mul_i64(k)).collect();
        LaurentSeries::new(self.low, coeffs, self.trunc, self.zero.clone())
    }
    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        self.div(rhs).ok()
    }
    fn dump(&self) -> String {
        let parts: Vec<String> = self.terms().filter(|(_, c)| !c.is_zero()).map(|(e, c)| format!("({})p^{e}", c.dump())).collect();
        if parts.is_empty() {
            format!("O(p^{})", self.trunc)
        } else {
            format!("{} + O(p^{})", parts.join(" + "), self.trunc)
        }
    }
}

/// Integer Laurent series, the default for exact constructions.
pub type IntSeries = LaurentSeries<Integer>;

fn int_series(low: i64, coeffs: Vec<Integer>, trunc: i64) -> IntSeries {
    LaurentSeries::new(low, coeffs, trunc, Integer::new())
}

/// `σ_k(n) = Σ_{d | n} d^k`.
pub fn divisor_sum(k: u32, n: u64) -> Result<Integer> {
    if n == 0 {
        return Err(Error::Argument("divisor_sum needs n >= 1".into()));
    }
    let mut total = Integer::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            total += Integer::from(d).pow(k);
            let e = n / d;
            if e != d {
                total += Integer::from(e).pow(k);
            }
        }
        d += 1;
    }
    Ok(total)
}

/// `E_weight` for weight 2, 4 or 6, known below `q^trunc`.
pub fn eisenstein(weight: u32, trunc: i64) -> Result<IntSeries> {
    let (k, scale) = match weight {
        2 => (1, -24i64),
        4 => (3, 240),
        6 => (5, -504),
        _ => return Err(Error::Argument(format!("no Eisenstein series of weight {weight}; use 2, 4 or 6"))),
    };
    if trunc < 1 {
        return Err(Error::Argument("eisenstein needs trunc >= 1".into()));
    }
    let mut coeffs = vec![Integer::from(1)];
    for n in 1..trunc as u64 {
        coeffs.push(divisor_sum(k, n)? * scale);
    }
    Ok(int_series(0, coeffs, trunc))
}

/// `Δ = (E4^3 - E6^2)/1728`, known below `q^trunc`.
pub fn delta(trunc: i64) -> Result<IntSeries> {
    if trunc < 2 {
        return Err(Error::Argument("delta needs trunc >= 2".into()));
    }
    let e4 = eisenstein(4, trunc)?;
    let e6 = eisenstein(6, trunc)?;
    let diff = e4.mul(&e4).mul(&e4).sub(&e6.mul(&e6));
    let k = Integer::from(1728);
    let mut coeffs = Vec::new();
    for (e, c) in diff.terms() {
        let q = c.checked_div(&k).ok_or_else(|| {
            Error::Internal(format!("E4^3 - E6^2 coefficient of q^{e} is not divisible by 1728"))
        })?;
        coeffs.push(q);
    }
    let d = int_series(diff.low(), coeffs, diff.trunc());
    if d.low() != 1 || *d.coeff(1)? != 1 {
        return Err(Error::Internal("Δ does not start with q".into()));
    }
    Ok(d)
}

/// Coefficients of `j`, with the invariant `c(-1) = 1, c(0) = 744, c(1) = 196884`.
#[derive(Clone, Debug, PartialEq)]
pub struct JSeries {
    series: IntSeries,
}

impl JSeries {
    /// Wraps an integer series that claims to be `j`; checks the leading terms.
    pub fn from_series(series: IntSeries) -> Result<Self> {
        let ok = series.low() == -1
            && series.trunc() >= 2
            && *series.coeff(-1)? == 1
            && *series.coeff(0)? == 744
            && *series.coeff(1)? == 196884;
        if !ok {
            return Err(Error::Argument("series does not start q^-1 + 744 + 196884q".into()));
        }
        Ok(JSeries { series })
    }

    /// Bypasses the leading-term check; for fault-injection tests only.
    #[doc(hidden)]
    pub fn from_series_unchecked(series: IntSeries) -> Self {
        JSeries { series }
    }

    pub fn series(&self) -> &IntSeries {
        &self.series
    }

    pub fn trunc(&self) -> i64 {
        self.series.trunc()
    }

    /// `c(n)` for `-1 <= n < trunc`.
    pub fn c(&self, n: i64) -> Result<&Integer> {
        self.series.coeff(n)
    }

    /// `j - 744`, the first member of the Hecke system.
    pub fn j1(&self) -> IntSeries {
        self.series.sub(&int_series(0, vec![Integer::from(744)], self.series.trunc()))
    }

    /// Same coefficients with `c(n)` replaced; builds corrupted tables for fault injection.
    #[doc(hidden)]
    pub fn with_coefficient(&self, n: i64, value: Integer) -> Self {
        let mut coeffs = self.series.dense(-1, self.series.trunc());
        coeffs[(n + 1) as usize] = value;
        JSeries {
            series: int_series(-1, coeffs, self.series.trunc()),
        }
    }
}

/// `j = E4^3/Δ`, coefficients `c(-1) .. c(trunc - 1)`.
pub fn j_series(trunc: i64) -> Result<JSeries> {
    if trunc < 1 {
        return Err(Error::Argument("j_series needs trunc >= 1".into()));
    }
    // E4^3/Δ loses two orders of truncation: one for Δ's q, one for the shift.
    let inner = trunc.max(2) + 2;
    let e4 = eisenstein(4, inner)?;
    let num = e4.mul(&e4).mul(&e4);
    let j = num.div(&delta(inner)?)?.truncate(trunc)?;
    if trunc >= 2 {
        JSeries::from_series(j)
    } else {
        Ok(JSeries { series: j })
    }
}

/// Process-wide table of `c(n)`, grown on demand and read-only otherwise.
pub fn cached_j_series(min_trunc: i64) -> Result<Arc<JSeries>> {
    static CACHE: OnceLock<RwLock<Option<Arc<JSeries>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(None));
    if let Some(j) = cache.read().expect("j cache poisoned").as_ref() {
        if j.trunc() >= min_trunc {
            return Ok(Arc::clone(j));
        }
    }
    let mut guard = cache.write().expect("j cache poisoned");
    if let Some(j) = guard.as_ref() {
        if j.trunc() >= min_trunc {
            return Ok(Arc::clone(j));
        }
    }
    let current = guard.as_ref().map_or(0, |j| j.trunc());
    let target = min_trunc.max(2 * current).max(64);
    let j = Arc::new(j_series(target)?);
    *guard = Some(Arc::clone(&j));
    Ok(j)
}

/// `-(1/2πi) j'(τ) = -q dj/dq = q^-1 - Σ n c(n) q^n`, known below `q^trunc`.
pub fn neg_dlog_numerator(trunc: i64) -> Result<IntSeries> {
    Ok(neg_dlog_numerator_of(&*cached_j_series(trunc.max(2))?)?.truncate(trunc)?)
}

/// `-q d/dq` applied to a given `j` table.
pub fn neg_dlog_numerator_of(j: &JSeries) -> Result<IntSeries> {
    Ok(j.series().neg_q_derivative())
}

/// The same numerator by the second route, `E4^2 E6 / Δ`.
pub fn neg_dlog_numerator_from_eisenstein(trunc: i64) -> Result<IntSeries> {
    let inner = trunc.max(2) + 2;
    let e4 = eisenstein(4, inner)?;
    let e6 = eisenstein(6, inner)?;
    e4.mul(&e4).mul(&e6).div(&delta(inner)?)?.truncate(trunc)
}

/// Multiplies two series (free-function form of [`LaurentSeries::mul`]).
pub fn series_mul<C: Coefficient>(a: &LaurentSeries<C>, b: &LaurentSeries<C>) -> LaurentSeries<C> {
    a.mul(b)
}

pub fn series_add<C: Coefficient>(a: &LaurentSeries<C>, b: &LaurentSeries<C>) -> LaurentSeries<C> {
    a.add(b)
}

pub fn series_div<C: Coefficient>(a: &LaurentSeries<C>, b: &LaurentSeries<C>) -> Result<LaurentSeries<C>> {
    a.div(b)
}
