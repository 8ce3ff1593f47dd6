//! Precision-parameterized real and complex arithmetic.
//!
//! [`MPReal`] wraps an MPFR float with an explicit working precision in bits;
//! [`MPComplex`] pairs two of them at a shared precision. Every floating-point
//! operation in the crate goes through these types. The basic operations and
//! transcendentals are correctly rounded by MPFR, which is well inside the
//! 16-ulp budget callers plan for.
//!
//! Binary exponents are 32-bit, so magnitudes up to roughly 2^(2^30) are
//! representable directly. Anything that only needs `ln|z|` of a huge value
//! (the coefficient traces) reads the exponent field instead of squaring.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{OnceLock, RwLock};

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::{Assign, Float, Integer, Rational};

use crate::error::{Error, Result};

/// Smallest working precision accepted anywhere in the crate.
pub const MIN_PREC: u32 = 64;

fn clamp_prec(prec: u32) -> u32 {
    prec.max(MIN_PREC)
}

/// Bits needed to carry `digits` significant decimal digits.
pub fn bits_for_digits(digits: u32) -> u32 {
    clamp_prec((f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32)
}

/// Real number at an explicit precision.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct MPReal(Float);

impl MPReal {
    pub fn zero(prec: u32) -> Self {
        MPReal(Float::new(clamp_prec(prec)))
    }

    pub fn one(prec: u32) -> Self {
        Self::from_i64(prec, 1)
    }

    pub fn from_f64(prec: u32, v: f64) -> Self {
        MPReal(Float::with_val(clamp_prec(prec), v))
    }

    pub fn from_i64(prec: u32, v: i64) -> Self {
        MPReal(Float::with_val(clamp_prec(prec), v))
    }

    /// Rounds an integer to `prec` bits.
    pub fn from_integer(prec: u32, v: &Integer) -> Self {
        MPReal(Float::with_val(clamp_prec(prec), v))
    }

    /// Holds `v` exactly: the precision is widened to the integer's bit length.
    pub fn from_integer_exact(v: &Integer) -> Self {
        let bits = v.significant_bits().max(1);
        MPReal(Float::with_val(clamp_prec(bits), v))
    }

    pub fn from_rational(prec: u32, v: &Rational) -> Self {
        MPReal(Float::with_val(clamp_prec(prec), v))
    }

    /// Parses a decimal literal such as `-0.4772` or `1.5e-3`.
    pub fn parse(prec: u32, s: &str) -> Result<Self> {
        let parsed = Float::parse(s.trim()).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        Ok(MPReal(Float::with_val(clamp_prec(prec), parsed)))
    }

    /// π at `prec` bits, computed once per precision level.
    pub fn pi(prec: u32) -> Self {
        static CACHE: OnceLock<RwLock<HashMap<u32, Float>>> = OnceLock::new();
        let prec = clamp_prec(prec);
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(v) = cache.read().expect("pi cache poisoned").get(&prec) {
            return MPReal(v.clone());
        }
        let mut guard = cache.write().expect("pi cache poisoned");
        let v = guard
            .entry(prec)
            .or_insert_with(|| Float::with_val(prec, Constant::Pi));
        MPReal(v.clone())
    }

    /// 2π at `prec` bits.
    pub fn two_pi(prec: u32) -> Self {
        let mut p = Self::pi(prec);
        p.0 <<= 1;
        p
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    /// Copy rounded (or widened) to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        MPReal(Float::with_val(clamp_prec(prec), &self.0))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    pub fn is_sign_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    /// Binary exponent `e` with `2^(e-1) <= |x| < 2^e`; `None` for zero.
    pub fn exponent(&self) -> Option<i64> {
        self.0.get_exp().map(i64::from)
    }

    pub fn abs(&self) -> Self {
        MPReal(self.0.clone().abs())
    }

    pub fn max(&self, other: &Self) -> Self {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn min(&self, other: &Self) -> Self {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// Multiplies by 2^k exactly.
    pub fn mul_pow2(&self, k: i32) -> Self {
        let mut v = self.0.clone();
        v <<= k;
        MPReal(v)
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.is_sign_negative() {
            return Err(Error::Domain(format!("sqrt of negative value {}", self.to_f64())));
        }
        Ok(MPReal(Float::with_val(self.prec(), self.0.sqrt_ref())))
    }

    pub fn exp(&self) -> Result<Self> {
        mp_exp(self, self.prec())
    }

    pub fn ln(&self) -> Result<Self> {
        if self.0.is_zero() || self.0.is_sign_negative() {
            return Err(Error::Domain(format!("log of non-positive value {}", self.to_f64())));
        }
        Ok(MPReal(Float::with_val(self.prec(), self.0.ln_ref())))
    }

    pub fn cos(&self) -> Self {
        MPReal(Float::with_val(self.prec(), self.0.cos_ref()))
    }

    pub fn sin(&self) -> Self {
        MPReal(Float::with_val(self.prec(), self.0.sin_ref()))
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let mut s = Float::new(self.prec());
        let mut c = Float::new(self.prec());
        (&mut s, &mut c).assign(self.0.sin_cos_ref());
        (MPReal(s), MPReal(c))
    }

    pub fn atan2(&self, x: &Self) -> Self {
        let prec = self.prec().max(x.prec());
        MPReal(Float::with_val(prec, self.0.atan2_ref(&x.0)))
    }

    pub fn acos_clamped(&self) -> Self {
        mp_arccos_clamped(self)
    }

    /// Nearest integer, ties away from zero.
    pub fn round_to_integer(&self) -> Option<Integer> {
        self.0.to_integer_round(Round::Nearest).map(|(i, _)| i)
    }

    pub fn floor_to_integer(&self) -> Option<Integer> {
        self.0.to_integer_round(Round::Down).map(|(i, _)| i)
    }

    /// Scientific notation with `digits` significant digits, e.g. `1.7320508e0`.
    pub fn to_sci(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        self.0.to_string_radix(10, Some(digits.max(1)))
    }

    /// Plain decimal rounded to `decimals` digits after the point when the
    /// magnitude allows it, scientific notation otherwise.
    pub fn to_decimal(&self, decimals: usize) -> String {
        let mag = self.exponent().unwrap_or(0);
        if !(-40..=200).contains(&mag) {
            return self.to_sci(decimals.max(1));
        }
        let prec = self.prec() + (decimals as f64 / std::f64::consts::LOG10_2).ceil() as u32 + 8;
        let ten = Float::with_val(prec, Integer::from(10).pow(decimals as u32));
        let scaled = Float::with_val(prec, &self.0 * &ten);
        let Some((units, _)) = scaled.to_integer_round(Round::Nearest) else {
            return self.to_sci(decimals.max(1));
        };
        let neg = units < 0;
        let mut digits = units.abs().to_string();
        if digits.len() <= decimals {
            digits = format!("{}{digits}", "0".repeat(decimals + 1 - digits.len()));
        }
        let (int_part, frac_part) = digits.split_at(digits.len() - decimals);
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(int_part);
        if decimals > 0 {
            out.push('.');
            out.push_str(frac_part);
        }
        out
    }
}

impl fmt::Debug for MPReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(24))
    }
}

impl fmt::Display for MPReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (f64::from(self.prec()) * std::f64::consts::LOG10_2).floor() as usize;
        write!(f, "{}", self.to_sci(f.precision().unwrap_or(digits)))
    }
}

impl PartialEq<f64> for MPReal {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for MPReal {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

macro_rules! real_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&MPReal> for &MPReal {
            type Output = MPReal;
            fn $method(self, rhs: &MPReal) -> MPReal {
                let prec = self.prec().max(rhs.prec());
                MPReal(Float::with_val(prec, &self.0 $op &rhs.0))
            }
        }
        impl $trait<MPReal> for MPReal {
            type Output = MPReal;
            fn $method(self, rhs: MPReal) -> MPReal {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&MPReal> for MPReal {
            type Output = MPReal;
            fn $method(self, rhs: &MPReal) -> MPReal {
                (&self).$method(rhs)
            }
        }
        impl $trait<MPReal> for &MPReal {
            type Output = MPReal;
            fn $method(self, rhs: MPReal) -> MPReal {
                self.$method(&rhs)
            }
        }
        impl $trait<i64> for &MPReal {
            type Output = MPReal;
            fn $method(self, rhs: i64) -> MPReal {
                MPReal(Float::with_val(self.prec(), &self.0 $op rhs))
            }
        }
        impl $trait<i64> for MPReal {
            type Output = MPReal;
            fn $method(self, rhs: i64) -> MPReal {
                (&self).$method(rhs)
            }
        }
        impl $trait<f64> for &MPReal {
            type Output = MPReal;
            fn $method(self, rhs: f64) -> MPReal {
                MPReal(Float::with_val(self.prec(), &self.0 $op rhs))
            }
        }
        impl $trait<f64> for MPReal {
            type Output = MPReal;
            fn $method(self, rhs: f64) -> MPReal {
                (&self).$method(rhs)
            }
        }
    };
}

real_binop!(Add, add, +);
real_binop!(Sub, sub, -);
real_binop!(Mul, mul, *);
real_binop!(Div, div, /);

impl Neg for MPReal {
    type Output = MPReal;
    fn neg(self) -> MPReal {
        MPReal(-self.0)
    }
}

impl Neg for &MPReal {
    type Output = MPReal;
    fn neg(self) -> MPReal {
        MPReal(Float::with_val(self.prec(), -&self.0))
    }
}

/// `e^x` at `prec` bits. Leaving the exponent range is an error, not an infinity.
pub fn mp_exp(x: &MPReal, prec: u32) -> Result<MPReal> {
    let v = Float::with_val(clamp_prec(prec), x.0.exp_ref());
    if v.is_infinite() || (v.is_zero() && x.0.is_finite()) {
        return Err(Error::Range(format!("exp({}) is outside the exponent range", x.to_sci(12))));
    }
    Ok(MPReal(v))
}

/// `acos(clamp(x, -1, 1))`, always in `[0, π]`.
pub fn mp_arccos_clamped(x: &MPReal) -> MPReal {
    let prec = x.prec();
    if x.0 >= 1 {
        return MPReal::zero(prec);
    }
    if x.0 <= -1 {
        return MPReal::pi(prec);
    }
    MPReal(Float::with_val(prec, x.0.acos_ref()))
}

/// `ln|z|`, computed from a rescaled copy so `|z|^2` is never formed at full scale.
pub fn mp_log_abs(z: &MPComplex) -> Result<MPReal> {
    if z.is_zero() {
        return Err(Error::Domain("log|z| of z = 0".into()));
    }
    let prec = z.prec();
    let e = z.exponent().expect("nonzero value has an exponent");
    let shift = i32::try_from(-e).map_err(|_| Error::Range("exponent does not fit".into()))?;
    let re = z.re.mul_pow2(shift);
    let im = z.im.mul_pow2(shift);
    let norm = &(&re * &re) + &(&im * &im);
    let half_ln = norm.ln()?.mul_pow2(-1);
    let ln2 = MPReal(Float::with_val(prec, Constant::Log2));
    Ok(half_ln + ln2 * e)
}

/// Complex number with a shared working precision.
#[derive(Clone, PartialEq)]
pub struct MPComplex {
    re: MPReal,
    im: MPReal,
}

impl MPComplex {
    /// Builds from parts, widening the lower-precision part to the shared precision.
    pub fn new(re: MPReal, im: MPReal) -> Self {
        let prec = re.prec().max(im.prec());
        let re = if re.prec() == prec { re } else { re.with_prec(prec) };
        let im = if im.prec() == prec { im } else { im.with_prec(prec) };
        MPComplex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        MPComplex {
            re: MPReal::zero(prec),
            im: MPReal::zero(prec),
        }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        MPComplex {
            re: MPReal::from_f64(prec, re),
            im: MPReal::from_f64(prec, im),
        }
    }

    pub fn from_real(re: MPReal) -> Self {
        let im = MPReal::zero(re.prec());
        MPComplex { re, im }
    }

    pub fn from_integer(prec: u32, v: &Integer) -> Self {
        Self::from_real(MPReal::from_integer(prec, v))
    }

    /// `i` at `prec` bits.
    pub fn i(prec: u32) -> Self {
        MPComplex {
            re: MPReal::zero(prec),
            im: MPReal::one(prec),
        }
    }

    pub fn re(&self) -> &MPReal {
        &self.re
    }

    pub fn im(&self) -> &MPReal {
        &self.im
    }

    pub fn into_parts(self) -> (MPReal, MPReal) {
        (self.re, self.im)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        MPComplex {
            re: self.re.with_prec(prec),
            im: self.im.with_prec(prec),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// Largest binary exponent of the two parts; `None` for zero.
    pub fn exponent(&self) -> Option<i64> {
        match (self.re.exponent(), self.im.exponent()) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }

    pub fn abs(&self) -> MPReal {
        MPReal(Float::with_val(self.prec(), self.re.0.hypot_ref(&self.im.0)))
    }

    /// `|z|^2`.
    pub fn norm_sqr(&self) -> MPReal {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn arg(&self) -> MPReal {
        self.im.atan2(&self.re)
    }

    pub fn conj(&self) -> Self {
        MPComplex {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    pub fn scale(&self, k: &MPReal) -> Self {
        MPComplex::new(&self.re * k, &self.im * k)
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        MPComplex {
            re: &self.re * k,
            im: &self.im * k,
        }
    }

    /// Multiplies by `i`.
    pub fn mul_i(&self) -> Self {
        MPComplex {
            re: -&self.im,
            im: self.re.clone(),
        }
    }

    pub fn recip(&self) -> Result<Self> {
        let one = MPComplex::from_real(MPReal::one(self.prec()));
        one.checked_div(self)
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::Domain("complex division by zero".into()));
        }
        // Smith's scaling keeps |rhs|^2 in range for extreme exponents.
        let prec = self.prec().max(rhs.prec());
        let (a, b) = (&self.re, &self.im);
        let (c, d) = (&rhs.re, &rhs.im);
        if c.abs() >= d.abs() {
            let r = d / c;
            let den = c + &(&r * d);
            let re = (a + &(b * &r)) / &den;
            let im = (b - &(a * &r)) / &den;
            Ok(MPComplex::new(re, im).with_prec(prec))
        } else {
            let r = c / d;
            let den = d + &(&r * c);
            let re = (&(a * &r) + b) / &den;
            let im = (&(b * &r) - a) / &den;
            Ok(MPComplex::new(re, im).with_prec(prec))
        }
    }

    /// `e^z`.
    pub fn exp(&self) -> Result<Self> {
        let modulus = mp_exp(&self.re, self.prec())?;
        let (s, c) = self.im.sin_cos();
        Ok(MPComplex::new(&modulus * &c, &modulus * &s))
    }

    /// `self -= a * b`, computed at the precision of `self`. Exact-zero parts are skipped.
    pub fn sub_mul_assign(&mut self, a: &MPComplex, b: &MPComplex) {
        self.fused_mul_acc(a, b, true);
    }

    /// `self += a * b`, computed at the precision of `self`.
    pub fn add_mul_assign(&mut self, a: &MPComplex, b: &MPComplex) {
        self.fused_mul_acc(a, b, false);
    }

    fn fused_mul_acc(&mut self, a: &MPComplex, b: &MPComplex, subtract: bool) {
        let prec = self.prec();
        let mut tmp = Float::new(prec);
        let terms = [
            (&a.re, &b.re, &a.im, &b.im, &mut self.re, false),
            (&a.re, &b.im, &a.im, &b.re, &mut self.im, true),
        ];
        // re ∓= ar*br - ai*bi ; im ∓= ar*bi + ai*br
        for (x1, y1, x2, y2, acc, plus) in terms {
            if !x1.is_zero() && !y1.is_zero() {
                tmp.assign(&x1.0 * &y1.0);
                if subtract {
                    acc.0 -= &tmp;
                } else {
                    acc.0 += &tmp;
                }
            }
            if !x2.is_zero() && !y2.is_zero() {
                tmp.assign(&x2.0 * &y2.0);
                if plus == subtract {
                    acc.0 -= &tmp;
                } else {
                    acc.0 += &tmp;
                }
            }
        }
    }

    /// Rendering `a+bi` in scientific notation.
    pub fn to_sci(&self, digits: usize) -> String {
        let im = self.im.to_sci(digits);
        if im.starts_with('-') {
            format!("{}{}i", self.re.to_sci(digits), im)
        } else {
            format!("{}+{}i", self.re.to_sci(digits), im)
        }
    }
}

impl fmt::Debug for MPComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci(24))
    }
}

impl fmt::Display for MPComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (f64::from(self.prec()) * std::f64::consts::LOG10_2).floor() as usize;
        write!(f, "{}", self.to_sci(f.precision().unwrap_or(digits)))
    }
}

impl Add<&MPComplex> for &MPComplex {
    type Output = MPComplex;
    fn add(self, rhs: &MPComplex) -> MPComplex {
        MPComplex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&MPComplex> for &MPComplex {
    type Output = MPComplex;
    fn sub(self, rhs: &MPComplex) -> MPComplex {
        MPComplex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&MPComplex> for &MPComplex {
    type Output = MPComplex;
    fn mul(self, rhs: &MPComplex) -> MPComplex {
        let re = &(&self.re * &rhs.re) - &(&self.im * &rhs.im);
        let im = &(&self.re * &rhs.im) + &(&self.im * &rhs.re);
        MPComplex::new(re, im)
    }
}

impl Neg for &MPComplex {
    type Output = MPComplex;
    fn neg(self) -> MPComplex {
        MPComplex {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

macro_rules! complex_owned {
    ($trait:ident, $method:ident) => {
        impl $trait<MPComplex> for MPComplex {
            type Output = MPComplex;
            fn $method(self, rhs: MPComplex) -> MPComplex {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&MPComplex> for MPComplex {
            type Output = MPComplex;
            fn $method(self, rhs: &MPComplex) -> MPComplex {
                (&self).$method(rhs)
            }
        }
    };
}

complex_owned!(Add, add);
complex_owned!(Sub, sub);
complex_owned!(Mul, mul);
