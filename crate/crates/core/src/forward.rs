//! Forward evaluation of `j`, `j'` and `j''` from the q-expansion, plus
//! reduction of points of the upper half-plane to the standard fundamental
//! domain `|Re τ| <= 1/2, |τ| >= 1`.

use std::fmt;

use rug::Integer;

use crate::error::{Error, Result};
use crate::mpnum::{bits_for_digits, MPComplex, MPReal};
use crate::qseries::cached_j_series;

/// Integer matrix `[[a, b], [c, d]]` acting by `τ ↦ (aτ + b)/(cτ + d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sl2z {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Sl2z {
    pub const IDENTITY: Sl2z = Sl2z { a: 1, b: 0, c: 0, d: 1 };
    /// `τ ↦ -1/τ`.
    pub const S: Sl2z = Sl2z { a: 0, b: -1, c: 1, d: 0 };

    /// `τ ↦ τ + k`.
    pub fn translation(k: i64) -> Sl2z {
        Sl2z { a: 1, b: k, c: 0, d: 1 }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    /// Matrix product `self · rhs`; `None` on overflow.
    pub fn checked_mul(&self, rhs: &Sl2z) -> Option<Sl2z> {
        let dot = |x: i64, y: i64, u: i64, v: i64| x.checked_mul(y)?.checked_add(u.checked_mul(v)?);
        Some(Sl2z {
            a: dot(self.a, rhs.a, self.b, rhs.c)?,
            b: dot(self.a, rhs.b, self.b, rhs.d)?,
            c: dot(self.c, rhs.a, self.d, rhs.c)?,
            d: dot(self.c, rhs.b, self.d, rhs.d)?,
        })
    }

    /// `cτ + d`.
    pub fn automorphy(&self, tau: &MPComplex) -> MPComplex {
        let prec = tau.prec();
        MPComplex::new(tau.re() * self.c + self.d, tau.im() * self.c).with_prec(prec)
    }

    pub fn apply(&self, tau: &MPComplex) -> Result<MPComplex> {
        let prec = tau.prec();
        let num = MPComplex::new(tau.re() * self.a + self.b, tau.im() * self.a).with_prec(prec);
        num.checked_div(&self.automorphy(tau))
    }
}

impl fmt::Display for Sl2z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// A point together with the matrix that carried the input to it.
#[derive(Clone, Debug)]
pub struct FundamentalPoint {
    pub tau: MPComplex,
    pub reduced: bool,
    pub transform: Sl2z,
}

fn overflow() -> Error {
    Error::Internal("reduction matrix overflowed i64".into())
}

/// Reduces `tau` to the fundamental domain.
///
/// Boundary points are canonicalised to the left half: `Re τ = 1/2` maps to
/// `-1/2`, and points on the unit circle end with `Re τ <= 0`.
pub fn reduce_fundamental(tau: &MPComplex) -> Result<FundamentalPoint> {
    if tau.im().is_sign_negative() || tau.im().is_zero() || !tau.is_finite() {
        return Err(Error::Domain(format!("Im(tau) must be positive, got {}", tau.to_sci(10))));
    }
    let prec = tau.prec();
    let eps = MPReal::one(prec).mul_pow2(8 - prec as i32);
    let half = MPReal::from_f64(prec, 0.5);
    let limit = (10.0 * (1.0 + tau.re().to_f64().abs()) + 64.0) as u64;

    let mut z = tau.clone();
    let mut m = Sl2z::IDENTITY;
    let mut steps = 0u64;
    loop {
        steps += 1;
        if steps > limit {
            return Err(Error::Internal(format!("reduction did not converge in {limit} steps")));
        }
        let k = z
            .re()
            .round_to_integer()
            .and_then(|k| k.to_i64())
            .ok_or_else(overflow)?;
        if k != 0 {
            z = MPComplex::new(z.re() - k, z.im().clone());
            m = Sl2z::translation(-k).checked_mul(&m).ok_or_else(overflow)?;
        }
        let r2 = z.norm_sqr();
        if r2 < MPReal::one(prec) - &eps {
            z = MPComplex::from_integer(prec, &Integer::from(-1)).checked_div(&z)?;
            m = Sl2z::S.checked_mul(&m).ok_or_else(overflow)?;
            continue;
        }
        break;
    }
    if (z.re() - &half).abs() <= eps {
        z = MPComplex::new(z.re() - 1i64, z.im().clone());
        m = Sl2z::translation(-1).checked_mul(&m).ok_or_else(overflow)?;
    }
    let on_circle = (z.norm_sqr() - 1i64).abs() <= eps;
    if on_circle && !z.re().is_sign_negative() && !z.re().is_zero() {
        z = MPComplex::from_integer(prec, &Integer::from(-1)).checked_div(&z)?;
        m = Sl2z::S.checked_mul(&m).ok_or_else(overflow)?;
    }
    Ok(FundamentalPoint {
        tau: z,
        reduced: true,
        transform: m,
    })
}

/// Values of `j` and its first two τ-derivatives at one point.
#[derive(Clone, Debug)]
pub struct JDerivatives {
    pub j: MPComplex,
    pub dj: MPComplex,
    pub d2j: MPComplex,
}

/// `ln` of the bound `n^k e^(4π√n) e^(-2πny)` on the n-th tail term.
fn log_term(n: f64, k: u32, y: f64) -> f64 {
    f64::from(k) * n.ln() + 4.0 * std::f64::consts::PI * n.sqrt() - 2.0 * std::f64::consts::PI * n * y
}

/// Number of coefficients `c(0) .. c(N-1)` after which the tail of
/// `Σ n^k c(n) q^n` is below `e^(log_eps)`, using `|c(n)| <= e^(4π√n)`.
pub fn truncation_order(y: f64, k: u32, log_eps: f64) -> usize {
    let pi2y = 2.0 * std::f64::consts::PI * y;
    let mut n = 1usize;
    loop {
        let nf = n as f64;
        // Ratio bound of consecutive tail terms from n on.
        let log_ratio = f64::from(k) * (1.0 / nf) + 2.0 * std::f64::consts::PI / nf.sqrt() - pi2y;
        if log_ratio < -0.01 {
            let tail = log_term(nf, k, y) - (1.0 - log_ratio.exp()).ln();
            if tail < log_eps {
                return n;
            }
        }
        n += 1;
    }
}

/// Evaluates `j`, `dj/dτ`, `d²j/dτ²` at `tau` to about `digits` significant digits
/// (absolute accuracy `10^-digits` when `|j| < 1`).
pub fn eval_j_derivatives(tau: &MPComplex, digits: u32) -> Result<JDerivatives> {
    if tau.im().is_sign_negative() || tau.im().is_zero() {
        return Err(Error::Domain(format!("Im(tau) must be positive, got {}", tau.to_sci(10))));
    }
    let work = working_precision(digits);
    let fp = reduce_fundamental(&tau.with_prec(work.max(tau.prec())))?;
    let z = fp.tau.with_prec(work);
    let at_reduced = series_values(&z, digits, work)?;
    if fp.transform == Sl2z::IDENTITY {
        return Ok(at_reduced);
    }
    // j(τ) = j(Mτ); dMτ/dτ = (cτ+d)^-2, d²Mτ/dτ² = -2c (cτ+d)^-3.
    let t = tau.with_prec(work);
    let inv = fp.transform.automorphy(&t).recip()?;
    let inv2 = &inv * &inv;
    let inv3 = &inv2 * &inv;
    let dj = &at_reduced.dj * &inv2;
    let d2j = &(&at_reduced.d2j * &(&inv2 * &inv2)) + &(&at_reduced.dj * &inv3.mul_i64(-2 * fp.transform.c));
    Ok(JDerivatives {
        j: at_reduced.j,
        dj,
        d2j,
    })
}

fn working_precision(digits: u32) -> u32 {
    // On the reduced domain the largest term exceeds max(1, |j|) by under 2^16.
    bits_for_digits(digits) + 48
}

fn series_values(z: &MPComplex, digits: u32, prec: u32) -> Result<JDerivatives> {
    let y = z.im().to_f64();
    let log_eps = -(f64::from(digits) + 2.0) * std::f64::consts::LN_10;
    let order = truncation_order(y, 2, log_eps).max(2);
    let table = cached_j_series(order as i64 + 1)?;

    let two_pi = MPReal::two_pi(prec);
    let arg = MPComplex::new(-(&two_pi * z.im()), &two_pi * z.re());
    let q = arg.exp()?;
    let qinv = q.recip()?;

    // Horner for Σ c(n) q^n, Σ n c(n) q^n, Σ n² c(n) q^n over n = 0 .. order-1.
    let mut s0 = MPComplex::zero(prec);
    let mut s1 = MPComplex::zero(prec);
    let mut s2 = MPComplex::zero(prec);
    for n in (0..order as i64).rev() {
        let c = table.c(n)?;
        s0 = &s0 * &q;
        s1 = &s1 * &q;
        s2 = &s2 * &q;
        if n == 0 {
            s0 = &s0 + &MPComplex::from_integer(prec, c);
            continue;
        }
        let cn = MPReal::from_integer(prec, c);
        let c1 = &cn * n;
        let c2 = &c1 * n;
        s0 = &s0 + &MPComplex::from_real(cn);
        s1 = &s1 + &MPComplex::from_real(c1);
        s2 = &s2 + &MPComplex::from_real(c2);
    }
    // j = q^-1 + s0; dj/dτ = 2πi (s1 - q^-1); d²j/dτ² = -4π² (q^-1 + s2).
    let j = &qinv + &s0;
    let dj = (&s1 - &qinv).mul_i().scale(&two_pi);
    let four_pi2 = &two_pi * &two_pi;
    let d2j = (&qinv + &s2).scale(&-four_pi2);
    Ok(JDerivatives { j, dj, d2j })
}

/// `j(τ)` to `digits` significant digits.
pub fn eval_j(tau: &MPComplex, digits: u32) -> Result<MPComplex> {
    Ok(eval_j_derivatives(tau, digits)?.j)
}

/// `dj/dτ` to `digits` significant digits.
pub fn eval_j_prime(tau: &MPComplex, digits: u32) -> Result<MPComplex> {
    Ok(eval_j_derivatives(tau, digits)?.dj)
}

/// `d²j/dτ²` to `digits` significant digits.
pub fn eval_j_second(tau: &MPComplex, digits: u32) -> Result<MPComplex> {
    Ok(eval_j_derivatives(tau, digits)?.d2j)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use rug::ops::Pow;

    use super::*;

    const P: u32 = 200;

    fn c(re: f64, im: f64) -> MPComplex {
        MPComplex::from_f64(P, re, im)
    }

    fn sqrt3() -> MPReal {
        MPReal::from_i64(P, 3).sqrt().unwrap()
    }

    fn rho() -> MPComplex {
        MPComplex::new(MPReal::from_f64(P, -0.5), sqrt3().mul_pow2(-1))
    }

    fn close(a: &MPComplex, b: &MPComplex, tol: f64) -> bool {
        (a - b).abs().to_f64() <= tol
    }

    #[test]
    fn reduce_simple() {
        let fp = reduce_fundamental(&c(0.0, 1.0)).unwrap();
        assert_eq!(fp.transform, Sl2z::IDENTITY);
        let fp = reduce_fundamental(&c(7.0, 1.0)).unwrap();
        assert!(close(&fp.tau, &c(0.0, 1.0), 1e-50));
        assert_eq!(fp.transform, Sl2z::translation(-7));
        assert_eq!(fp.transform.det(), 1);
    }

    #[test]
    fn reduce_boundaries() {
        let fp = reduce_fundamental(&c(0.5, 2.0)).unwrap();
        assert!(close(&fp.tau, &c(-0.5, 2.0), 1e-50));
        // e^{iπ/3} lies on the circle and at Re = 1/2.
        let r = MPComplex::new(MPReal::from_f64(P, 0.5), sqrt3().mul_pow2(-1));
        let fp = reduce_fundamental(&r).unwrap();
        assert!(close(&fp.tau, &rho(), 1e-50), "{}", fp.tau);
        let frac = |k: i64| MPReal::from_rational(P, &rug::Rational::from((k, 25)));
        let fp = reduce_fundamental(&MPComplex::new(frac(7), frac(24))).unwrap();
        assert!(close(&fp.tau, &MPComplex::new(frac(-7), frac(24)), 1e-50), "{}", fp.tau);
    }

    #[test]
    fn reduce_random_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = MPComplex::new(MPReal::zero(P), sqrt3());
        let tol = MPReal::one(P).mul_pow2(16 - P as i32).to_f64();
        for _ in 0..40 {
            let mut z = base.clone();
            for _ in 0..rng.gen_range(1..8) {
                let k = rng.gen_range(-3i64..=3);
                z = Sl2z::translation(k).apply(&z).unwrap();
                z = Sl2z::S.apply(&z).unwrap();
            }
            let fp = reduce_fundamental(&z).unwrap();
            assert!(close(&fp.tau, &base, tol), "{}", fp.tau);
            assert_eq!(fp.transform.det(), 1);
            let back = fp.transform.apply(&z).unwrap();
            assert!(close(&back, &fp.tau, tol));
        }
    }

    #[test]
    fn reduce_rejects_lower_half() {
        assert!(matches!(reduce_fundamental(&c(0.0, -1.0)), Err(Error::Domain(_))));
        assert!(matches!(eval_j(&c(0.3, 0.0), 20), Err(Error::Domain(_))));
    }

    #[test]
    fn coefficient_bound_holds() {
        let j = cached_j_series(201).unwrap();
        for n in 1..=200i64 {
            let c = MPReal::from_integer(128, j.c(n).unwrap());
            let bound = 4.0 * std::f64::consts::PI * (n as f64).sqrt();
            assert!(c.ln().unwrap().to_f64() < bound, "n = {n}");
        }
    }

    #[test]
    fn special_values() {
        let j = eval_j(&c(0.0, 1.0), 40).unwrap();
        assert!(close(&j, &c(1728.0, 0.0), 1e-36), "{j}");
        let j = eval_j(&rho(), 40).unwrap();
        assert!(j.abs().to_f64() < 1e-38, "{j}");
        let j = eval_j(&MPComplex::new(MPReal::zero(P), sqrt3()), 40).unwrap();
        assert!(close(&j, &c(54000.0, 0.0), 1e-34), "{j}");
        let s163 = MPReal::from_i64(P, 163).sqrt().unwrap().mul_pow2(-1);
        let z = MPComplex::new(MPReal::from_f64(P, -0.5), s163);
        let j = eval_j(&z, 40).unwrap();
        let want = -MPReal::from_integer(P, &Integer::from(640320).pow(3));
        assert!(((j.re() - &want) / &want).abs().to_f64() < 1e-38, "{j}");
        assert!(j.im().abs().to_f64() < 1e-20);
        let j = eval_j(&c(-0.4772, 0.8882), 10).unwrap();
        assert!((j.re().to_f64() - 1.0042).abs() < 5e-5 && (j.im().to_f64() - 0.9983).abs() < 5e-5, "{j}");
    }

    #[test]
    fn critical_points() {
        assert!(eval_j_prime(&c(0.0, 1.0), 40).unwrap().abs().to_f64() < 1e-35);
        assert!(eval_j_prime(&rho(), 40).unwrap().abs().to_f64() < 1e-35);
        assert!(eval_j_prime(&c(0.0, 2.0), 30).unwrap().abs().to_f64() > 1.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let digits = 40;
        let h = MPComplex::from_f64(P, 1e-20, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut points = vec![c(0.0, 2.0)];
        for _ in 0..6 {
            points.push(c(rng.gen_range(-0.5..0.5), rng.gen_range(0.9..2.5)));
        }
        for z in points {
            let d = eval_j_derivatives(&z, digits).unwrap();
            let fd = (&eval_j(&(&z + &h), digits).unwrap() - &eval_j(&(&z - &h), digits).unwrap()).checked_div(&h.mul_i64(2)).unwrap();
            let bound = 10.0 * (d.d2j.abs().to_f64() * 1e-20 + 1e-40 / 1e-20) + 1e-30 * d.dj.abs().to_f64();
            assert!((&fd - &d.dj).abs().to_f64() <= bound, "{z}");
            let fd2 = (&eval_j_prime(&(&z + &h), digits).unwrap() - &eval_j_prime(&(&z - &h), digits).unwrap()).checked_div(&h.mul_i64(2)).unwrap();
            let rel = (&fd2 - &d.d2j).abs().to_f64() / d.d2j.abs().to_f64().max(1.0);
            assert!(rel < 1e-15, "{z}: {rel}");
        }
    }

    #[test]
    fn modular_invariance_and_chain_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let z = c(rng.gen_range(-0.5..0.5), rng.gen_range(0.9..2.0));
            let g = Sl2z { a: 2, b: 1, c: 1, d: 1 };
            let w = g.apply(&z).unwrap();
            let at_z = eval_j_derivatives(&z, 30).unwrap();
            let at_w = eval_j_derivatives(&w, 30).unwrap();
            let scale = at_z.j.abs().to_f64().max(1.0);
            assert!((&at_z.j - &at_w.j).abs().to_f64() <= 1e-28 * scale);
            // j'(w) (cz+d)^-2 = j'(z).
            let a = g.automorphy(&z);
            let back = at_w.dj.checked_div(&(&a * &a)).unwrap();
            assert!((&back - &at_z.dj).abs().to_f64() <= 1e-26 * at_z.dj.abs().to_f64().max(1.0));
        }
    }
}
