//! The Hecke system `j_n = j_1 | T(n)` and two exact identities used as
//! oracles for the series machinery.
//!
//! * The generating function `Σ_n j_n(p) q^n` equals `-q j'(q) / (j(q) - j(p))`,
//!   expanded as a series in `q` whose coefficients are Laurent series in `p`.
//! * The denominator formula
//!   `j(p) - j(q) = p^-1 ∏_{m>=1, n>=-1} (1 - p^m q^n)^{c(mn)}`, with `c` the
//!   coefficients of `j - 744`.
//!
//! Both checks run over exact integers and report the first monomial at
//! which the two sides differ.

use std::fmt;

use rug::Integer;

use crate::error::{Error, Result};
use crate::qseries::{cached_j_series, Coefficient, IntSeries, JSeries, LaurentSeries};

/// `j_n` as an integer q-series with principal part `q^-n` and constant term 0.
#[derive(Clone, Debug, PartialEq)]
pub struct HeckeImage {
    n: u32,
    series: IntSeries,
}

impl HeckeImage {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn series(&self) -> &IntSeries {
        &self.series
    }

    pub fn into_series(self) -> IntSeries {
        self.series
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Applies the normalized weight-0 Hecke operator `T(n)` to `j1 = j - 744`.
///
/// The coefficient of `q^m` (`1 <= m < trunc`) is `Σ_{d | (n, m)} (n/d) c1(nm/d²)`.
/// The input must be known through `q^(n (trunc - 1))`.
pub fn hecke_image(j1: &IntSeries, n: u32, trunc: i64) -> Result<HeckeImage> {
    if n == 0 {
        return Err(Error::Argument("hecke_image needs n >= 1".into()));
    }
    if trunc < 1 {
        return Err(Error::Argument("hecke_image needs trunc >= 1".into()));
    }
    if j1.low() != -1 || *j1.coeff(-1)? != 1 || !j1.coeff(0)?.is_zero() {
        return Err(Error::Argument("input must be q^-1 + O(q) (that is, j - 744)".into()));
    }
    let n64 = i64::from(n);
    let needed = n64 * (trunc - 1);
    if j1.trunc() <= needed {
        return Err(Error::Argument(format!(
            "hecke_image(n = {n}, trunc = {trunc}) needs j - 744 through q^{needed}, input is known below q^{}",
            j1.trunc()
        )));
    }
    let low = -n64;
    let mut coeffs = vec![Integer::new(); (trunc - low) as usize];
    coeffs[0] = Integer::from(1);
    for m in 1..trunc {
        let g = gcd(u64::from(n), m as u64) as i64;
        let slot = &mut coeffs[(m - low) as usize];
        for d in (1..=g).filter(|d| g % d == 0) {
            let c = j1.coeff(n64 * m / (d * d))?;
            *slot += Integer::from(c * (n64 / d));
        }
    }
    Ok(HeckeImage {
        n,
        series: LaurentSeries::new(low, coeffs, trunc, Integer::new()),
    })
}

/// Location of the first disagreement in a two-variable comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    /// Exponent of the outer variable.
    pub outer: i64,
    /// Exponent of the inner variable.
    pub inner: i64,
    pub left: String,
    pub right: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}): {} vs {}", self.outer, self.inner, self.left, self.right)
    }
}

/// Outcome of an identity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub name: &'static str,
    /// Number of monomials compared.
    pub compared: usize,
    pub mismatch: Option<Mismatch>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.mismatch {
            None => write!(f, "PASS {} ({} monomials)", self.name, self.compared),
            Some(m) => write!(f, "FAIL {} first mismatch at {m}", self.name),
        }
    }
}

type TwoVar = LaurentSeries<IntSeries>;

fn inner_const(v: Integer, trunc: i64) -> IntSeries {
    LaurentSeries::monomial(0, v, trunc)
}

/// First mismatch of `lhs` and `rhs` over outer exponents `< outer_trunc` and
/// inner exponents `< inner_trunc`; `(outer, inner, compared)`.
fn compare(
    lhs: &TwoVar,
    rhs: &TwoVar,
    outer_low: i64,
    outer_trunc: i64,
    inner_low: i64,
    inner_trunc: i64,
) -> Result<(Option<Mismatch>, usize)> {
    let mut compared = 0;
    for a in outer_low..outer_trunc {
        let (l, r) = (lhs.coeff(a)?, rhs.coeff(a)?);
        for b in inner_low..inner_trunc {
            let (x, y) = (inner_coeff(l, b)?, inner_coeff(r, b)?);
            compared += 1;
            if x != y {
                return Ok((
                    Some(Mismatch {
                        outer: a,
                        inner: b,
                        left: x.to_string(),
                        right: y.to_string(),
                    }),
                    compared,
                ));
            }
        }
    }
    Ok((None, compared))
}

// An all-zero inner series stored as the outer ring's zero carries the
// outer zero's truncation, which may be shorter than `b`; its value is 0.
fn inner_coeff(s: &IntSeries, b: i64) -> Result<Integer> {
    if s.is_zero() && b >= s.trunc() {
        return Ok(Integer::new());
    }
    s.coeff(b).cloned()
}

/// Checks `Σ_{n<=nq} j_n(p) q^n = -q j'(q) / (j(q) - j(p))` through `p^(np - 1)`.
pub fn two_variable_identity_check(np: i64, nq: i64) -> Result<IdentityReport> {
    let j = cached_j_series(np.max(nq) * (nq + 2) + 4)?;
    two_variable_identity_check_with_table(&j, np, nq)
}

/// [`two_variable_identity_check`] against a supplied `c(n)` table.
pub fn two_variable_identity_check_with_table(j: &JSeries, np: i64, nq: i64) -> Result<IdentityReport> {
    if np < 2 || nq < 2 {
        return Err(Error::Argument("two_variable_identity_check needs Np, Nq >= 2".into()));
    }
    // a(n) is a degree-n polynomial in j(p); each factor costs one order of p.
    let p_trunc = np + nq + 2;
    let big = p_trunc + nq + 8;
    let jp = j.series().truncate(p_trunc)?;

    let q_trunc = nq + 1;
    let jq = j.series().truncate(q_trunc - 1)?;
    let zero = IntSeries::zero(big, Integer::new());
    let mut den_coeffs: Vec<IntSeries> = Vec::new();
    let mut num_coeffs: Vec<IntSeries> = Vec::new();
    for (e, c) in jq.terms() {
        let mut d = inner_const(c.clone(), big);
        if e == 0 {
            d = d.sub(&jp);
        }
        den_coeffs.push(d);
        num_coeffs.push(inner_const(Integer::from(c * -e), big));
    }
    let den: TwoVar = LaurentSeries::new(-1, den_coeffs, jq.trunc(), zero.clone());
    let num: TwoVar = LaurentSeries::new(-1, num_coeffs, jq.trunc(), zero.clone());
    let h = num.div(&den)?;
    if h.trunc() < q_trunc {
        return Err(Error::Internal(format!("quotient known below q^{}, need q^{q_trunc}", h.trunc())));
    }

    let j1 = j.j1();
    let mut images = vec![inner_const(Integer::from(1), big)];
    for n in 1..=nq {
        let img = hecke_image(&j1, n as u32, np)?;
        images.push(img.into_series());
    }
    let rhs: TwoVar = LaurentSeries::new(0, images, q_trunc, zero);
    for n in 0..=nq {
        let t = h.coeff(n)?.trunc();
        if !h.coeff(n)?.is_zero() && t < np {
            return Err(Error::Internal(format!("q^{n} coefficient known only below p^{t}, need p^{np}")));
        }
    }
    let (mismatch, compared) = compare(&h, &rhs, 0, q_trunc, -nq, np)?;
    Ok(IdentityReport {
        name: "two-variable identity",
        compared,
        mismatch,
    })
}

/// `(1 - p^m q^n)^e` through `p^(p_trunc - 1)`, `q^(q_trunc - 1)`.
fn binomial_factor(m: i64, n: i64, e: &Integer, p_trunc: i64, q_trunc: i64) -> TwoVar {
    let zero = IntSeries::zero(q_trunc, Integer::new());
    let mut coeffs: Vec<IntSeries> = vec![zero.clone(); p_trunc as usize];
    coeffs[0] = inner_const(Integer::from(1), q_trunc);
    let mut k = 1i64;
    while m * k < p_trunc && n * k < q_trunc {
        let mut b = Integer::from(e.binomial_ref(k as u32));
        if k % 2 == 1 {
            b = -b;
        }
        if !b.is_zero() {
            coeffs[(m * k) as usize] = LaurentSeries::monomial(n * k, b, q_trunc);
        }
        k += 1;
    }
    LaurentSeries::new(0, coeffs, p_trunc, zero)
}

/// Checks the denominator formula on all monomials `p^a q^b`, `a <= m - 1`, `b <= nq - 1`.
pub fn denominator_formula_check(m: i64, nq: i64) -> Result<IdentityReport> {
    let j = cached_j_series(m * nq + 2)?;
    denominator_formula_check_with_table(&j, m, nq)
}

/// [`denominator_formula_check`] against a supplied `c(n)` table.
pub fn denominator_formula_check_with_table(j: &JSeries, m_max: i64, nq: i64) -> Result<IdentityReport> {
    if m_max < 2 || nq < 2 {
        return Err(Error::Argument("denominator_formula_check needs M, Nq >= 2".into()));
    }
    let c1 = j.j1();
    if c1.trunc() <= m_max * nq {
        return Err(Error::Argument(format!("need c(k) for k <= {}", m_max * nq)));
    }
    // Product side before the p^-1 prefactor: p^0 .. p^M, q^0 .. q^Nq.
    let p_trunc = m_max + 1;
    let q_trunc = nq + 1;
    let big = q_trunc + 8;
    let mut prod: TwoVar = LaurentSeries::monomial(0, inner_const(Integer::from(1), q_trunc), p_trunc);
    for m in 1..=m_max {
        for n in 1..=nq {
            let e = c1.coeff(m * n)?;
            if e.is_zero() {
                continue;
            }
            prod = prod.mul(&binomial_factor(m, n, e, p_trunc, q_trunc));
        }
    }
    // The n = -1 factors: only m = 1 has c(-1) = 1; c(0) = 0 kills n = 0.
    let zero_big = IntSeries::zero(big, Integer::new());
    let edge: TwoVar = LaurentSeries::new(
        0,
        vec![
            inner_const(Integer::from(1), big),
            LaurentSeries::monomial(-1, Integer::from(-1), big),
        ],
        big,
        zero_big.clone(),
    );
    let rhs = prod.mul(&edge).shift(-1);

    let jq = j.series().truncate(nq)?;
    let mut lhs_coeffs: Vec<IntSeries> = Vec::new();
    for a in -1..m_max {
        let mut s = inner_const(j.c(a)?.clone(), big);
        if a == 0 {
            s = s.sub(&jq);
        }
        lhs_coeffs.push(s);
    }
    let lhs: TwoVar = LaurentSeries::new(-1, lhs_coeffs, m_max, zero_big);
    if rhs.trunc() < m_max {
        return Err(Error::Internal(format!("product known below p^{}, need p^{m_max}", rhs.trunc())));
    }
    let (mismatch, compared) = compare(&lhs, &rhs, -1, m_max, -1, nq)?;
    Ok(IdentityReport {
        name: "denominator formula",
        compared,
        mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j1(trunc: i64) -> IntSeries {
        cached_j_series(trunc).unwrap().j1().truncate(trunc).unwrap()
    }

    #[test]
    fn t1_is_identity() {
        let base = j1(30);
        let img = hecke_image(&base, 1, 30).unwrap();
        assert_eq!(img.series(), &base);
    }

    #[test]
    fn images_are_normalized() {
        let base = j1(200);
        for n in 1..=10u32 {
            let img = hecke_image(&base, n, 12).unwrap();
            let s = img.series();
            assert_eq!(s.low(), -i64::from(n));
            assert_eq!(*s.coeff(-i64::from(n)).unwrap(), 1);
            assert!(s.coeff(0).unwrap().is_zero());
            for e in (-i64::from(n) + 1)..0 {
                assert!(s.coeff(e).unwrap().is_zero(), "n={n} e={e}");
            }
        }
    }

    #[test]
    fn j2_from_polynomial() {
        // j_2 = j1^2 - 2 c(1) is the Faber polynomial; compare with T(2).
        let base = j1(40);
        let sq = base.mul(&base);
        let poly = sq.sub(&LaurentSeries::monomial(0, Integer::from(2 * 196884), sq.trunc()));
        let img = hecke_image(&base, 2, 15).unwrap();
        assert_eq!(img.series().first_mismatch(&poly, |a, b| a == b), None);
        assert_eq!(*img.series().coeff(1).unwrap(), Integer::from(42987520));
    }

    #[test]
    fn insufficient_input_order() {
        let base = j1(20);
        let err = hecke_image(&base, 3, 10).unwrap_err();
        assert!(matches!(err, Error::Argument(ref s) if s.contains("q^27")), "{err}");
        assert!(hecke_image(&base, 2, 10).is_ok());
    }

    #[test]
    fn two_variable_small() {
        let r = two_variable_identity_check(10, 6).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.compared > 0);
    }

    #[test]
    fn denominator_small() {
        let r = denominator_formula_check(4, 4).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn corrupted_table_detected() {
        let j = cached_j_series(80).unwrap();
        let bad = j.with_coefficient(3, Integer::from(j.c(3).unwrap() + 1u32));
        let r = two_variable_identity_check_with_table(&bad, 10, 6).unwrap();
        assert!(!r.passed());
        let r = denominator_formula_check_with_table(&bad, 4, 4).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn full_sizes() {
        let r = two_variable_identity_check(20, 10).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.compared, 11 * 30);
        let r = denominator_formula_check(5, 5).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.compared, 6 * 6);
    }
}
