use jinv::forward::{eval_j, reduce_fundamental, Sl2z};
use jinv::hecke::hecke_image;
use jinv::mpnum::{MPComplex, MPReal};
use jinv::qseries::{cached_j_series, delta, divisor_sum, eisenstein, IntSeries, LaurentSeries};
use proptest::prelude::*;
use rug::ops::Pow;
use rug::Integer;

fn int_series(low: i64, coeffs: Vec<i64>, trunc: i64) -> IntSeries {
    LaurentSeries::new(low, coeffs.into_iter().map(Integer::from).collect(), trunc, Integer::new())
}

#[test]
fn j_coefficients_match_published_table() {
    // OEIS A000521.
    let j = cached_j_series(6).unwrap();
    let expected = ["744", "196884", "21493760", "864299970", "20245856256", "333202640600"];
    for (n, e) in expected.iter().enumerate() {
        assert_eq!(j.c(n as i64).unwrap().to_string(), *e, "c({n})");
    }
}

#[test]
fn ramanujan_tau_is_multiplicative() {
    let d = delta(40).unwrap();
    let tau = |n: i64| d.coeff(n).unwrap().clone();
    assert_eq!(tau(2), -24);
    assert_eq!(tau(3), 252);
    for (m, n) in [(2, 3), (3, 5), (4, 9), (5, 7), (3, 13)] {
        assert_eq!(tau(m * n), tau(m) * tau(n), "tau({m}*{n})");
    }
    // tau(p^2) = tau(p)^2 - p^11.
    assert_eq!(tau(4), tau(2) * tau(2) - Integer::from(2).pow(11));
}

#[test]
fn eisenstein_products() {
    // E4^2 = E8 = 1 + 480 Σ σ7(n) q^n.
    let e4 = eisenstein(4, 30).unwrap();
    let sq = e4.mul(&e4);
    for n in 1..30 {
        assert_eq!(*sq.coeff(n).unwrap(), divisor_sum(7, n as u64).unwrap() * 480, "n={n}");
    }
}

proptest! {
    #[test]
    fn division_undoes_multiplication(
        a in prop::collection::vec(-1000i64..1000, 1..12),
        b in prop::collection::vec(-1000i64..1000, 0..12),
        low in -2i64..3,
    ) {
        let trunc = 12;
        let x = int_series(0, a, trunc);
        let mut bc = vec![1i64];
        bc.extend(b);
        let y = int_series(low, bc, trunc + low);
        let prod = x.mul(&y);
        let back = prod.div(&y).unwrap();
        prop_assert_eq!(back.truncate(prod.trunc() - low).unwrap(), x.truncate(prod.trunc() - low).unwrap());
    }

    #[test]
    fn hecke_images_have_pole_of_order_n(n in 1u32..8) {
        let trunc = 6;
        let need = n as i64 * (trunc - 1) + 2;
        let j = cached_j_series(need).unwrap();
        let img = hecke_image(&j.j1(), n, trunc).unwrap();
        let s = img.series();
        prop_assert_eq!(s.low(), -(n as i64));
        prop_assert_eq!(s.coeff(-(n as i64)).unwrap().clone(), Integer::from(1));
        for e in (1 - n as i64)..=0 {
            prop_assert_eq!(s.coeff(e).unwrap().clone(), Integer::new(), "q^{}", e);
        }
    }

    #[test]
    fn reduction_lands_in_fundamental_domain(x in -20.0f64..20.0, y in 0.05f64..5.0) {
        let tau = MPComplex::from_f64(128, x, y);
        let p = reduce_fundamental(&tau).unwrap();
        let t = &p.tau;
        prop_assert!(t.re().to_f64() >= -0.5 && t.re().to_f64() < 0.5);
        prop_assert!(t.norm_sqr().to_f64() >= 1.0 - 1e-30);
        let back = p.transform.apply(&tau).unwrap();
        prop_assert!((&back - t).abs().to_f64() <= 1e-25 * (1.0 + t.abs().to_f64()));
    }

    #[test]
    fn j_is_invariant_under_generators(x in -0.5f64..0.5, y in 0.8f64..2.0, k in -3i64..3) {
        let tau = MPComplex::from_f64(160, x, y);
        let base = eval_j(&tau, 30).unwrap();
        let scale = 1e-25 * (1.0 + base.abs().to_f64());
        let shifted = Sl2z::translation(k).apply(&tau).unwrap();
        prop_assert!((&eval_j(&shifted, 30).unwrap() - &base).abs().to_f64() <= scale);
        let inverted = Sl2z::S.apply(&tau).unwrap();
        prop_assert!((&eval_j(&inverted, 30).unwrap() - &base).abs().to_f64() <= scale);
    }
}

#[test]
fn j_real_on_imaginary_axis() {
    for y in [1.0, 1.5, 2.5] {
        let tau = MPComplex::new(MPReal::zero(128), MPReal::from_f64(128, y));
        let v = eval_j(&tau, 30).unwrap();
        assert!(v.im().abs().to_f64() <= 1e-20 * v.abs().to_f64());
        assert!(v.re().to_f64() >= 1728.0 - 1e-20);
    }
}
