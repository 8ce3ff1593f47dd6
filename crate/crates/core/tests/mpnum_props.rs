use jinv::mpnum::{bits_for_digits, mp_exp, mp_log_abs, MPComplex, MPReal};
use proptest::prelude::*;

const PRECS: [u32; 3] = [64, 128, 256];

fn tol(prec: u32, slack: i32) -> f64 {
    2f64.powi(slack - prec as i32)
}

proptest! {
    #[test]
    fn cos_acos_round_trip(x in -1.0f64..=1.0) {
        for prec in PRECS {
            let v = MPReal::from_f64(prec, x);
            let back = v.acos_clamped().cos();
            prop_assert!((&back - &v).abs().to_f64() <= tol(prec, 4), "P={prec} x={x}");
        }
    }

    #[test]
    fn acos_clamps_outside_unit_interval(x in 1.0f64..4.0) {
        for prec in PRECS {
            prop_assert!(MPReal::from_f64(prec, x).acos_clamped().is_zero());
            let w = MPReal::from_f64(prec, -x).acos_clamped();
            prop_assert!((&w - &MPReal::pi(prec)).abs().to_f64() <= tol(prec, 2));
        }
    }

    #[test]
    fn exp_of_log_abs_is_abs(re in -1e6f64..1e6, im in -1e6f64..1e6) {
        prop_assume!(re.abs() + im.abs() > 1e-9);
        for prec in PRECS {
            let z = MPComplex::from_f64(prec, re, im);
            let l = mp_log_abs(&z).unwrap();
            let back = mp_exp(&l, prec).unwrap();
            let a = z.abs();
            prop_assert!(((&back - &a) / &a).abs().to_f64() <= tol(prec, 8));
        }
    }

    #[test]
    fn doubling_precision_agrees(x in 0.1f64..50.0) {
        for prec in PRECS {
            let lo = mp_exp(&MPReal::from_f64(prec, x), prec).unwrap();
            let hi = mp_exp(&MPReal::from_f64(2 * prec, x), 2 * prec).unwrap();
            let rel = ((&lo.with_prec(2 * prec) - &hi) / &hi).abs().to_f64();
            prop_assert!(rel <= tol(prec, 4), "P={prec} rel={rel}");
        }
    }

    #[test]
    fn division_inverts_multiplication(a in -1e3f64..1e3, b in -1e3f64..1e3, c in 0.5f64..1e3, d in -1e3f64..1e3) {
        let prec = 128;
        let x = MPComplex::from_f64(prec, a, b);
        let y = MPComplex::from_f64(prec, c, d);
        let back = (&x * &y).checked_div(&y).unwrap();
        prop_assert!((&back - &x).abs().to_f64() <= tol(prec, 12) * (1.0 + x.abs().to_f64()));
    }

    #[test]
    fn fixed_decimals_match_f64_rounding(x in -1e4f64..1e4) {
        let prec = 256;
        let v = MPReal::from_f64(prec, x);
        let ours: f64 = v.to_decimal(6).parse().unwrap();
        prop_assert!((ours - x).abs() <= 5.0000001e-7);
    }
}

#[test]
fn digits_to_bits() {
    assert!(bits_for_digits(30) >= 100);
    assert!(bits_for_digits(30) <= 128);
}

#[test]
fn decimal_rounding_edges() {
    let v = MPReal::parse(128, "0.99995").unwrap();
    assert_eq!(v.to_decimal(3), "1.000");
    assert_eq!(MPReal::parse(128, "-0.0004").unwrap().to_decimal(3), "0.000");
    assert_eq!(MPReal::from_i64(64, 1728).to_decimal(2), "1728.00");
}
