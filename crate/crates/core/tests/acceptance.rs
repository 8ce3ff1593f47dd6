//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::time::{Duration, Instant};

use jinv::forward::eval_j;
use jinv::hecke::{denominator_formula_check, two_variable_identity_check};
use jinv::inverter::{invert_j, normalized_cosines, BranchClass, Config};
use jinv::maass::{
    coefficient_magnitude_trace, gaussian, CoefficientValues, maass_coefficients_exact, maass_coefficients_floating, Alpha,
    FloatPrecision, MaassCoefficients,
};
use jinv::mpnum::{mp_exp, MPComplex, MPReal};
use jinv::qseries::{cached_j_series, GaussianRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Integer, Rational};

const PREC: u32 = 256;

struct Suite {
    failed: Vec<String>,
}

impl Suite {
    fn record(&mut self, id: &str, name: &str, elapsed: Duration, budget: Option<Duration>, outcome: Result<String, String>) {
        let over = budget.is_some_and(|b| elapsed > b);
        let (ok, detail) = match outcome {
            Ok(d) if !over => (true, d),
            Ok(d) => (false, format!("{d}; over budget {:?}", budget.unwrap())),
            Err(d) => (false, d),
        };
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{tag} [{id}] {name} ({:.2}s): {detail}", elapsed.as_secs_f64());
        if !ok {
            self.failed.push(id.to_string());
        }
    }

    fn run(&mut self, id: &str, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Result<String, String>) {
        let t = Instant::now();
        let outcome = f();
        self.record(id, name, t.elapsed(), budget, outcome);
    }
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn integers(mc: &MaassCoefficients, range: std::ops::RangeInclusive<usize>) -> Vec<Integer> {
    match mc.values() {
        CoefficientValues::Integer(v) => range.map(|n| v[n].clone()).collect(),
        _ => panic!("expected exact integer mode"),
    }
}

fn check_integers(alpha: i64, expected: &[&str], cube: Option<(i64, u32, i64)>) -> Result<String, String> {
    let a = match cube {
        Some((k, e, s)) => Alpha::Integer(Integer::from(k).pow(e) * s),
        None => Alpha::from_i64(alpha),
    };
    let mc = maass_coefficients_exact(&a, expected.len() + 1).map_err(|e| e.to_string())?;
    let got = integers(&mc, 1..=expected.len());
    for (i, (g, e)) in got.iter().zip(expected).enumerate() {
        if g.to_string() != *e {
            return Err(format!("a({}) = {g}, expected {e}", i + 1));
        }
    }
    Ok(format!("a(1..{}) = {}", expected.len(), expected.join(", ")))
}

fn gauss(re: i64, im: i64) -> GaussianRational {
    GaussianRational::new(Rational::from(re), Rational::from(im))
}

fn b_value(mc: &MaassCoefficients, n: usize, prec: u32) -> MPReal {
    coefficient_magnitude_trace(mc, prec)
        .b_values()
        .into_iter()
        .find(|(k, _)| *k == n)
        .map(|(_, b)| b)
        .expect("b(n) present")
}

fn dist(a: &MPComplex, b: &MPComplex) -> f64 {
    (a - b).abs().to_f64()
}

fn criterion_1(s: &mut Suite) {
    let budget = secs(5);
    s.run("1a", "alpha = 1728 exact a(1..3)", budget, || {
        check_integers(1728, &["984", "574488", "307081056"], None)
    });
    s.run("1b", "alpha = 2*30^3 exact a(1..3)", budget, || {
        check_integers(54000, &["53256", "2835807768", "151013228757024"], None)
    });
    s.run("1c", "alpha = -640320^3 exact a(1)", budget, || {
        check_integers(0, &["-262537412640768744"], Some((640320, 3, -1)))
    });
    s.run("1d", "alpha = 1+i Gaussian a(1..3)", budget, || {
        let mc = maass_coefficients_exact(&gaussian(1, 1), 4).map_err(|e| e.to_string())?;
        let expected = [gauss(-744, 1), gauss(158280, -1486), gauss(-35797022, 1065494)];
        let CoefficientValues::Gaussian(values) = mc.values() else {
            return Err(format!("mode {:?}", mc.mode()));
        };
        let mut wrong = Vec::new();
        for (i, e) in expected.iter().enumerate() {
            let n = i + 1;
            let got = &values[n];
            if got != e {
                wrong.push(format!("a({n}) = {got}, expected {e}"));
            }
        }
        if wrong.is_empty() {
            Ok("a(1..3) match".into())
        } else {
            Err(wrong.join("; "))
        }
    });
    s.run("1e", "j-series c(0), c(1)", budget, || {
        let j = cached_j_series(2).map_err(|e| e.to_string())?;
        let (c0, c1) = (j.c(0).unwrap().clone(), j.c(1).unwrap().clone());
        if c0 == 744 && c1 == 196884 {
            Ok("c(0) = 744, c(1) = 196884".into())
        } else {
            Err(format!("c(0) = {c0}, c(1) = {c1}"))
        }
    });
}

fn criterion_2(s: &mut Suite) {
    s.run("2a", "b(1) for -640320^3 vs sqrt(163)/2, 30 decimals", secs(1), || {
        let a = Alpha::Integer(-Integer::from(640320).pow(3));
        let mc = maass_coefficients_exact(&a, 2).map_err(|e| e.to_string())?;
        let b = b_value(&mc, 1, PREC);
        let target = MPReal::from_i64(PREC, 163).sqrt().unwrap().mul_pow2(-1);
        let d = (&b - &target).abs().to_f64();
        let msg = format!("b(1) = {}, |diff| = {d:.3e}", b.to_decimal(32));
        if d < 0.5e-30 {
            Ok(msg)
        } else {
            Err(msg)
        }
    });
    s.run("2b", "b(3) for 2*30^3 vs sqrt(3), 7 decimals", secs(1), || {
        let mc = maass_coefficients_exact(&Alpha::from_i64(54000), 4).map_err(|e| e.to_string())?;
        let b = b_value(&mc, 3, PREC);
        let d = (&b - &MPReal::from_i64(PREC, 3).sqrt().unwrap()).abs().to_f64();
        let msg = format!("b(3) = {}, |diff| = {d:.3e}", b.to_decimal(10));
        if d < 0.5e-7 {
            Ok(msg)
        } else {
            Err(msg)
        }
    });
    let target = MPReal::parse(PREC, "1.0000220635600152652").unwrap();
    let mut exact_b = None;
    s.run("2c", "b(5000) for 1728, exact integer mode, 19 digits", secs(15 * 60), || {
        let mc = maass_coefficients_exact(&Alpha::from_i64(1728), 5001).map_err(|e| e.to_string())?;
        let b = b_value(&mc, 5000, PREC);
        let d = (&b - &target).abs().to_f64();
        let msg = format!("b(5000) = {}, |diff| = {d:.3e}", b.to_decimal(19));
        exact_b = Some(b);
        if d < 0.5e-19 {
            Ok(msg)
        } else {
            Err(msg)
        }
    });
    s.run("2c'", "b(5000) for 1728, floating fallback, 12 digits", secs(60), || {
        let alpha = MPComplex::from_f64(PREC, 1728.0, 0.0);
        let mc = maass_coefficients_floating(&alpha, 5001, FloatPrecision::Auto { y_hat: None })
            .map_err(|e| e.to_string())?;
        let b = b_value(&mc, 5000, PREC);
        let reference = exact_b.clone().unwrap_or_else(|| target.clone());
        let d = (&b - &reference).abs().to_f64();
        let msg = format!("b(5000) = {}, |diff| = {d:.3e}, {:?}", b.to_decimal(19), mc.mode());
        if d < 0.5e-12 {
            Ok(msg)
        } else {
            Err(msg)
        }
    });
    s.run("2d", "b(100) for 1+i, 10 digits", secs(5), || {
        let mc = maass_coefficients_exact(&gaussian(1, 1), 101).map_err(|e| e.to_string())?;
        let b = b_value(&mc, 100, PREC);
        let d = (&b - &MPReal::parse(PREC, "0.8882136152").unwrap()).abs().to_f64();
        let msg = format!("b(100) = {}", b.to_decimal(12));
        if d < 0.5e-10 {
            Ok(msg)
        } else {
            Err(msg)
        }
    });
}

fn criterion_3(s: &mut Suite) {
    let cfg = Config::default();
    let sqrt = |k: i64| MPReal::from_i64(PREC, k).sqrt().unwrap();
    let fixtures: [(&str, &str, Alpha, MPComplex); 3] = [
        ("3a", "invert(1728) = i", Alpha::from_i64(1728), MPComplex::i(PREC)),
        ("3b", "invert(2*30^3) = sqrt(3) i", Alpha::from_i64(54000), MPComplex::new(MPReal::zero(PREC), sqrt(3))),
        (
            "3c",
            "invert(-640320^3) = (-1 + sqrt(163) i)/2",
            Alpha::Integer(-Integer::from(640320).pow(3)),
            MPComplex::new(MPReal::from_f64(PREC, -0.5), sqrt(163).mul_pow2(-1)),
        ),
    ];
    for (id, name, alpha, z) in fixtures {
        s.run(id, name, secs(60), || {
            let r = invert_j(&alpha, &cfg).map_err(|e| e.to_string())?;
            let d = dist(&r.z, &z);
            let msg = format!("z = {}, |z - z*| = {d:.3e}, residual {}", r.z.to_sci(22), r.residual.to_sci(3));
            if d <= 1e-18 && r.converged {
                Ok(msg)
            } else {
                Err(msg)
            }
        });
    }
    s.run("3d", "invert(0): x = -1/2 exactly", secs(60), || {
        let r = invert_j(&Alpha::from_i64(0), &cfg).map_err(|e| e.to_string())?;
        let exact_x = r.z.re() == &MPReal::from_f64(PREC, -0.5);
        let d = dist(&r.z, &MPComplex::new(MPReal::from_f64(PREC, -0.5), sqrt(3).mul_pow2(-1)));
        let msg = format!("z = {}, |z - rho| = {d:.3e}", r.z.to_sci(22));
        if exact_x && d <= 1e-18 {
            Ok(msg)
        } else {
            Err(msg)
        }
    });
    s.run("3e", "invert(1+i): pre-refinement estimate to 4 decimals", secs(60), || {
        let r = invert_j(&gaussian(1, 1), &cfg).map_err(|e| e.to_string())?;
        let (x, y) = (r.pre_refinement.re().to_decimal(4), r.pre_refinement.im().to_decimal(4));
        let msg = format!("estimate {x} + {y}i, refined {}", r.z.to_sci(12));
        if x == "-0.4772" && y == "0.8882" && r.converged {
            Ok(msg)
        } else {
            Err(msg)
        }
    });
    s.run("3f", "1+i x-candidate -(w103 + w102)/2pi, 12 digits", secs(60), || {
        let mc = maass_coefficients_exact(&gaussian(1, 1), 104).map_err(|e| e.to_string())?;
        let y0 = b_value(&mc, 100, PREC);
        let c = normalized_cosines(&mc, &y0, BranchClass::Interior, &[102, 103]).map_err(|e| e.to_string())?;
        let x = -(&(&c[1].w + &c[0].w) / &MPReal::two_pi(PREC));
        let d = (&x - &MPReal::parse(PREC, "-0.477227209285886").unwrap()).abs().to_f64();
        let msg = format!("x = {} (y0 = b(100)), |diff| = {d:.3e}", x.to_decimal(15));
        if d < 0.5e-12 {
            Ok(msg)
        } else {
            Err(msg)
        }
    });
}

fn criterion_4(s: &mut Suite) {
    s.run("4", "two-variable identity (20, 10) and denominator formula (5, 5)", secs(120), || {
        let a = two_variable_identity_check(20, 10).map_err(|e| e.to_string())?;
        let b = denominator_formula_check(5, 5).map_err(|e| e.to_string())?;
        let msg = format!("{a}; {b}");
        if a.passed() && b.passed() {
            Ok(msg)
        } else {
            Err(msg)
        }
    });
}

/// Distance modulo the boundary identifications of the fundamental domain.
fn domain_distance(z: &MPComplex, tau: &MPComplex) -> f64 {
    let one = MPComplex::from_f64(PREC, 1.0, 0.0);
    let mirror = MPComplex::new(-tau.re(), tau.im().clone());
    let mut best = dist(z, tau).min(dist(z, &(tau + &one))).min(dist(z, &(tau - &one)));
    if (tau.norm_sqr().to_f64() - 1.0).abs() < 1e-12 {
        best = best.min(dist(z, &mirror));
    }
    best
}

fn criterion_5(s: &mut Suite) {
    s.run("5", "20-point round trip, Im in [0.9, 3], 1e-8", secs(300), || {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let cfg = Config::default();
        let mut worst: f64 = 0.0;
        let mut count = 0;
        while count < 20 {
            let x: f64 = rng.gen_range(-0.5..0.5);
            let y: f64 = rng.gen_range(0.9..3.0);
            if x * x + y * y < 1.0 {
                continue;
            }
            count += 1;
            let tau = MPComplex::from_f64(PREC, x, y);
            let alpha = eval_j(&tau, 30).map_err(|e| e.to_string())?;
            let r = invert_j(&Alpha::Float(alpha.with_prec(PREC)), &cfg).map_err(|e| format!("tau = {tau}: {e}"))?;
            let d = domain_distance(&r.z, &tau);
            if d > 1e-8 {
                return Err(format!("tau = {}: got {}, |diff| = {d:.3e}", tau.to_sci(12), r.z.to_sci(12)));
            }
            worst = worst.max(d);
        }
        Ok(format!("worst |z - tau| = {worst:.3e}"))
    });
}

fn criterion_6(s: &mut Suite) {
    s.run("6a", "2*30^3: raw c(1) ~ 1.00007 kept pre-clamp, w1 = 0", secs(60), || {
        let alpha = Alpha::from_i64(54000);
        let r = invert_j(&alpha, &Config::default()).map_err(|e| e.to_string())?;
        let mc = maass_coefficients_exact(&alpha, 2).map_err(|e| e.to_string())?;
        let c = normalized_cosines(&mc, &r.y0, r.branch, &[1]).map_err(|e| e.to_string())?;
        let raw = c[0].raw.to_f64();
        let msg = format!("y0 = {}, raw c(1) = {}, w1 = {}", r.y0.to_decimal(12), c[0].raw.to_decimal(8), c[0].w.to_sci(3));
        if (raw - 1.00007).abs() < 5e-6 && raw > 1.0 && c[0].w.is_zero() && c[0].clamped() == 1.0 {
            Ok(msg)
        } else {
            Err(msg)
        }
    });
    s.run("6b", "cos(arccos x) = x at P = 64, 128, 256", secs(60), || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for prec in [64u32, 128, 256] {
            let tol = 2f64.powi(4 - prec as i32);
            for _ in 0..2000 {
                let x = MPReal::from_f64(prec, rng.gen_range(-1.0..=1.0));
                let d = (&x.acos_clamped().cos() - &x).abs().to_f64();
                if d > tol {
                    return Err(format!("P = {prec}, x = {}, |diff| = {d:.3e}", x.to_sci(20)));
                }
            }
            // exp and log stay consistent at this precision as well.
            let e = mp_exp(&MPReal::one(prec), prec).map_err(|e| e.to_string())?;
            if (e.ln().unwrap() - 1i64).abs().to_f64() > tol {
                return Err(format!("P = {prec}: ln(e) != 1"));
            }
        }
        Ok("2000 samples per precision".into())
    });
}

fn main() {
    let mut suite = Suite { failed: Vec::new() };
    let start = Instant::now();
    criterion_1(&mut suite);
    criterion_2(&mut suite);
    criterion_3(&mut suite);
    criterion_4(&mut suite);
    criterion_5(&mut suite);
    criterion_6(&mut suite);
    println!(
        "acceptance: {} failed ({}) in {:.1}s",
        suite.failed.len(),
        suite.failed.join(", "),
        start.elapsed().as_secs_f64()
    );
    if !suite.failed.is_empty() {
        std::process::exit(1);
    }
}
