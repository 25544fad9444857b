//! Containment fuzzing of the interval kernel against exact oracles:
//! rational arithmetic for `+ - * /` and 192-bit floats for `sin cos exp`.

use astro_float::{BigFloat, Consts, RoundingMode};
use chaos_cert_core::Interval;
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::FromPrimitive;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = Ratio<BigInt>;

fn q(x: f64) -> Q {
    Q::from_f64(x).expect("finite")
}

fn random_value(rng: &mut ChaCha8Rng) -> f64 {
    let mantissa: f64 = rng.gen_range(-1.0..1.0);
    let exp: i32 = match rng.gen_range(0..4) {
        0 => 0,
        1 => rng.gen_range(-8..8),
        2 => rng.gen_range(-60..60),
        _ => rng.gen_range(-300..300),
    };
    mantissa * 2f64.powi(exp)
}

fn random_interval(rng: &mut ChaCha8Rng) -> Interval {
    let a = random_value(rng);
    let w = if rng.gen_bool(0.2) {
        0.0
    } else {
        a.abs().max(1e-3) * rng.gen_range(0.0..1.0) * 2f64.powi(rng.gen_range(-40..2))
    };
    Interval::new(a, a + w).unwrap()
}

fn sample(rng: &mut ChaCha8Rng, i: Interval) -> f64 {
    match rng.gen_range(0..4) {
        0 => i.lo(),
        1 => i.hi(),
        _ => (i.lo() + rng.gen_range(0.0..1.0) * (i.hi() - i.lo())).clamp(i.lo(), i.hi()),
    }
}

fn encloses_exact(r: Interval, v: &Q) -> bool {
    q(r.lo()) <= *v && *v <= q(r.hi())
}

#[test]
fn arithmetic_containment_one_million() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1f2e3d4c);
    let mut violations = 0usize;
    let cases = 1_000_000;
    let mut checked = 0usize;
    let mut n = 0usize;
    while checked < cases {
        n += 1;
        let a = random_interval(&mut rng);
        let b = random_interval(&mut rng);
        let (x, y) = (sample(&mut rng, a), sample(&mut rng, b));
        let (r, exact) = match n % 4 {
            0 => (a + b, q(x) + q(y)),
            1 => (a - b, q(x) - q(y)),
            2 => (a * b, q(x) * q(y)),
            _ => {
                if b.contains_zero() || y == 0.0 {
                    continue;
                }
                (a / b, q(x) / q(y))
            }
        };
        checked += 1;
        if r.is_finite() && !encloses_exact(r, &exact) {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
}

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, 192)
}

#[test]
fn elementary_containment() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cc = Consts::new().unwrap();
    let rm = RoundingMode::ToEven;
    let mut violations = 0usize;
    for n in 0..100_000 {
        let c: f64 = rng.gen_range(-60.0..60.0) * if n % 10 == 0 { 1e4 } else { 1.0 };
        let w: f64 = rng.gen_range(0.0..1.0) * 2f64.powi(rng.gen_range(-50..3));
        let a = Interval::new(c, c + w).unwrap();
        let x = sample(&mut rng, a);
        let bx = big(x);
        let (r, exact) = match n % 3 {
            0 => (a.sin(), bx.sin(192, rm, &mut cc)),
            1 => (a.cos(), bx.cos(192, rm, &mut cc)),
            _ => {
                let e = (c / 100.0).clamp(-600.0, 600.0);
                let a = Interval::new(e, e + w).unwrap();
                let x = sample(&mut rng, a);
                (a.exp(), big(x).exp(192, rm, &mut cc))
            }
        };
        let inside = big(r.lo()) <= exact && exact <= big(r.hi());
        if !inside {
            violations += 1;
        }
        if n % 3 != 2 {
            assert!(r.lo() >= -1.0 && r.hi() <= 1.0);
        }
    }
    assert_eq!(violations, 0);
}

fn nested() -> impl Strategy<Value = (Interval, Interval)> {
    (-1e3f64..1e3, 0f64..10.0, 0f64..1.0, 0f64..1.0, 0f64..1.0).prop_map(|(a, w, s, t, u)| {
        let outer = Interval::new(a, a + w).unwrap();
        let lo = a + s * w;
        let hi = (lo + t * u * (a + w - lo)).min(a + w);
        (Interval::new(lo, hi.max(lo)).unwrap(), outer)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn isotonic_arithmetic((a, a2) in nested(), (b, b2) in nested()) {
        prop_assert!(a2.encloses(a) && b2.encloses(b));
        prop_assert!((a2 + b2).encloses(a + b));
        prop_assert!((a2 - b2).encloses(a - b));
        prop_assert!((a2 * b2).encloses(a * b));
        if !b2.contains_zero() {
            prop_assert!((a2 / b2).encloses(a / b));
        }
        prop_assert!(a2.sin().encloses(a.sin()));
        prop_assert!(a2.cos().encloses(a.cos()));
        prop_assert!(a2.sqr().encloses(a.sqr()));
    }
}
