//! Deck-translation equivariance of enclosures and lift/label behaviour of ρ.

use chaos_cert_core::certify::{certify_ndpd, CertifySettings};
use chaos_cert_core::geometry::{EnclosureSet, LiftedBox};
use chaos_cert_core::maps::{eval_stage, ExplicitMap, LiftedAnnulusMap, SubdivisionSettings};
use chaos_cert_core::Box2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_map(rng: &mut ChaCha8Rng) -> LiftedAnnulusMap {
    let id = if rng.gen_bool(0.5) {
        ExplicitMap::StandardMap {
            k: rng.gen_range(0.2..6.0),
        }
    } else {
        ExplicitMap::RigidTwist {
            alpha: rng.gen_range(0.0..1.0),
            tau: rng.gen_range(-3.0..3.0),
        }
    };
    LiftedAnnulusMap::make_explicit(id).unwrap()
}

fn random_box(rng: &mut ChaCha8Rng) -> Box2 {
    let x = rng.gen_range(-2.0..2.0);
    let y = rng.gen_range(-2.0..2.0);
    let w = rng.gen_range(1e-6..0.08);
    let h = rng.gen_range(1e-6..0.08);
    Box2::from_bounds(x, x + w, y, y + h).unwrap()
}

#[test]
fn images_commute_with_deck_translations() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xdec);
    let pendulum = LiftedAnnulusMap::make_pendulum(9.8, 1.0, 3.0, 4.0 * std::f64::consts::PI / 5.0).unwrap();
    let settings = SubdivisionSettings {
        target_width: 0.05,
        ..Default::default()
    };
    for case in 0..100 {
        let map = if case % 10 == 0 { pendulum.clone() } else { random_map(&mut rng) };
        let mut b = random_box(&mut rng);
        if !map.is_explicit() {
            b = Box2::from_bounds(b.x.lo(), b.x.lo() + 0.01, b.y.lo(), b.y.lo() + 0.01).unwrap();
        }
        let k: i64 = rng.gen_range(-1000..1000);
        let base = LiftedBox::from_planar(b);
        let img = map.image(&base).unwrap();
        let moved = map.image(&base.translate(k)).unwrap();
        assert_eq!(moved.planar, img.planar, "case {case}");
        assert_eq!(moved.shift, img.shift + k, "case {case}");

        let set = EnclosureSet::single(0, base);
        let a = eval_stage(&map, &set, &settings, b.width()).unwrap();
        let c = eval_stage(&map, &set.translated(k), &settings, b.width()).unwrap();
        assert_eq!(c, a.translated(k), "case {case}");

        let j: i64 = rng.gen_range(-5..5);
        let shifted = map.clone().with_lift_offset(map.lift_offset() + j).image(&base).unwrap();
        assert_eq!(shifted.planar, img.planar);
        assert_eq!(shifted.shift, img.shift + j);
    }
}

/// Boxes whose self-shift is known in closed form, with that shift.
fn rho_config(rng: &mut ChaCha8Rng) -> (LiftedAnnulusMap, [(Box2, i64); 2]) {
    if rng.gen_bool(0.5) {
        // Standard map: (0, m) is fixed by F - m.
        let map = LiftedAnnulusMap::make_explicit(ExplicitMap::StandardMap {
            k: rng.gen_range(0.5..6.0),
        })
        .unwrap();
        let m0 = rng.gen_range(-4..5);
        let m1 = m0 + rng.gen_range(1..5) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let mut pick = |m: i64| {
            let (dx, dy) = (rng.gen_range(-0.02..0.02), rng.gen_range(-0.02..0.02));
            let r = rng.gen_range(0.03..0.1);
            let b = Box2::from_bounds(dx - r, dx + r, m as f64 + dy - r, m as f64 + dy + r).unwrap();
            (b, m)
        };
        let first = pick(m0);
        (map, [first, pick(m1)])
    } else {
        // Rigid twist: the row y moves by alpha + tau·y.
        let alpha = rng.gen_range(0.0..1.0);
        let tau = [1.0, 2.0, 3.0, -1.0, -2.0][rng.gen_range(0..5)];
        let map = LiftedAnnulusMap::make_explicit(ExplicitMap::RigidTwist { alpha, tau }).unwrap();
        let n0 = rng.gen_range(-4..5);
        let n1 = n0 + rng.gen_range(1..5);
        let mut pick = |n: i64| {
            let delta = rng.gen_range(-0.1..0.1);
            let y = (n as f64 - alpha + delta) / tau;
            let x = rng.gen_range(-1.0..1.0);
            (Box2::from_bounds(x, x + 0.5, y - 0.005, y + 0.005).unwrap(), n)
        };
        let first = pick(n0);
        (map, [first, pick(n1)])
    }
}

#[test]
fn rho_is_lift_invariant_and_antisymmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5110);
    let settings = CertifySettings::default();
    let mut certified = 0;
    for case in 0..100 {
        let (map, [(u0, k0), (u1, k1)]) = rho_config(&mut rng);
        let c = certify_ndpd(&map, &u0, &u1, 1, &settings);
        if let Some(r) = c.rho {
            assert_eq!(r, k1 - k0, "case {case}: oracle shifts {k0}, {k1}");
            certified += 1;
        }
        let j: i64 = rng.gen_range(-6..7);
        let other = map.clone().with_lift_offset(j);
        let c2 = certify_ndpd(&other, &u0, &u1, 1, &settings);
        assert_eq!(c2.rho, c.rho, "case {case}: lift offset {j}");
        assert_eq!(c2.k0, c.k0.map(|k| k + j));
        assert_eq!(c2.k1, c.k1.map(|k| k + j));
        let swapped = certify_ndpd(&map, &u1, &u0, 1, &settings);
        assert_eq!(swapped.rho, c.rho.map(|r| -r), "case {case}: swap");
    }
    assert!(certified >= 80, "only {certified} configs had both shifts certified");
}
