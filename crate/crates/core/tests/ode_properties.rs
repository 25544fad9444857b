//! Flow enclosures against a high-accuracy float reference, and
//! isotonicity of fixed-step enclosures.

use chaos_cert_core::ode::{flow_time_t, IntegrationSettings, VectorFieldSpec};
use chaos_cert_core::Box2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pendulum() -> VectorFieldSpec {
    VectorFieldSpec::pendulum(9.8, 1.0, 3.0, 2.5).unwrap()
}

/// Classical RK4 with Kahan-compensated state updates.
fn reference(field: &VectorFieldSpec, p: [f64; 2], steps: u32) -> [f64; 2] {
    let h = field.period / steps as f64;
    let mut z = p;
    let mut comp = [0.0f64; 2];
    for i in 0..steps {
        let t = field.period * i as f64 / steps as f64;
        let f = |z: [f64; 2], t: f64| field.eval_f64(z[0], z[1], t);
        let k1 = f(z, t);
        let k2 = f([z[0] + 0.5 * h * k1[0], z[1] + 0.5 * h * k1[1]], t + 0.5 * h);
        let k3 = f([z[0] + 0.5 * h * k2[0], z[1] + 0.5 * h * k2[1]], t + 0.5 * h);
        let k4 = f([z[0] + h * k3[0], z[1] + h * k3[1]], t + h);
        for c in 0..2 {
            let inc = h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]) - comp[c];
            let next = z[c] + inc;
            comp[c] = (next - z[c]) - inc;
            z[c] = next;
        }
    }
    z
}

const TOL: f64 = 1e-12;

#[test]
fn reference_orbits_inside_enclosures() {
    let field = pendulum();
    let settings = IntegrationSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0de);
    let mut checked = 0;
    while checked < 100 {
        let p = [rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(-3.0..3.0)];
        let fine = reference(&field, p, 1 << 16);
        let coarse = reference(&field, p, 1 << 15);
        let err = (fine[0] - coarse[0]).abs().max((fine[1] - coarse[1]).abs());
        // RK4 error drops 16x per halving, so `err` bounds the fine error.
        assert!(err < TOL, "reference not converged at {p:?}: {err:e}");
        let enc = flow_time_t(&field, &Box2::point(p[0], p[1]), &settings).unwrap();
        let inside = |iv: chaos_cert_core::Interval, v: f64| iv.lo() - TOL <= v && v <= iv.hi() + TOL;
        assert!(
            inside(enc.x, fine[0]) && inside(enc.y, fine[1]),
            "reference {fine:?} outside enclosure {enc:?} from {p:?}"
        );
        checked += 1;
    }
}

fn nested_boxes() -> impl Strategy<Value = (Box2, Box2)> {
    (
        0.0..std::f64::consts::TAU,
        -2.5..2.5f64,
        -30.0..-8.0f64,
        (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64),
    )
        .prop_map(|(x, y, log_w, (a, b, c, d))| {
            let w = 2f64.powf(log_w);
            let outer = Box2::from_bounds(x, x + w, y, y + w).unwrap();
            let (x0, x1) = (x + a.min(b) * w, x + a.max(b) * w);
            let (y0, y1) = (y + c.min(d) * w, y + c.max(d) * w);
            (Box2::from_bounds(x0, x1, y0, y1).unwrap(), outer)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fixed_step_enclosures_are_isotone((inner, outer) in nested_boxes()) {
        prop_assert!(outer.encloses(&inner));
        let settings = IntegrationSettings {
            fixed_step: true,
            steps_per_period: 256,
            max_steps_per_period: 256,
            ..Default::default()
        };
        let field = pendulum();
        let big = flow_time_t(&field, &outer, &settings);
        let small = flow_time_t(&field, &inner, &settings);
        if let (Ok(big), Ok(small)) = (big, small) {
            prop_assert!(big.encloses(&small), "{small:?} not inside {big:?}");
        } else {
            prop_assert!(false, "fixed-step enclosure failed for {outer:?}");
        }
    }
}
