use chaos_cert_core::maps::LiftedAnnulusMap;
use chaos_cert_core::Box2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisitHit {
    pub seed: [f64; 2],
    pub m: usize,
    /// Distance of the landing point to the target boundary, relative to the
    /// target's half-widths.
    pub clearance: f64,
}

fn clearance(target: &Box2, p: [f64; 2], l: f64) -> f64 {
    let k = ((p[0] - target.x.lo()) / l).floor();
    let x = p[0] - k * l;
    let rel = |lo: f64, hi: f64, v: f64| 2.0 * (v - lo).min(hi - v) / (hi - lo).max(f64::MIN_POSITIVE);
    rel(target.x.lo(), target.x.hi(), x).min(rel(target.y.lo(), target.y.hi(), p[1]))
}

/// Sample points strictly inside `source`: a square grid plus `samples`
/// uniform random points drawn from `seed`.
fn sample_points(source: &Box2, samples: usize, seed: u64) -> Vec<[f64; 2]> {
    let (x0, x1, y0, y1) = (source.x.lo(), source.x.hi(), source.y.lo(), source.y.hi());
    let g = (samples as f64).sqrt().ceil() as usize;
    let mut pts = Vec::with_capacity(g * g + samples);
    for i in 0..g {
        for j in 0..g {
            let fx = (i as f64 + 0.5) / g as f64;
            let fy = (j as f64 + 0.5) / g as f64;
            pts.push([x0 + fx * (x1 - x0), y0 + fy * (y1 - y0)]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let fx: f64 = rng.gen_range(0.0..1.0);
        let fy: f64 = rng.gen_range(0.0..1.0);
        pts.push([x0 + fx * (x1 - x0), y0 + fy * (y1 - y0)]);
    }
    pts.retain(|p| p[0] > x0 && p[0] < x1 && p[1] > y0 && p[1] < y1);
    pts
}

/// Float orbits from `source` that land in `target` (any translate) within
/// `max_m` steps with at least `min_clearance`, best clearance first.
pub fn find_visit_orbit(
    map: &LiftedAnnulusMap,
    source: &Box2,
    target: &Box2,
    max_m: usize,
    samples: usize,
    min_clearance: f64,
    seed: u64,
) -> Vec<VisitHit> {
    let l = map.circumference_f64();
    let mut hits: Vec<VisitHit> = sample_points(source, samples.max(1), seed)
        .par_iter()
        .filter_map(|&p| {
            let mut q = p;
            for m in 1..=max_m {
                q = map.eval_point(q);
                if !q[0].is_finite() || !q[1].is_finite() {
                    return None;
                }
                let c = clearance(target, q, l);
                if c > 0.0 {
                    return (c >= min_clearance).then_some(VisitHit { seed: p, m, clearance: c });
                }
            }
            None
        })
        .collect();
    hits.sort_by(|a, b| b.clearance.total_cmp(&a.clearance).then(a.m.cmp(&b.m)));
    hits
}

#[cfg(test)]
mod tests {
    use super::*;
    use chaos_cert_core::maps::ExplicitMap;

    fn b(x0: f64, x1: f64, y0: f64, y1: f64) -> Box2 {
        Box2::from_bounds(x0, x1, y0, y1).unwrap()
    }

    #[test]
    fn rotation_visit() {
        let m = LiftedAnnulusMap::make_explicit(ExplicitMap::RigidTwist { alpha: 0.3, tau: 0.0 }).unwrap();
        let hits = find_visit_orbit(&m, &b(0.0, 0.1, 0.0, 0.1), &b(0.3, 0.4, 0.0, 0.1), 5, 64, 0.0, 1);
        assert!(!hits.is_empty());
        assert!(hits.iter().all(|h| h.m == 1));
    }

    #[test]
    fn invariant_circles_block() {
        let m = LiftedAnnulusMap::make_explicit(ExplicitMap::RigidTwist { alpha: 0.0, tau: 1.0 }).unwrap();
        let hits = find_visit_orbit(&m, &b(0.0, 0.1, 0.0, 0.1), &b(0.0, 0.1, 0.5, 0.6), 50, 256, 0.0, 1);
        assert!(hits.is_empty());
    }

    #[test]
    fn deterministic_under_seed() {
        let m = LiftedAnnulusMap::make_explicit(ExplicitMap::StandardMap { k: 4.0 }).unwrap();
        let src = b(-0.03, 0.03, -0.03, 0.03);
        let tgt = b(-0.03, 0.03, 2.97, 3.03);
        let a = find_visit_orbit(&m, &src, &tgt, 30, 500, 0.0, 9);
        let c = find_visit_orbit(&m, &src, &tgt, 30, 500, 0.0, 9);
        assert_eq!(a, c);
    }
}
