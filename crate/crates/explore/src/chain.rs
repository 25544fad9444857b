//! Float construction of periodic disk chains from recurrent orbits.

use chaos_cert_core::maps::LiftedAnnulusMap;
use chaos_cert_core::Box2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainProposal {
    pub q: usize,
    pub p: i64,
    pub disks: Vec<Box2>,
    pub exponents: Vec<usize>,
    /// Start of the recurrent orbit and its return distance.
    pub origin: [f64; 2],
    pub return_distance: f64,
    pub seed: u64,
}

fn linf(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
}

/// Orbit of `H = F^q - (pL, 0)` in the plane.
fn h_orbit(map: &LiftedAnnulusMap, z: [f64; 2], q: usize, p: i64, steps: usize) -> Vec<[f64; 2]> {
    let shift = p as f64 * map.circumference_f64();
    let mut out = vec![z];
    let mut cur = z;
    for _ in 0..steps {
        for _ in 0..q {
            cur = map.eval_point(cur);
        }
        cur[0] -= shift;
        if !cur[0].is_finite() || !cur[1].is_finite() {
            break;
        }
        out.push(cur);
    }
    out
}

/// Search `region` for a point whose `H`-orbit returns close to itself
/// while every step moves far, and place `n_disks` disks along that orbit.
pub fn find_chain(
    map: &LiftedAnnulusMap,
    q: usize,
    p: i64,
    region: &Box2,
    n_disks: usize,
    max_m: usize,
    samples: usize,
    seed: u64,
) -> Option<ChainProposal> {
    let n_disks = n_disks.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<[f64; 2]> = (0..samples)
        .map(|_| {
            [
                rng.gen_range(region.x.lo()..region.x.hi()),
                rng.gen_range(region.y.lo()..region.y.hi()),
            ]
        })
        .collect();
    // Score: return distance relative to the smallest step / separation.
    let best = pts
        .par_iter()
        .enumerate()
        .filter_map(|(idx, &z)| {
            let orbit = h_orbit(map, z, q, p, max_m);
            let m = (n_disks.max(2)..orbit.len()).find(|&m| linf(orbit[m], z) < 1e-2)?;
            let ret = linf(orbit[m], z);
            let picks: Vec<usize> = (0..n_disks).map(|j| j * m / n_disks).collect();
            let mut scale = f64::INFINITY;
            for (a, &i) in picks.iter().enumerate() {
                scale = scale.min(linf(orbit[i + 1], orbit[i]));
                for &j in &picks[a + 1..] {
                    scale = scale.min(linf(orbit[i], orbit[j]));
                }
            }
            (scale > 0.0).then_some((ret / scale, idx, m, picks, orbit))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))?;
    let (_, idx, m, picks, orbit) = best;
    let mut scale = f64::INFINITY;
    for (a, &i) in picks.iter().enumerate() {
        scale = scale.min(linf(orbit[i + 1], orbit[i]));
        for &j in &picks[a + 1..] {
            scale = scale.min(linf(orbit[i], orbit[j]));
        }
    }
    let ret = linf(orbit[m], orbit[0]);
    let half = (0.2 * scale).max(2.0 * ret);
    if half >= 0.45 * scale {
        return None;
    }
    let disks = picks
        .iter()
        .map(|&i| {
            let c = orbit[i];
            Box2::from_bounds(c[0] - half, c[0] + half, c[1] - half, c[1] + half).ok()
        })
        .collect::<Option<Vec<_>>>()?;
    let mut exponents: Vec<usize> = picks.windows(2).map(|w| w[1] - w[0]).collect();
    exponents.push(m - picks[picks.len() - 1]);
    Some(ChainProposal {
        q,
        p,
        disks,
        exponents,
        origin: pts[idx],
        return_distance: ret,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chaos_cert_core::maps::ExplicitMap;

    #[test]
    fn rotation_has_no_recurrent_chain() {
        let m = LiftedAnnulusMap::make_explicit(ExplicitMap::RigidTwist { alpha: 0.3, tau: 0.0 }).unwrap();
        let region = Box2::from_bounds(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(find_chain(&m, 1, 0, &region, 2, 30, 200, 1).is_none());
    }

    #[test]
    fn standard_map_chain_shape() {
        let m = LiftedAnnulusMap::make_explicit(ExplicitMap::StandardMap { k: 1.5 }).unwrap();
        let region = Box2::from_bounds(-0.4, 0.4, -0.4, 0.4).unwrap();
        let c = find_chain(&m, 1, 0, &region, 2, 40, 4000, 3).expect("chain");
        assert_eq!(c.disks.len(), 2);
        assert_eq!(c.exponents.len(), 2);
        assert!(c.disks[0].is_disjoint(&c.disks[1]));
        assert!(c.exponents.iter().all(|&e| e >= 1));
    }
}
