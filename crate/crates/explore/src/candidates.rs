//! Near-returning boxes and screened disjoint-pair candidates.

use chaos_cert_core::maps::LiftedAnnulusMap;
use chaos_cert_core::Box2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rotation::RotationField;
use crate::visits::find_visit_orbit;
use crate::{annulus_dist, wrap_centered};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExploreError {
    #[error("no candidate pairs found")]
    NoCandidates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExploreParams {
    /// Near-return tolerance as a fraction of `L`.
    pub eps: f64,
    /// Box side as a fraction of `L`.
    pub box_scale: f64,
    /// Suppression radius between kept boxes of equal `k`, as a fraction of the side.
    pub dedup: f64,
    /// Samples per box side used by the float screens.
    pub screen_samples: usize,
    pub max_pairs: usize,
    /// Pairs (best first) that receive a visit search.
    pub seeded_pairs: usize,
    pub max_m: usize,
    pub visit_samples: usize,
    pub clearance: f64,
    pub seed: u64,
    pub bound: f64,
}

impl Default for ExploreParams {
    fn default() -> Self {
        Self {
            eps: 0.05,
            box_scale: 0.06,
            dedup: 0.5,
            screen_samples: 7,
            max_pairs: 32,
            seeded_pairs: 8,
            max_m: 60,
            visit_samples: 256,
            clearance: 0.05,
            seed: 0x5eed,
            bound: 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisitSeed {
    pub point: [f64; 2],
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePair {
    pub u0: Box2,
    pub u1: Box2,
    pub n: usize,
    pub k0: i64,
    pub k1: i64,
    /// Difference of the one-step rotation estimates at the two centres.
    pub predicted_rho: i64,
    /// Smallest relative margin over the float screens.
    pub robustness: f64,
    pub seeds_01: Vec<VisitSeed>,
    pub seeds_10: Vec<VisitSeed>,
    /// Set when either visit direction has no seed.
    pub flagged: bool,
    pub rng_seed: u64,
}

#[derive(Debug, Clone)]
struct NearReturn {
    center: [f64; 2],
    k: i64,
    /// `1 - |displacement| / box side`, positive when the centre's image
    /// lands inside the translate.
    clearance: f64,
    b: Box2,
    /// Float iterates of the sample grid, stages `1..=n`.
    stages: Vec<Vec<[f64; 2]>>,
    corners: Vec<[f64; 2]>,
}

fn near_returns(field: &RotationField, params: &ExploreParams) -> Vec<NearReturn> {
    let l = field.circumference;
    let half = 0.5 * params.box_scale * l;
    let mut found: Vec<NearReturn> = (0..field.len())
        .into_par_iter()
        .filter_map(|i| {
            let p = field.point(i);
            let q = field.images[i]?;
            let k = ((q[0] - p[0]) / l).round();
            let d = [q[0] - p[0] - k * l, q[1] - p[1]];
            if d[0].hypot(d[1]) >= params.eps * l {
                return None;
            }
            let clearance = 1.0 - 0.5 * d[0].abs().max(d[1].abs()) / half;
            if clearance <= 0.0 {
                return None;
            }
            let center = [p[0] + 0.5 * d[0], p[1] + 0.5 * d[1]];
            let b = Box2::from_bounds(center[0] - half, center[0] + half, center[1] - half, center[1] + half).ok()?;
            Some(NearReturn {
                center,
                k: k as i64,
                clearance,
                b,
                stages: Vec::new(),
                corners: Vec::new(),
            })
        })
        .collect();
    found.sort_by(|a, b| {
        b.clearance
            .total_cmp(&a.clearance)
            .then(a.k.cmp(&b.k))
            .then(a.center[0].total_cmp(&b.center[0]))
            .then(a.center[1].total_cmp(&b.center[1]))
    });

    // Keep the best box of each neighbourhood.
    let mut kept: Vec<NearReturn> = Vec::new();
    for c in found {
        if kept.iter().all(|o| o.k != c.k || annulus_dist(o.center, c.center, l) >= params.dedup * 2.0 * half) {
            kept.push(c);
        }
    }
    kept
}

fn sample_grid(b: &Box2, g: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(g * g);
    for i in 0..g {
        for j in 0..g {
            let fx = i as f64 / (g - 1).max(1) as f64;
            let fy = j as f64 / (g - 1).max(1) as f64;
            out.push([b.x.lo() + fx * (b.x.hi() - b.x.lo()), b.y.lo() + fy * (b.y.hi() - b.y.lo())]);
        }
    }
    out
}

fn attach_stages(map: &LiftedAnnulusMap, c: &mut NearReturn, n: usize, g: usize) {
    let mut cur = sample_grid(&c.b, g);
    c.corners = cur.clone();
    for _ in 0..n {
        cur = cur.iter().map(|&p| map.eval_point(p)).collect();
        c.stages.push(cur.clone());
    }
}

fn cloud_dist(a: &[[f64; 2]], b: &[[f64; 2]], l: f64) -> f64 {
    a.iter()
        .flat_map(|p| b.iter().map(move |q| annulus_dist(*p, *q, l)))
        .fold(f64::INFINITY, f64::min)
}

/// Margin of the float inessentiality screen for the returning lift, in
/// units of `L`: strip slack if the hull is narrower than `L`, otherwise
/// the separation from the nearest nonzero translate.
fn inessential_margin(c: &NearReturn, l: f64) -> f64 {
    let mut pts = c.corners.clone();
    for (i, s) in c.stages.iter().enumerate() {
        let shift = (i as f64 + 1.0) * c.k as f64 * l;
        pts.extend(s.iter().map(|p| [p[0] - shift, p[1]]));
    }
    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[0]), b.max(p[0])));
    if hi - lo < l {
        return (l - (hi - lo)) / l;
    }
    let reach = ((hi - lo) / l).ceil() as i64;
    let mut best = f64::INFINITY;
    for p in &pts {
        for q in &pts {
            for j in (-reach..=reach).filter(|&j| j != 0) {
                let d = (p[0] - q[0] - j as f64 * l).abs().max((p[1] - q[1]).abs());
                best = best.min(d);
            }
        }
    }
    best / l
}

fn seeds(
    map: &LiftedAnnulusMap,
    src: &Box2,
    tgt: &Box2,
    params: &ExploreParams,
) -> Vec<VisitSeed> {
    find_visit_orbit(map, src, tgt, params.max_m, params.visit_samples, params.clearance, params.seed)
        .into_iter()
        .take(3)
        .map(|h| VisitSeed { point: h.seed, m: h.m })
        .collect()
}

/// Candidate `n`-disjoint pairs with `k1 - k0 >= rho_min`, most robust first.
pub fn propose_candidates(
    map: &LiftedAnnulusMap,
    field: &RotationField,
    rho_min: i64,
    n: usize,
    params: &ExploreParams,
) -> Result<Vec<CandidatePair>, ExploreError> {
    let l = field.circumference;
    let n = n.max(1);
    let mut boxes = near_returns(field, params);
    boxes
        .par_iter_mut()
        .for_each(|c| attach_stages(map, c, n, params.screen_samples.max(2)));
    let ess: Vec<f64> = boxes.par_iter().map(|c| inessential_margin(c, l)).collect();

    let mut pairs = Vec::new();
    for (a, ca) in boxes.iter().enumerate() {
        for (b, cb) in boxes.iter().enumerate() {
            if cb.k - ca.k >= rho_min.max(1) {
                pairs.push((a, b));
            }
        }
    }
    let half = 0.5 * params.box_scale * l;
    let mut scored: Vec<(f64, usize, usize)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (ca, cb) = (&boxes[a], &boxes[b]);
            let mut disj = f64::INFINITY;
            for sa in &ca.stages {
                for sb in &cb.stages {
                    disj = disj.min(cloud_dist(sa, sb, l));
                }
            }
            let r = ca
                .clearance
                .min(cb.clearance)
                .min(disj / half)
                .min(ess[a] * l / half)
                .min(ess[b] * l / half);
            (r, a, b)
        })
        .filter(|s| s.0 > 0.0)
        .collect();
    scored.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    scored.truncate(params.max_pairs);
    if scored.is_empty() {
        return Err(ExploreError::NoCandidates);
    }

    let out = scored
        .iter()
        .enumerate()
        .map(|(rank, &(r, a, b))| {
            let (ca, cb) = (&boxes[a], &boxes[b]);
            let (s01, s10) = if rank < params.seeded_pairs {
                (seeds(map, &ca.b, &cb.b, params), seeds(map, &cb.b, &ca.b, params))
            } else {
                (Vec::new(), Vec::new())
            };
            CandidatePair {
                u0: ca.b,
                u1: cb.b,
                n,
                k0: ca.k,
                k1: cb.k,
                predicted_rho: cb.k - ca.k,
                robustness: r,
                flagged: s01.is_empty() || s10.is_empty(),
                seeds_01: s01,
                seeds_10: s10,
                rng_seed: params.seed,
            }
        })
        .collect();
    Ok(out)
}

/// Hausdorff distance between two boxes on the annulus (max norm).
pub fn box_hausdorff(a: &Box2, b: &Box2, l: f64) -> f64 {
    let dx = wrap_centered(a.midpoint()[0] - b.midpoint()[0], l);
    let hx = 0.5 * (a.x.width() - b.x.width());
    let dy = a.midpoint()[1] - b.midpoint()[1];
    let hy = 0.5 * (a.y.width() - b.y.width());
    (dx.abs() + hx.abs()).max(dy.abs() + hy.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chaos_cert_core::maps::ExplicitMap;

    fn twist(alpha: f64, tau: f64) -> LiftedAnnulusMap {
        LiftedAnnulusMap::make_explicit(ExplicitMap::RigidTwist { alpha, tau }).unwrap()
    }

    #[test]
    fn rigid_rotation_has_no_candidates() {
        let m = twist(0.3, 0.0);
        let f = RotationField::compute(&m, 32, 41, [-0.5, 3.5], 1, 1e6);
        assert_eq!(
            propose_candidates(&m, &f, 1, 1, &ExploreParams::default()).unwrap_err(),
            ExploreError::NoCandidates
        );
    }

    #[test]
    fn integrable_twist_pairs_are_flagged() {
        let m = twist(0.0, 1.0);
        let f = RotationField::compute(&m, 32, 41, [-0.5, 3.5], 1, 1e6);
        let params = ExploreParams {
            max_m: 20,
            visit_samples: 64,
            ..Default::default()
        };
        let c = propose_candidates(&m, &f, 3, 1, &params).unwrap();
        assert!(c.iter().any(|p| p.predicted_rho == 3 && p.u0.y.contains(0.0) && p.u1.y.contains(3.0)));
        assert!(c.iter().all(|p| p.flagged && p.seeds_01.is_empty() && p.seeds_10.is_empty()));
    }

    #[test]
    fn hausdorff_of_boxes() {
        let a = Box2::from_bounds(0.0, 1.0, 0.0, 1.0).unwrap();
        let b = Box2::from_bounds(0.25, 1.0, 0.0, 2.0).unwrap();
        assert_eq!(box_hausdorff(&a, &b, 10.0), 1.0);
        assert_eq!(box_hausdorff(&a, &a, 10.0), 0.0);
    }
}
