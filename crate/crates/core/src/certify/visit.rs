//! Visits: a forward orbit from the interior of one box into another.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{base_orbit, first_witness, grid_points, locate, CertifySettings};
use crate::boxes::Box2;
use crate::geometry::boxes_annulus_disjoint;
use crate::maps::LiftedAnnulusMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitWitness {
    pub seed: Box2,
    pub m: usize,
    /// Translate of the target that contains the image.
    pub k: i64,
    /// Rigorous image of the seed after `m` steps, relative to translate `k`.
    pub final_enclosure: Box2,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VisitError {
    #[error("no visit found within {max_m} iterates")]
    NoVisitFound { max_m: usize },
    #[error("source and target are not provably disjoint")]
    NotDisjoint,
}

/// Float candidates `(seed, m, k)` sorted by `m`, then by interior margin.
pub fn visit_candidates(
    map: &LiftedAnnulusMap,
    source: &Box2,
    target: &Box2,
    max_m: usize,
    grid: usize,
    settings: &CertifySettings,
) -> Vec<([f64; 2], usize, i64)> {
    let lf = map.circumference_f64();
    let offset = map.lift_offset();
    let mut hits: Vec<(usize, f64, [f64; 2], i64)> = grid_points(source, grid)
        .par_iter()
        .filter_map(|&p| {
            let orbit = base_orbit(map, p, max_m, settings.orbit_bound);
            orbit.iter().enumerate().find_map(|(i, &q)| {
                let (k, margin) = locate(target, q, lf);
                let m = i + 1;
                (margin > 0.0).then_some((m, margin, p, k + offset * m as i64))
            })
        })
        .collect();
    hits.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
    hits.into_iter()
        .take(settings.max_candidates)
        .map(|(m, _, p, k)| (p, m, k))
        .collect()
}

pub fn certify_visit(
    map: &LiftedAnnulusMap,
    source: &Box2,
    target: &Box2,
    max_m: usize,
    settings: &CertifySettings,
) -> Result<VisitWitness, VisitError> {
    let l = map.circumference();
    if !boxes_annulus_disjoint(source, target, l) {
        return Err(VisitError::NotDisjoint);
    }
    let mut grid = settings.seed_grid.max(1);
    let (m, k, w) = loop {
        let cands = visit_candidates(map, source, target, max_m, grid, settings);
        if let Some(found) = first_witness(map, source, target, &cands, settings.max_depth) {
            break found;
        }
        if grid >= settings.max_seed_grid {
            return Err(VisitError::NoVisitFound { max_m });
        }
        grid = (2 * grid).min(settings.max_seed_grid);
    };
    Ok(VisitWitness {
        seed: w.seed,
        m,
        k,
        final_enclosure: w.image.relative_to(k, l),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::ExplicitMap;

    fn b(x0: f64, x1: f64, y0: f64, y1: f64) -> Box2 {
        Box2::from_bounds(x0, x1, y0, y1).unwrap()
    }

    fn twist() -> LiftedAnnulusMap {
        LiftedAnnulusMap::make_explicit(ExplicitMap::RigidTwist { alpha: 0.3, tau: 0.0 }).unwrap()
    }

    #[test]
    fn rotation_visit_in_one_step() {
        let s = CertifySettings::default();
        let src = b(0.0, 0.1, 0.0, 0.1);
        let tgt = b(0.3, 0.4, 0.0, 0.1);
        let v = certify_visit(&twist(), &src, &tgt, 5, &s).unwrap();
        assert_eq!(v.m, 1);
        assert!(src.strictly_encloses(&v.seed));
        assert!(tgt.strictly_encloses(&v.final_enclosure));
        let c = v.seed.midpoint();
        assert!((c[0] - 0.05).abs() < 0.03 && (c[1] - 0.05).abs() < 0.03);
    }

    #[test]
    fn invariant_height_blocks_visit() {
        let s = CertifySettings::default();
        let r = certify_visit(&twist(), &b(0.0, 0.1, 0.0, 0.1), &b(0.3, 0.4, 0.5, 0.6), 20, &s);
        assert_eq!(r.unwrap_err(), VisitError::NoVisitFound { max_m: 20 });
    }

    #[test]
    fn overlapping_boxes_rejected() {
        let s = CertifySettings::default();
        let r = certify_visit(&twist(), &b(0.0, 0.1, 0.0, 0.1), &b(1.05, 1.2, 0.0, 0.1), 5, &s);
        assert_eq!(r.unwrap_err(), VisitError::NotDisjoint);
    }
}
