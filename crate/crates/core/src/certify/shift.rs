//! Self-return shift of a box: the integer `k` with `F(Ũ) ∩ (Ũ + kL) ≠ ∅`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{base_orbit, first_witness, grid_points, locate, CertifySettings, Verdict};
use crate::boxes::Box2;
use crate::geometry::{EnclosureSet, LiftedBox};
use crate::interval::Interval;
use crate::maps::{eval_lift, LiftedAnnulusMap, MapError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftCertificate {
    pub k: i64,
    pub witness: Box2,
    /// Rigorous image of the witness, relative to the translate `k`.
    pub witness_image: Box2,
    /// Hull of the outer image enclosure, relative to the translate `k`.
    pub image_hull: Box2,
    /// Outer enclosure of `F(Ũ)` used for the uniqueness evidence.
    pub image: EnclosureSet,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShiftError {
    #[error("no witness found for any candidate shift")]
    NoWitness,
    #[error("witnesses exist for shifts {0:?}")]
    AmbiguousShift(Vec<i64>),
    #[error("image enclosure meets translates {others:?} besides the witnessed shift {k}")]
    UniquenessUnproven { k: i64, others: Vec<i64> },
    #[error("image enclosure misses every translate")]
    RefutedIntersection { image: EnclosureSet },
    #[error(transparent)]
    Map(#[from] MapError),
}

impl ShiftError {
    pub fn verdict(&self) -> Verdict {
        match self {
            ShiftError::RefutedIntersection { .. } => Verdict::Refuted,
            _ => Verdict::Inconclusive,
        }
    }
}

/// Translates `U + jL` whose closure meets the member `m`.
pub(crate) fn touching_translates(m: &LiftedBox, u: &Box2, l: Interval) -> Vec<i64> {
    let ll = l.lo();
    let lo = ((m.planar.x.lo() - u.x.hi()) / ll).floor() as i64 - 1;
    let hi = ((m.planar.x.hi() - u.x.lo()) / ll).ceil() as i64 + 1;
    (lo..=hi)
        .map(|j| j + m.shift)
        .filter(|&k| !m.relative_to(k, l).is_disjoint(u))
        .collect()
}

pub fn certify_shift(
    map: &LiftedAnnulusMap,
    u: &Box2,
    settings: &CertifySettings,
) -> Result<ShiftCertificate, ShiftError> {
    let l = map.circumference();
    let image = eval_lift(map, &LiftedBox::from_planar(*u), 1, &settings.subdivision)?;
    let touched: BTreeSet<i64> = image
        .members
        .iter()
        .flat_map(|m| touching_translates(m, u, l))
        .collect();
    if touched.is_empty() {
        return Err(ShiftError::RefutedIntersection { image });
    }

    // Float seeds per touched translate, best interior margin first.
    let offset = map.lift_offset();
    let lf = map.circumference_f64();
    let mut seeds: Vec<(f64, [f64; 2], i64)> = grid_points(u, settings.seed_grid)
        .into_iter()
        .filter_map(|p| {
            let q = *base_orbit(map, p, 1, settings.orbit_bound).first()?;
            let (k, margin) = locate(u, q, lf);
            (margin > 0.0).then_some((margin, p, k + offset))
        })
        .collect();
    seeds.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.2.cmp(&b.2)));

    let mut witnesses = Vec::new();
    for &k in &touched {
        let mut cands: Vec<([f64; 2], usize, i64)> = seeds
            .iter()
            .filter(|s| s.2 == k)
            .take(settings.max_candidates)
            .map(|s| (s.1, 1, k))
            .collect();
        // The box midpoint is always tried first.
        cands.insert(0, (u.midpoint(), 1, k));
        if let Some((_, k, w)) = first_witness(map, u, u, &cands, settings.max_depth) {
            witnesses.push((k, w));
        }
    }
    match witnesses.len() {
        0 => Err(ShiftError::NoWitness),
        1 => {
            let (k, w) = witnesses.pop().expect("one witness");
            let others: Vec<i64> = touched.iter().copied().filter(|&j| j != k).collect();
            if !others.is_empty() {
                return Err(ShiftError::UniquenessUnproven { k, others });
            }
            let image_hull = image.hull_relative(k, l).expect("nonempty image");
            Ok(ShiftCertificate {
                k,
                witness: w.seed,
                witness_image: w.image.relative_to(k, l),
                image_hull,
                image,
            })
        }
        _ => Err(ShiftError::AmbiguousShift(witnesses.iter().map(|w| w.0).collect())),
    }
}
