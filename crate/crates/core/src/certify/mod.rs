//! Three-valued certificates built on the map and geometry layers.
//!
//! Positive claims always rest on a witness box whose rigorous image lies
//! strictly inside a target; negative claims rest on outer enclosures that
//! miss a target. Overlap of enclosures never counts as either.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxes::Box2;
use crate::geometry::LiftedBox;
use crate::maps::{LiftedAnnulusMap, SubdivisionSettings};

pub mod chain;
pub mod chaos;
pub mod dpd;
pub mod markov;
pub mod replay;
pub mod shift;
pub mod visit;

pub use chain::{certify_chain, ChainCertificate, ChainError};
pub use chaos::{certify_chaos, ChaosCertificate, ChaosReason, Declared, Theorem};
pub use dpd::{certify_ndpd, DpdCertificate, DpdIssue, InessentialCriterion};
pub use markov::{certify_markov, MarkovCertificate, MarkovImages, MarkovRect, Orientation, ShiftVerdict};
pub use replay::Mismatch;
pub use shift::{certify_shift, ShiftCertificate, ShiftError};
pub use visit::{certify_visit, VisitError, VisitWitness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

impl Verdict {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Certified => 0,
            Verdict::Refuted => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertifySettings {
    pub subdivision: SubdivisionSettings,
    /// Halving levels tried when shrinking a witness around its seed.
    pub max_depth: u32,
    /// Float seeds per side of the sampling grid.
    pub seed_grid: usize,
    /// Visit searches double the grid up to this size while no witness is found.
    pub max_seed_grid: usize,
    /// Float candidates handed to the rigorous shrink, best first.
    pub max_candidates: usize,
    /// Float orbits with |y| above this are discarded.
    pub orbit_bound: f64,
}

impl Default for CertifySettings {
    fn default() -> Self {
        Self {
            subdivision: SubdivisionSettings::default(),
            max_depth: 46,
            seed_grid: 32,
            max_seed_grid: 256,
            max_candidates: 8,
            orbit_bound: 1e6,
        }
    }
}

/// A sub-box of a source whose rigorous image lies inside a target translate.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Witness {
    pub seed: Box2,
    pub image: LiftedBox,
}

/// Cell centres of an `n x n` grid over `b`.
pub(crate) fn grid_points(b: &Box2, n: usize) -> Vec<[f64; 2]> {
    let n = n.max(1);
    let (x0, y0) = (b.x.lo(), b.y.lo());
    let (wx, wy) = (b.x.hi() - x0, b.y.hi() - y0);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let fx = (i as f64 + 0.5) / n as f64;
            let fy = (j as f64 + 0.5) / n as f64;
            out.push([x0 + fx * wx, y0 + fy * wy]);
        }
    }
    out
}

/// Relative depth of `p` inside `b`; negative outside.
pub(crate) fn interior_margin(b: &Box2, p: [f64; 2]) -> f64 {
    let rel = |lo: f64, hi: f64, v: f64| {
        let w = (hi - lo).max(f64::MIN_POSITIVE);
        (v - lo).min(hi - v) / w
    };
    rel(b.x.lo(), b.x.hi(), p[0]).min(rel(b.y.lo(), b.y.hi(), p[1]))
}

/// Translate index `k` placing `p` over `target + kL` in x, and the margin.
pub(crate) fn locate(target: &Box2, p: [f64; 2], l: f64) -> (i64, f64) {
    let k = ((p[0] - target.x.lo()) / l).floor();
    let local = [p[0] - k * l, p[1]];
    (k as i64, interior_margin(target, local))
}

/// Float orbit of the offset-free lift; lift offsets are added as integers
/// by callers so that seed choice is independent of the offset.
pub(crate) fn base_orbit(map: &LiftedAnnulusMap, p: [f64; 2], m: usize, bound: f64) -> Vec<[f64; 2]> {
    let base = map.clone().with_lift_offset(0);
    let mut out = Vec::with_capacity(m);
    let mut q = p;
    for _ in 0..m {
        q = base.eval_point(q);
        if !(q[1].abs() <= bound && q[0].is_finite()) {
            break;
        }
        out.push(q);
    }
    out
}

/// Shrink boxes centred at `seed` (halving per level) until the rigorous
/// `power`-fold image lies strictly inside `target + kL`.
pub(crate) fn shrink_to_target(
    map: &LiftedAnnulusMap,
    source: &Box2,
    seed: [f64; 2],
    power: usize,
    target: &Box2,
    k: i64,
    max_depth: u32,
) -> Option<Witness> {
    let l = map.circumference();
    let (wx, wy) = (source.x.width(), source.y.width());
    for depth in 1..=max_depth {
        let f = 0.5f64.powi(depth as i32 + 1);
        let (hx, hy) = (wx * f, wy * f);
        let Ok(w) = Box2::from_bounds(seed[0] - hx, seed[0] + hx, seed[1] - hy, seed[1] + hy) else {
            continue;
        };
        if !source.strictly_encloses(&w) {
            continue;
        }
        let Ok(img) = map.image_power(&LiftedBox::from_planar(w), power) else {
            continue;
        };
        if target.strictly_encloses(&img.relative_to(k, l)) {
            return Some(Witness { seed: w, image: img });
        }
    }
    None
}

/// Try candidates in order and return the first successful witness.
/// Candidates are `(seed, power, k)`; the search runs in parallel but the
/// result is the lowest-index success, so it is deterministic.
pub(crate) fn first_witness(
    map: &LiftedAnnulusMap,
    source: &Box2,
    target: &Box2,
    candidates: &[([f64; 2], usize, i64)],
    max_depth: u32,
) -> Option<(usize, i64, Witness)> {
    candidates
        .par_iter()
        .map(|&(p, m, k)| shrink_to_target(map, source, p, m, target, k, max_depth).map(|w| (m, k, w)))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .next()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_margin() {
        let b = Box2::from_bounds(0.0, 1.0, 0.0, 2.0).unwrap();
        let g = grid_points(&b, 2);
        assert_eq!(g, vec![[0.25, 0.5], [0.25, 1.5], [0.75, 0.5], [0.75, 1.5]]);
        assert_eq!(interior_margin(&b, [0.5, 1.0]), 0.5);
        assert!(interior_margin(&b, [1.5, 1.0]) < 0.0);
        let (k, m) = locate(&b, [3.5, 1.0], 1.0);
        assert_eq!(k, 3);
        assert_eq!(m, 0.5);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Verdict::Certified.exit_code(), 0);
        assert_eq!(Verdict::Refuted.exit_code(), 1);
        assert_eq!(Verdict::Inconclusive.exit_code(), 2);
    }
}
