//! Covering-space bookkeeping for boxes on the annulus `ℝ² / (x ~ x + L)`.
//!
//! A [`LiftedBox`] is a planar box plus an integer count of circumferences,
//! standing for `planar + shift·(L, 0)`. Translating by whole circumferences
//! only touches the integer, so translation is exact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boxes::Box2;
use crate::interval::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error("box x-width {width} is not below the circumference {circumference}")]
    TooWide { width: f64, circumference: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftedBox {
    pub planar: Box2,
    pub shift: i64,
}

impl LiftedBox {
    pub fn new(planar: Box2, shift: i64) -> Self {
        Self { planar, shift }
    }

    pub fn from_planar(planar: Box2) -> Self {
        Self { planar, shift: 0 }
    }

    pub fn translate(self, k: i64) -> Self {
        Self {
            shift: self.shift + k,
            ..self
        }
    }

    /// Outer enclosure of `planar + (shift - base)·L` in planar coordinates.
    pub fn relative_to(&self, base: i64, l: Interval) -> Box2 {
        translate_box(&self.planar, self.shift - base, l)
    }
}

/// `b + k·(L, 0)`, outward rounded; exact for `k = 0`.
pub fn translate_box(b: &Box2, k: i64, l: Interval) -> Box2 {
    if k == 0 {
        *b
    } else {
        b.shift_x(l * Interval::point(k as f64))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnclosureSet {
    pub stage: usize,
    pub members: Vec<LiftedBox>,
}

impl EnclosureSet {
    pub fn single(stage: usize, b: LiftedBox) -> Self {
        Self {
            stage,
            members: vec![b],
        }
    }

    pub fn translated(&self, k: i64) -> Self {
        Self {
            stage: self.stage,
            members: self.members.iter().map(|m| m.translate(k)).collect(),
        }
    }

    /// Hull of all members expressed relative to shift `base`.
    pub fn hull_relative(&self, base: i64, l: Interval) -> Option<Box2> {
        self.members
            .iter()
            .map(|m| m.relative_to(base, l))
            .reduce(|a, b| a.hull(&b))
    }
}

/// Canonical representative: `(b - k·L, k)` with the x-midpoint in `[0, L)`.
pub fn reduce(b: &Box2, l: Interval) -> Result<(Box2, i64), GeometryError> {
    let width = b.x.width();
    if width >= l.lo() {
        return Err(GeometryError::TooWide {
            width,
            circumference: l.hi(),
        });
    }
    let lm = l.mid();
    let mut k = (b.x.mid() / lm).floor() as i64;
    let mut out = translate_box(b, -k, l);
    for _ in 0..4 {
        let m = out.x.mid();
        if m < 0.0 {
            k -= 1;
        } else if m >= lm {
            k += 1;
        } else {
            break;
        }
        out = translate_box(b, -k, l);
    }
    Ok((out, k))
}

/// Integer range of `j` for which `b + j·L` can meet `a` in x.
fn translate_range(a: &Box2, b: &Box2, l: Interval) -> std::ops::RangeInclusive<i64> {
    let lo = ((a.x.lo() - b.x.hi()) / l.lo()).floor() as i64 - 1;
    let hi = ((a.x.hi() - b.x.lo()) / l.lo()).ceil() as i64 + 1;
    lo..=hi
}

fn one_sided_disjoint(a: &Box2, b: &Box2, l: Interval, skip_zero: bool) -> bool {
    translate_range(a, b, l)
        .filter(|&j| !(skip_zero && j == 0))
        .all(|j| a.is_disjoint(&translate_box(b, j, l)))
}

/// `a` meets no integer translate of `b`, checked from both sides.
pub fn boxes_annulus_disjoint(a: &Box2, b: &Box2, l: Interval) -> bool {
    if a.y.is_disjoint(b.y) {
        return true;
    }
    one_sided_disjoint(a, b, l, false) && one_sided_disjoint(b, a, l, false)
}

/// True when the projections of `a` and `b` to the annulus are disjoint.
/// False means the outer enclosures overlap; it is not an intersection proof.
pub fn annulus_disjoint(a: &EnclosureSet, b: &EnclosureSet, l: Interval) -> bool {
    use rayon::prelude::*;
    let mut sorted: Vec<Box2> = b.members.iter().map(|m| m.planar).collect();
    sorted.sort_by(|p, q| p.y.lo().total_cmp(&q.y.lo()));
    a.members.par_iter().all(|am| {
        let ab = am.planar;
        let end = sorted.partition_point(|s| s.y.lo() <= ab.y.hi());
        sorted[..end]
            .iter()
            .filter(|s| s.y.hi() >= ab.y.lo())
            .all(|s| boxes_annulus_disjoint(&ab, s, l))
    })
}

/// Strip criterion: the hull of every member of the chain (shift bookkeeping
/// preserved) has x-extent below `L`, so the projected union lies in an open
/// vertical strip, which is a disk in the annulus.
pub fn inessential_union(chain: &[EnclosureSet], l: Interval) -> bool {
    let Some(base) = chain.first().and_then(|s| s.members.first()).map(|m| m.shift) else {
        return true;
    };
    let hull = chain
        .iter()
        .filter_map(|s| s.hull_relative(base, l))
        .reduce(|a, b| a.hull(&b));
    match hull {
        Some(h) => h.x.width() < l.lo(),
        None => true,
    }
}

/// Translate criterion: the lifted union meets none of its nonzero integer
/// translates. Valid for a connected lifted union (consecutive stages of the
/// returning lift overlap); the union then projects injectively and a small
/// filled neighbourhood of it is an open disk in the annulus.
pub fn inessential_by_translates(chain: &[EnclosureSet], l: Interval) -> bool {
    use rayon::prelude::*;
    let Some(base) = chain.first().and_then(|s| s.members.first()).map(|m| m.shift) else {
        return true;
    };
    let boxes: Vec<Box2> = chain
        .iter()
        .flat_map(|s| s.members.iter().map(move |m| m.relative_to(base, l)))
        .collect();
    let Some(hull) = boxes.iter().copied().reduce(|a, b| a.hull(&b)) else {
        return true;
    };
    let reach = (hull.x.width() / l.lo()).ceil() as i64 + 1;
    let mut sorted = boxes.clone();
    sorted.sort_by(|p, q| p.y.lo().total_cmp(&q.y.lo()));
    boxes.par_iter().all(|a| {
        let end = sorted.partition_point(|s| s.y.lo() <= a.y.hi());
        sorted[..end]
            .iter()
            .filter(|s| s.y.hi() >= a.y.lo())
            .all(|b| {
                (-reach..=reach)
                    .filter(|&j| j != 0)
                    .all(|j| a.is_disjoint(&translate_box(b, j, l)))
            })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::PI;

    fn b(x0: f64, x1: f64, y0: f64, y1: f64) -> Box2 {
        Box2::from_bounds(x0, x1, y0, y1).unwrap()
    }

    fn two_pi() -> Interval {
        PI * 2.0
    }

    #[test]
    fn reduce_paper_u1() {
        let u1 = b(8.5937151981236, 8.9937151981236, -6.050373124965, -5.270373124965);
        let (r, k) = reduce(&u1, two_pi()).unwrap();
        assert_eq!(k, 1);
        assert!((r.x.lo() - 2.3105).abs() < 1e-4 && (r.x.hi() - 2.7105).abs() < 1e-4);
        assert!(r.x.lo() <= 8.5937151981236 - 2.0 * std::f64::consts::PI);
        assert_eq!(r.y, u1.y);
    }

    #[test]
    fn reduce_unit_examples() {
        let one = Interval::ONE;
        assert_eq!(reduce(&b(0.1, 0.3, 0., 1.), one).unwrap(), (b(0.1, 0.3, 0., 1.), 0));
        let (r, k) = reduce(&b(-0.9, -0.7, 0., 1.), one).unwrap();
        assert_eq!(k, -1);
        assert!(r.x.encloses(Interval::new(0.1, 0.3).unwrap()));
        assert!(r.x.width() < 0.2 + 1e-15);
    }

    #[test]
    fn reduce_rejects_wide() {
        assert!(matches!(
            reduce(&b(0.0, 1.0, 0., 1.), Interval::ONE),
            Err(GeometryError::TooWide { .. })
        ));
    }

    #[test]
    fn reduce_straddling_cut_keeps_one_piece() {
        let (r, k) = reduce(&b(0.9, 1.2, 0., 1.), Interval::ONE).unwrap();
        assert_eq!(k, 1);
        assert!(r.x.lo() < 0.0 && r.x.hi() > 0.0);
    }

    fn set(bs: &[Box2]) -> EnclosureSet {
        EnclosureSet {
            stage: 0,
            members: bs.iter().map(|x| LiftedBox::from_planar(*x)).collect(),
        }
    }

    #[test]
    fn paper_boxes_disjoint_by_y() {
        let u0 = b(2.871046020894, 3.271046020894, 1.092867786346, 1.492867786346);
        let u1 = b(2.3105, 2.7105, -6.050373124965, -5.270373124965);
        assert!(annulus_disjoint(&set(&[u0]), &set(&[u1]), two_pi()));
    }

    #[test]
    fn box_against_itself() {
        let u = b(0.1, 0.2, 0.0, 1.0);
        assert!(!annulus_disjoint(&set(&[u]), &set(&[u]), Interval::ONE));
    }

    #[test]
    fn translate_overlap_detected() {
        let a = set(&[b(0.0, 0.1, 0.0, 1.0)]);
        let c = set(&[b(0.95, 1.05, 0.0, 1.0)]);
        assert!(!annulus_disjoint(&a, &c, Interval::ONE));
        assert!(!annulus_disjoint(&c, &a, Interval::ONE));
        let d = set(&[b(0.5, 0.6, 0.0, 1.0)]);
        assert!(annulus_disjoint(&a, &d, Interval::ONE));
    }

    fn twist_chain(n: usize) -> Vec<EnclosureSet> {
        (0..=n)
            .map(|i| {
                let dx = 0.3 * i as f64;
                EnclosureSet::single(i, LiftedBox::from_planar(b(dx, 0.05 + dx, 0.0, 1.0)))
            })
            .collect()
    }

    #[test]
    fn strip_criterion_thresholds() {
        assert!(inessential_union(&twist_chain(2), Interval::ONE));
        assert!(inessential_union(&twist_chain(3), Interval::ONE));
        assert!(!inessential_union(&twist_chain(4), Interval::ONE));
    }

    #[test]
    fn translate_criterion_accepts_long_thin_union() {
        // Two stacked bars, total extent 1.5 > L but no self-overlap mod 1.
        let chain = vec![
            EnclosureSet::single(0, LiftedBox::from_planar(b(0.0, 0.9, 0.0, 0.1))),
            EnclosureSet::single(1, LiftedBox::from_planar(b(0.6, 1.5, 0.05, 0.15))),
        ];
        assert!(!inessential_union(&chain, Interval::ONE));
        assert!(!inessential_by_translates(&chain, Interval::ONE));
        let chain = vec![
            EnclosureSet::single(0, LiftedBox::from_planar(b(0.0, 0.9, 0.0, 0.1))),
            EnclosureSet::single(1, LiftedBox::from_planar(b(0.6, 1.5, 0.1, 0.3))),
        ];
        // Touching at y = 0.1: the union wraps onto itself once translated.
        assert!(!inessential_by_translates(&chain, Interval::ONE));
        let chain = vec![
            EnclosureSet::single(0, LiftedBox::from_planar(b(0.0, 0.9, 0.0, 0.1))),
            EnclosureSet::single(1, LiftedBox::from_planar(b(0.85, 1.7, 0.08, 0.2))),
            EnclosureSet::single(2, LiftedBox::from_planar(b(1.6, 1.8, 0.2, 0.4))),
        ];
        assert!(!inessential_union(&chain, Interval::ONE));
        assert!(!inessential_by_translates(&chain, Interval::ONE));
        // Staircase wider than L whose translates miss it.
        let chain = vec![
            EnclosureSet::single(0, LiftedBox::from_planar(b(0.0, 0.5, 0.0, 0.1))),
            EnclosureSet::single(1, LiftedBox::from_planar(b(0.45, 0.9, 0.09, 0.2))),
            EnclosureSet::single(2, LiftedBox::from_planar(b(0.85, 1.3, 0.19, 0.3))),
        ];
        assert!(!inessential_union(&chain, Interval::ONE));
        assert!(inessential_by_translates(&chain, Interval::ONE));
    }

    #[test]
    fn shifts_count_in_chain() {
        let chain = vec![
            EnclosureSet::single(0, LiftedBox::new(b(0.1, 0.2, 0., 1.), 0)),
            EnclosureSet::single(1, LiftedBox::new(b(0.1, 0.2, 0., 1.), 2)),
        ];
        assert!(!inessential_union(&chain, Interval::ONE));
        let back = vec![chain[0].clone(), chain[1].translated(-2)];
        assert!(inessential_union(&back, Interval::ONE));
    }
}
