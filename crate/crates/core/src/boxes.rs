//! Axis-aligned planar boxes.

use crate::interval::{Interval, IntervalError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Box2 {
    pub x: Interval,
    pub y: Interval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Box2 {
    pub fn new(x: Interval, y: Interval) -> Self {
        Self { x, y }
    }

    pub fn from_bounds(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self, IntervalError> {
        Ok(Self {
            x: Interval::new(x0, x1)?,
            y: Interval::new(y0, y1)?,
        })
    }

    pub fn point(x: f64, y: f64) -> Self {
        Self {
            x: Interval::point(x),
            y: Interval::point(y),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.x.width().max(self.y.width())
    }

    pub fn midpoint(&self) -> [f64; 2] {
        [self.x.mid(), self.y.mid()]
    }

    pub fn contains_point(&self, p: [f64; 2]) -> bool {
        self.x.contains(p[0]) && self.y.contains(p[1])
    }

    /// `other ⊆ self`.
    pub fn encloses(&self, other: &Box2) -> bool {
        self.x.encloses(other.x) && self.y.encloses(other.y)
    }

    /// `other` lies in the open interior of `self`.
    pub fn strictly_encloses(&self, other: &Box2) -> bool {
        self.x.strictly_encloses(other.x) && self.y.strictly_encloses(other.y)
    }

    pub fn is_disjoint(&self, other: &Box2) -> bool {
        self.x.is_disjoint(other.x) || self.y.is_disjoint(other.y)
    }

    pub fn hull(&self, other: &Box2) -> Box2 {
        Box2 {
            x: self.x.hull(other.x),
            y: self.y.hull(other.y),
        }
    }

    pub fn intersect(&self, other: &Box2) -> Option<Box2> {
        Some(Box2 {
            x: self.x.intersect(other.x)?,
            y: self.y.intersect(other.y)?,
        })
    }

    pub fn inflate(&self, eps: f64) -> Box2 {
        Box2 {
            x: self.x.inflate(eps),
            y: self.y.inflate(eps),
        }
    }

    /// Bisect along `axis`; `None` when that side has no interior.
    pub fn split(&self, axis: Axis) -> Option<(Box2, Box2)> {
        match axis {
            Axis::X => {
                let (a, b) = self.x.split();
                (a.lo() < a.hi() && b.lo() < b.hi())
                    .then_some((Box2 { x: a, ..*self }, Box2 { x: b, ..*self }))
            }
            Axis::Y => {
                let (a, b) = self.y.split();
                (a.lo() < a.hi() && b.lo() < b.hi())
                    .then_some((Box2 { y: a, ..*self }, Box2 { y: b, ..*self }))
            }
        }
    }

    /// Bisect along the wider side (relative to `scale_x`, `scale_y`).
    pub fn split_widest(&self, scale: [f64; 2]) -> Option<(Box2, Box2)> {
        let rx = self.x.width() / scale[0];
        let ry = self.y.width() / scale[1];
        let (first, second) = if rx >= ry {
            (Axis::X, Axis::Y)
        } else {
            (Axis::Y, Axis::X)
        };
        self.split(first).or_else(|| self.split(second))
    }

    /// Translate horizontally by an interval, outward.
    pub fn shift_x(&self, dx: Interval) -> Box2 {
        Box2 {
            x: self.x + dx,
            y: self.y,
        }
    }

    /// Bisect both sides, yielding four quarters.
    pub fn quarters(&self) -> Vec<Box2> {
        let (xa, xb) = self.x.split();
        let (ya, yb) = self.y.split();
        vec![
            Box2::new(xa, ya),
            Box2::new(xb, ya),
            Box2::new(xa, yb),
            Box2::new(xb, yb),
        ]
    }
}
