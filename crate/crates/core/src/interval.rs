//! Closed intervals with binary64 endpoints and outward rounding.
//!
//! Arithmetic is evaluated in round-to-nearest and then widened by at most one
//! representable step per endpoint. Error-free transforms (TwoSum and fused
//! multiply-add residuals) decide whether the nearest result is already exact
//! or which side it fell on, so exact results such as `[1,2] + [3,4]` keep
//! their exact endpoints.
//!
//! Overflow never produces a silent finite value: operator overloads return
//! the poison interval `(-inf, +inf)` which contains everything, and the
//! `checked_*` methods and [`Interval::check`] turn it into
//! [`IntervalError::Overflow`].

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum IntervalError {
    #[error("interval endpoints must be finite with lo <= hi")]
    InvalidEndpoints,
    #[error("division by an interval containing zero")]
    DivisionByZeroInterval,
    #[error("interval endpoint overflowed the finite range")]
    Overflow,
}

/// Below this magnitude the fused residual may be inexact, so results are
/// nudged both ways instead.
const TINY: f64 = 1.0e-290;

#[inline]
fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err < 0.0 {
        s.next_down()
    } else {
        s
    }
}

#[inline]
fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err > 0.0 {
        s.next_up()
    } else {
        s
    }
}

/// Enclosure `(lo, hi)` of the exact product `a * b`.
#[inline]
fn mul_bounds(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    if a == 0.0 || b == 0.0 {
        return (0.0, 0.0);
    }
    if p.abs() < TINY {
        return (p.next_down(), p.next_up());
    }
    let e = a.mul_add(b, -p);
    if e > 0.0 {
        (p, p.next_up())
    } else if e < 0.0 {
        (p.next_down(), p)
    } else {
        (p, p)
    }
}

/// Enclosure `(lo, hi)` of the exact quotient `a / b`, `b != 0`.
#[inline]
fn div_bounds(a: f64, b: f64) -> (f64, f64) {
    if a == 0.0 {
        return (0.0, 0.0);
    }
    let q = a / b;
    if q.abs() < TINY || a.abs() < TINY || !q.is_finite() {
        return (q.next_down(), q.next_up());
    }
    let r = (-q).mul_add(b, a);
    if r == 0.0 {
        (q, q)
    } else if (r > 0.0) == (b > 0.0) {
        (q, q.next_up())
    } else {
        (q.next_down(), q)
    }
}

/// Two-sided enclosure of π: `[PI, next_up(PI)]` (1 ulp wide).
pub const PI: Interval = Interval {
    lo: std::f64::consts::PI,
    hi: 3.141_592_653_589_793_6,
};

#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const UNIT: Interval = Interval { lo: -1.0, hi: 1.0 };
    const POISON: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(IntervalError::InvalidEndpoints)
        }
    }

    /// Degenerate interval `[x, x]`. Panics on non-finite input.
    pub fn point(x: f64) -> Self {
        assert!(x.is_finite(), "point interval needs a finite value");
        Self { lo: x, hi: x }
    }

    #[inline]
    fn raw(lo: f64, hi: f64) -> Self {
        if lo.is_finite() && hi.is_finite() {
            Self { lo, hi }
        } else {
            Self::POISON
        }
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    /// False only for the overflow poison value.
    #[inline]
    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn check(self) -> Result<Self, IntervalError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(IntervalError::Overflow)
        }
    }

    /// Upper bound on `hi - lo`.
    #[inline]
    pub fn width(self) -> f64 {
        add_up(self.hi, -self.lo)
    }

    /// A float inside the interval, close to the centre.
    #[inline]
    pub fn mid(self) -> f64 {
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// Upper bound on the largest absolute value in the interval.
    #[inline]
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    #[inline]
    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[inline]
    pub fn contains_zero(self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    /// `other ⊆ self`.
    #[inline]
    pub fn encloses(self, other: Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// `other` lies in the open interior of `self`.
    #[inline]
    pub fn strictly_encloses(self, other: Interval) -> bool {
        self.lo < other.lo && other.hi < self.hi
    }

    #[inline]
    pub fn is_disjoint(self, other: Interval) -> bool {
        self.hi < other.lo || other.hi < self.lo
    }

    /// Exact intersection, `None` when empty.
    #[inline]
    pub fn intersect(self, other: Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    #[inline]
    pub fn hull(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Grow both endpoints outward by at least `eps >= 0`.
    pub fn inflate(self, eps: f64) -> Interval {
        Self::raw(add_down(self.lo, -eps), add_up(self.hi, eps))
    }

    /// Bisection at the midpoint.
    pub fn split(self) -> (Interval, Interval) {
        let m = self.mid();
        (
            Interval { lo: self.lo, hi: m },
            Interval { lo: m, hi: self.hi },
        )
    }

    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Interval {
                lo: 0.0,
                hi: self.mag(),
            }
        }
    }

    pub fn sqr(self) -> Interval {
        let a = self.abs();
        let lo = mul_bounds(a.lo, a.lo).0;
        let hi = mul_bounds(a.hi, a.hi).1;
        Self::raw(lo.max(0.0), hi)
    }

    /// Multiply by an exact float.
    pub fn scale(self, c: f64) -> Interval {
        self * Interval::point(c)
    }

    pub fn checked_add(self, rhs: Interval) -> Result<Interval, IntervalError> {
        (self + rhs).check()
    }

    pub fn checked_sub(self, rhs: Interval) -> Result<Interval, IntervalError> {
        (self - rhs).check()
    }

    pub fn checked_mul(self, rhs: Interval) -> Result<Interval, IntervalError> {
        (self * rhs).check()
    }

    pub fn checked_div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        if rhs.contains_zero() {
            return Err(IntervalError::DivisionByZeroInterval);
        }
        (self / rhs).check()
    }

    /// Reciprocal; poison when `0 ∈ self`.
    pub fn recip(self) -> Interval {
        Interval::ONE / self
    }

    pub fn sin(self) -> Interval {
        // sin x = cos(x - π/2); the shift is folded into the critical-point search.
        trig(self, TrigKind::Sin)
    }

    pub fn cos(self) -> Interval {
        trig(self, TrigKind::Cos)
    }

    pub fn exp(self) -> Interval {
        if !self.is_finite() {
            return Self::POISON;
        }
        let lo = self.lo.exp().next_down().next_down().max(0.0);
        let hi = self.hi.exp().next_up().next_up();
        Self::raw(lo, hi)
    }

    pub fn checked_exp(self) -> Result<Interval, IntervalError> {
        self.exp().check()
    }
}

#[derive(Clone, Copy)]
enum TrigKind {
    Sin,
    Cos,
}

/// `[a, b]` for integer `a, b` as an exact interval times π, outward.
fn pi_times(k: f64) -> Interval {
    PI * Interval::point(k)
}

fn trig(x: Interval, kind: TrigKind) -> Interval {
    if !x.is_finite() {
        return Interval::UNIT;
    }
    if x.hi - x.lo >= 6.0 {
        return Interval::UNIT;
    }
    let (f, offset): (fn(f64) -> f64, f64) = match kind {
        TrigKind::Sin => (f64::sin, 0.5),
        TrigKind::Cos => (f64::cos, 0.0),
    };
    let a = f(x.lo);
    let b = f(x.hi);
    let mut lo = a.min(b).next_down().next_down();
    let mut hi = a.max(b).next_up().next_up();
    // Maxima sit at (offset + 2j)π, minima at (offset + 2j + 1)π.
    let first = (x.lo / std::f64::consts::PI - offset).floor() - 1.0;
    let last = (x.hi / std::f64::consts::PI - offset).ceil() + 1.0;
    let mut j = first;
    while j <= last {
        let c = pi_times(j + offset);
        if !(c.hi < x.lo || c.lo > x.hi) {
            if j.rem_euclid(2.0) == 0.0 {
                hi = 1.0;
            } else {
                lo = -1.0;
            }
        }
        j += 1.0;
    }
    Interval {
        lo: lo.clamp(-1.0, 1.0),
        hi: hi.clamp(-1.0, 1.0),
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        Interval::raw(add_down(self.lo, rhs.lo), add_up(self.hi, rhs.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        self + (-rhs)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b) = (self, rhs);
        if !a.is_finite() || !b.is_finite() {
            return Interval::POISON;
        }
        let (l, h) = if a.lo >= 0.0 {
            if b.lo >= 0.0 {
                (mul_bounds(a.lo, b.lo).0, mul_bounds(a.hi, b.hi).1)
            } else if b.hi <= 0.0 {
                (mul_bounds(a.hi, b.lo).0, mul_bounds(a.lo, b.hi).1)
            } else {
                (mul_bounds(a.hi, b.lo).0, mul_bounds(a.hi, b.hi).1)
            }
        } else if a.hi <= 0.0 {
            if b.lo >= 0.0 {
                (mul_bounds(a.lo, b.hi).0, mul_bounds(a.hi, b.lo).1)
            } else if b.hi <= 0.0 {
                (mul_bounds(a.hi, b.hi).0, mul_bounds(a.lo, b.lo).1)
            } else {
                (mul_bounds(a.lo, b.hi).0, mul_bounds(a.lo, b.lo).1)
            }
        } else if b.lo >= 0.0 {
            (mul_bounds(a.lo, b.hi).0, mul_bounds(a.hi, b.hi).1)
        } else if b.hi <= 0.0 {
            (mul_bounds(a.hi, b.lo).0, mul_bounds(a.lo, b.lo).1)
        } else {
            let l = mul_bounds(a.lo, b.hi).0.min(mul_bounds(a.hi, b.lo).0);
            let h = mul_bounds(a.lo, b.lo).1.max(mul_bounds(a.hi, b.hi).1);
            (l, h)
        };
        // Zero products come back as +0.0; normalise -0.0 for stable output.
        Interval::raw(l + 0.0, h + 0.0)
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        let (a, b) = (self, rhs);
        if !a.is_finite() || !b.is_finite() || b.contains_zero() {
            return Interval::POISON;
        }
        let corners = [
            div_bounds(a.lo, b.lo),
            div_bounds(a.lo, b.hi),
            div_bounds(a.hi, b.lo),
            div_bounds(a.hi, b.hi),
        ];
        let l = corners.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let h = corners.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
        Interval::raw(l + 0.0, h + 0.0)
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    fn add(self, rhs: f64) -> Interval {
        self + Interval::point(rhs)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, rhs: f64) -> Interval {
        self * Interval::point(rhs)
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

/// Sum of intervals, outward rounded.
impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn exact_endpoint_sum() {
        assert_eq!(iv(1.0, 2.0) + iv(3.0, 4.0), iv(4.0, 6.0));
    }

    #[test]
    fn sign_case_product() {
        assert_eq!(iv(-1.0, 2.0) * iv(3.0, 4.0), iv(-4.0, 8.0));
        assert_eq!(iv(-1.0, 2.0) * iv(-3.0, 4.0), iv(-6.0, 8.0));
        assert_eq!(iv(-2.0, -1.0) * iv(-3.0, 4.0), iv(-8.0, 6.0));
    }

    #[test]
    fn inexact_sum_straddles_nearest() {
        let s = iv(0.1, 0.1) + iv(0.2, 0.2);
        assert!(s.lo() < s.hi());
        assert!(s.contains(0.1 + 0.2) );
        assert_eq!(s.hi().next_down(), s.lo());
    }

    #[test]
    fn division_by_zero_interval() {
        assert_eq!(
            iv(1.0, 2.0).checked_div(iv(-1.0, 1.0)),
            Err(IntervalError::DivisionByZeroInterval)
        );
        assert_eq!(iv(1.0, 2.0).checked_div(iv(2.0, 4.0)), Ok(iv(0.25, 1.0)));
    }

    #[test]
    fn overflow_is_an_error() {
        let big = iv(f64::MAX, f64::MAX);
        assert_eq!(big.checked_add(big), Err(IntervalError::Overflow));
        assert_eq!(big.checked_mul(iv(2.0, 2.0)), Err(IntervalError::Overflow));
        assert!(!(big * big).is_finite());
        assert_eq!(iv(800.0, 800.0).checked_exp(), Err(IntervalError::Overflow));
    }

    #[test]
    fn invalid_endpoints_rejected() {
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn sin_monotone_branch() {
        let s = iv(0.0, PI.hi() / 2.0).sin();
        assert!(s.lo() <= 0.0 && s.hi() >= 1.0);
        assert!(s.lo() >= -1e-300 && s.hi() <= 1.0);
    }

    #[test]
    fn cos_of_zero_point() {
        let c = iv(0.0, 0.0).cos();
        assert!(c.contains(1.0));
        assert!(c.width() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn trig_critical_points() {
        let s = iv(1.0, 2.0).sin();
        assert_eq!(s.hi(), 1.0);
        let c = iv(3.0, 3.5).cos();
        assert_eq!(c.lo(), -1.0);
        assert_eq!(iv(0.0, 7.0).sin(), Interval::UNIT);
        let far = iv(1.0e6, 1.0e6 + 0.5).sin();
        assert!(far.lo() >= -1.0 && far.hi() <= 1.0);
    }

    #[test]
    fn pi_enclosure_is_tight() {
        assert!(PI.lo() < PI.hi());
        assert_eq!(PI.lo().next_up(), PI.hi());
        // 355/113 overshoots π by 2.7e-7; the enclosure must sit below it.
        assert!(PI.hi() < 355.0 / 113.0);
    }

    #[test]
    fn intersection_empty_is_none() {
        assert_eq!(iv(0.0, 1.0).intersect(iv(2.0, 3.0)), None);
        assert_eq!(iv(0.0, 2.0).intersect(iv(1.0, 3.0)), Some(iv(1.0, 2.0)));
    }

    #[test]
    fn tiny_products_are_enclosed() {
        let a = iv(1e-200, 1e-200);
        let p = a * a;
        assert!(p.lo() <= 0.0 || p.lo() < 1e-300);
        assert!(p.hi() > 0.0);
    }
}
