//! Horizontal crossings of a parallelogram by its iterates.
//!
//! A rectangle is `c + s·u + t·v` for `s, t ∈ [-1, 1]`. For a target
//! translate `R + jL`, the crossing condition reads, in that translate's
//! `(s, t)` coordinates:
//! - the image of the side `s = -1` has `s < -1`, the image of `s = +1`
//!   has `s > 1` (or both reversed),
//! - every part of the image of `R` with `|s| ≤ 1` has `|t| < 1`.

use serde::{Deserialize, Serialize};

use super::{CertifySettings, Verdict};
use crate::boxes::Box2;
use crate::geometry::{EnclosureSet, LiftedBox};
use crate::interval::Interval;
use crate::maps::{eval_stage, LiftedAnnulusMap, MapError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovRect {
    #[serde(with = "pair")]
    pub center: [f64; 2],
    /// Half-axis along which the image is stretched.
    #[serde(with = "pair")]
    pub u: [f64; 2],
    /// Transverse half-axis.
    #[serde(with = "pair")]
    pub v: [f64; 2],
}

mod pair {
    use crate::hexfloat::hex_f64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Hex(#[serde(with = "hex_f64")] f64);

    pub fn serialize<S: Serializer>(v: &[f64; 2], s: S) -> Result<S::Ok, S::Error> {
        [Hex(v[0]), Hex(v[1])].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; 2], D::Error> {
        let [a, b] = <[Hex; 2]>::deserialize(d)?;
        Ok([a.0, b.0])
    }
}

impl MarkovRect {
    pub fn axis_aligned(b: &Box2) -> Self {
        let c = b.midpoint();
        Self {
            center: c,
            u: [0.5 * b.x.width(), 0.0],
            v: [0.0, 0.5 * b.y.width()],
        }
    }

    /// Box enclosing the points with `s ∈ s_range`, `t ∈ t_range`.
    pub fn piece(&self, s: Interval, t: Interval) -> Box2 {
        let x = Interval::point(self.center[0]) + s * self.u[0] + t * self.v[0];
        let y = Interval::point(self.center[1]) + s * self.u[1] + t * self.v[1];
        Box2::new(x, y)
    }

    /// `g x g` covering boxes of the part with `s ∈ s_range`.
    pub fn cover(&self, s_range: Interval, g: usize) -> Vec<Box2> {
        let g = g.max(1);
        let cut = |iv: Interval, i: usize| {
            let a = iv.lo() + (iv.hi() - iv.lo()) * i as f64 / g as f64;
            let b = iv.lo() + (iv.hi() - iv.lo()) * (i + 1) as f64 / g as f64;
            Interval::new(a, b.max(a)).expect("ordered")
        };
        let s_cells = if s_range.width() == 0.0 { 1 } else { g };
        let mut out = Vec::with_capacity(s_cells * g);
        for i in 0..s_cells {
            let s = if s_cells == 1 { s_range } else { cut(s_range, i) };
            for j in 0..g {
                out.push(self.piece(s, cut(Interval::UNIT, j)));
            }
        }
        out
    }

    fn det(&self) -> Interval {
        Interval::point(self.u[0]) * self.v[1] - Interval::point(self.v[0]) * self.u[1]
    }

    /// Enclosure of `(s, t)` coordinates of box `p` relative to this rectangle.
    pub fn coordinates(&self, p: &Box2) -> Option<(Interval, Interval)> {
        let det = self.det();
        if det.contains_zero() {
            return None;
        }
        let dx = p.x + (-self.center[0]);
        let dy = p.y + (-self.center[1]);
        let s = (dx * self.v[1] - dy * self.v[0]) / det;
        let t = (dy * self.u[0] - dx * self.u[1]) / det;
        Some((s, t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    Preserved,
    Reversed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftVerdict {
    pub shift: i64,
    pub verdict: Verdict,
    pub orientation: Option<Orientation>,
    /// `None` when certified, otherwise the first failed condition.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovCertificate {
    pub rect: MarkovRect,
    pub n_iter: usize,
    pub verdicts: Vec<ShiftVerdict>,
    pub images: MarkovImages,
    pub symbols: usize,
    /// `log(symbols) / n_iter` when at least two shifts are certified.
    pub entropy_lower_bound: Option<f64>,
    pub verdict: Verdict,
}

/// Outer enclosures of the `n_iter`-th images of the two sides and of the
/// whole rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovImages {
    pub left: EnclosureSet,
    pub right: EnclosureSet,
    pub whole: EnclosureSet,
}

/// Per-shift verdicts and the summary fields derived from them.
pub fn evaluate_shifts(
    rect: &MarkovRect,
    n_iter: usize,
    shifts: &[i64],
    images: &MarkovImages,
    l: Interval,
) -> (Vec<ShiftVerdict>, usize, Option<f64>, Verdict) {
    let verdicts: Vec<ShiftVerdict> = shifts
        .iter()
        .map(|&j| check_shift(rect, j, &images.left, &images.right, &images.whole, l))
        .collect();
    let symbols = verdicts.iter().filter(|v| v.verdict == Verdict::Certified).count();
    let horseshoe = symbols >= 2;
    let entropy = horseshoe.then(|| (symbols as f64).ln() / n_iter as f64);
    let verdict = if horseshoe {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    };
    (verdicts, symbols, entropy, verdict)
}

fn iterate(
    map: &LiftedAnnulusMap,
    boxes: Vec<Box2>,
    n_iter: usize,
    settings: &CertifySettings,
    scale: f64,
) -> Result<EnclosureSet, MapError> {
    let mut set = EnclosureSet {
        stage: 0,
        members: boxes.into_iter().map(LiftedBox::from_planar).collect(),
    };
    for _ in 0..n_iter {
        set = eval_stage(map, &set, &settings.subdivision, scale)?;
    }
    Ok(set)
}

/// Range of the `s` coordinate over all members, relative to translate `j`.
fn s_hull(rect: &MarkovRect, set: &EnclosureSet, j: i64, l: Interval) -> Option<Interval> {
    set.members
        .iter()
        .map(|m| rect.coordinates(&m.relative_to(j, l)).map(|c| c.0))
        .try_fold(None::<Interval>, |acc, s| {
            let s = s?;
            Some(Some(acc.map_or(s, |a| a.hull(s))))
        })?
}

fn check_shift(
    rect: &MarkovRect,
    j: i64,
    left: &EnclosureSet,
    right: &EnclosureSet,
    whole: &EnclosureSet,
    l: Interval,
) -> ShiftVerdict {
    let fail = |why: &str| ShiftVerdict {
        shift: j,
        verdict: Verdict::Inconclusive,
        orientation: None,
        failure: Some(why.into()),
    };
    let (Some(sl), Some(sr)) = (s_hull(rect, left, j, l), s_hull(rect, right, j, l)) else {
        return fail("degenerate frame");
    };
    let orientation = if sl.hi() < -1.0 && sr.lo() > 1.0 {
        Orientation::Preserved
    } else if sl.lo() > 1.0 && sr.hi() < -1.0 {
        Orientation::Reversed
    } else {
        return fail("sides do not straddle the target");
    };
    for m in &whole.members {
        let Some((s, t)) = rect.coordinates(&m.relative_to(j, l)) else {
            return fail("degenerate frame");
        };
        let meets_column = s.hi() >= -1.0 && s.lo() <= 1.0;
        if meets_column && !(t.lo() > -1.0 && t.hi() < 1.0) {
            return fail("image leaves the band inside the target");
        }
    }
    ShiftVerdict {
        shift: j,
        verdict: Verdict::Certified,
        orientation: Some(orientation),
        failure: None,
    }
}

const EDGE_PIECES: usize = 256;

pub fn certify_markov(
    map: &LiftedAnnulusMap,
    rect: &MarkovRect,
    n_iter: usize,
    shifts: &[i64],
    settings: &CertifySettings,
) -> Result<MarkovCertificate, MapError> {
    if n_iter == 0 {
        return Err(MapError::InvalidParameter("n_iter must be at least 1".into()));
    }
    let l = map.circumference();
    let g = 8;
    let whole_box = rect.piece(Interval::UNIT, Interval::UNIT);
    let scale = whole_box.width();
    // Edges are segments: short pieces keep their boxes thin across the
    // segment, which subdivision of a fat box cannot recover.
    let left = iterate(map, rect.cover(Interval::point(-1.0), EDGE_PIECES), n_iter, settings, scale)?;
    let right = iterate(map, rect.cover(Interval::point(1.0), EDGE_PIECES), n_iter, settings, scale)?;
    let whole = iterate(map, rect.cover(Interval::UNIT, g), n_iter, settings, scale)?;
    let images = MarkovImages { left, right, whole };
    let (verdicts, symbols, entropy_lower_bound, verdict) = evaluate_shifts(rect, n_iter, shifts, &images, l);
    Ok(MarkovCertificate {
        rect: *rect,
        n_iter,
        verdicts,
        images,
        symbols,
        entropy_lower_bound,
        verdict,
    })
}
