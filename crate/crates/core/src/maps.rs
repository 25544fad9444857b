//! Annulus maps with a chosen lift and a uniform enclosure interface.
//!
//! Every evaluation first reduces the input box to its canonical
//! representative, evaluates there, reduces the image, and re-applies the
//! integer shifts. Outputs therefore depend on the input shift only through
//! integer addition, which makes degree-one equivariance exact.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boxes::Box2;
use crate::geometry::{reduce, EnclosureSet, GeometryError, LiftedBox};
use crate::interval::{Interval, PI};
use crate::ode::{flow_time_t, flow_time_t_f64, IntegrationSettings, OdeError, VectorFieldSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("invalid map parameter: {0}")]
    InvalidParameter(String),
    #[error("sub-box budget of {budget} exhausted at stage {stage}")]
    BudgetExhausted { stage: usize, budget: usize },
    #[error("integration failure: {0}")]
    IntegrationFailure(#[from] OdeError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("enclosure overflowed")]
    Overflow,
    #[error("float orbit left the bounded region")]
    OrbitEscaped,
}

/// Closed-form lifts on the unit annulus (`L = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExplicitMap {
    /// `(x + y + (K/2π) sin 2πx, y + (K/2π) sin 2πx)`.
    StandardMap {
        #[serde(rename = "K")]
        k: f64,
    },
    /// `(x + alpha + tau·y, y)`.
    RigidTwist { alpha: f64, tau: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Backend {
    Explicit(ExplicitMap),
    Poincare {
        field: VectorFieldSpec,
        settings: IntegrationSettings,
        /// RK4 steps per period for float evaluation.
        float_steps: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedAnnulusMap {
    backend: Backend,
    circumference: Interval,
    lift_offset: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubdivisionSettings {
    /// Largest accepted image width of one sub-box.
    pub target_width: f64,
    /// Cap on sub-box evaluations per image stage.
    pub max_boxes: usize,
    /// Smallest sub-box width relative to the source box before giving up.
    pub min_width_ratio: f64,
}

impl Default for SubdivisionSettings {
    fn default() -> Self {
        Self {
            target_width: 0.05,
            max_boxes: 1 << 14,
            min_width_ratio: 1.0 / (1u64 << 20) as f64,
        }
    }
}

/// `2π` as an interval.
pub fn two_pi() -> Interval {
    PI * 2.0
}

impl LiftedAnnulusMap {
    /// Driven pendulum with forcing frequency `omega`; the period is the
    /// binary64 value nearest to `2π/omega`.
    pub fn make_pendulum(g: f64, l: f64, amplitude: f64, omega: f64) -> Result<Self, MapError> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(MapError::InvalidParameter(format!("omega = {omega} must be positive")));
        }
        let period = 2.0 * std::f64::consts::PI / omega;
        Self::pendulum_with_period(g, l, amplitude, period, IntegrationSettings::default())
    }

    pub fn pendulum_with_period(
        g: f64,
        l: f64,
        amplitude: f64,
        period: f64,
        settings: IntegrationSettings,
    ) -> Result<Self, MapError> {
        let field = VectorFieldSpec::pendulum(g, l, amplitude, period)
            .map_err(|e| MapError::InvalidParameter(e.to_string()))?;
        settings
            .validate()
            .map_err(|e| MapError::InvalidParameter(e.to_string()))?;
        Ok(Self {
            backend: Backend::Poincare {
                field,
                settings,
                float_steps: 1024,
            },
            circumference: two_pi(),
            lift_offset: 0,
        })
    }

    pub fn make_explicit(id: ExplicitMap) -> Result<Self, MapError> {
        let finite = match id {
            ExplicitMap::StandardMap { k } => k.is_finite(),
            ExplicitMap::RigidTwist { alpha, tau } => alpha.is_finite() && tau.is_finite(),
        };
        if !finite {
            return Err(MapError::InvalidParameter("non-finite parameter".into()));
        }
        Ok(Self {
            backend: Backend::Explicit(id),
            circumference: Interval::ONE,
            lift_offset: 0,
        })
    }

    pub fn from_backend(backend: Backend, lift_offset: i64) -> Result<Self, MapError> {
        let mut map = match backend {
            Backend::Explicit(id) => Self::make_explicit(id)?,
            Backend::Poincare {
                field,
                settings,
                float_steps,
            } => {
                let mut m = Self::pendulum_with_period(field.g, field.l, field.amplitude, field.period, settings)?;
                if let Backend::Poincare { field: f, float_steps: fs, .. } = &mut m.backend {
                    f.name = field.name;
                    f.restoring = field.restoring;
                    *fs = float_steps.max(1);
                }
                m
            }
        };
        map.lift_offset = lift_offset;
        Ok(map)
    }

    pub fn with_lift_offset(mut self, k: i64) -> Self {
        self.lift_offset = k;
        self
    }

    pub fn lift_offset(&self) -> i64 {
        self.lift_offset
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn circumference(&self) -> Interval {
        self.circumference
    }

    pub fn circumference_f64(&self) -> f64 {
        self.circumference.mid()
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.backend, Backend::Explicit(_))
    }

    /// Enclosure of `F_0(b)` for a planar box (lift offset not applied).
    fn enclose_planar(&self, b: &Box2) -> Result<Box2, MapError> {
        let out = match &self.backend {
            Backend::Explicit(id) => enclose_explicit(*id, b),
            Backend::Poincare { field, settings, .. } => flow_time_t(field, b, settings)?,
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(MapError::Overflow)
        }
    }

    /// One application of the lift to a lifted box, as a single image box.
    pub fn image(&self, b: &LiftedBox) -> Result<LiftedBox, MapError> {
        let (canon, k_in) = reduce(&b.planar, self.circumference)?;
        let img = self.enclose_planar(&canon)?;
        let (canon_img, k_out) = reduce(&img, self.circumference)?;
        Ok(LiftedBox::new(
            canon_img,
            b.shift + k_in + k_out + self.lift_offset,
        ))
    }

    /// `power` applications without subdivision.
    pub fn image_power(&self, b: &LiftedBox, power: usize) -> Result<LiftedBox, MapError> {
        let mut cur = *b;
        for _ in 0..power {
            cur = self.image(&cur)?;
        }
        Ok(cur)
    }

    /// Float evaluation of the lift (offset included).
    pub fn eval_point(&self, p: [f64; 2]) -> [f64; 2] {
        let l = self.circumference_f64();
        let off = self.lift_offset as f64 * l;
        match &self.backend {
            Backend::Explicit(id) => {
                let q = eval_explicit_f64(*id, p);
                [q[0] + off, q[1]]
            }
            Backend::Poincare {
                field, float_steps, ..
            } => {
                // Reduce first so the float map is equivariant as well.
                let k = (p[0] / l).floor();
                let q = flow_time_t_f64(field, [p[0] - k * l, p[1]], *float_steps);
                [q[0] + k * l + off, q[1]]
            }
        }
    }

    /// Float orbit point after `n` applications, `None` once |y| > bound.
    pub fn iterate_point(&self, p: [f64; 2], n: usize, bound: f64) -> Option<[f64; 2]> {
        let mut q = p;
        for _ in 0..n {
            q = self.eval_point(q);
            if !(q[1].abs() <= bound && q[0].is_finite()) {
                return None;
            }
        }
        Some(q)
    }
}

fn enclose_explicit(id: ExplicitMap, b: &Box2) -> Box2 {
    match id {
        ExplicitMap::RigidTwist { alpha, tau } => {
            Box2::new(b.x + Interval::point(alpha) + b.y * tau, b.y)
        }
        ExplicitMap::StandardMap { k } => {
            let kk = Interval::point(k);
            let c = kk / two_pi();
            let arg = two_pi() * b.x;
            let s = c * arg.sin();
            let y1 = b.y + s;
            let direct = Box2::new(b.x + y1, y1);
            // Mean-value form about the midpoint.
            let m = b.midpoint();
            let (mx, my) = (Interval::point(m[0]), Interval::point(m[1]));
            let sm = c * (two_pi() * mx).sin();
            let ym = my + sm;
            let fm = [mx + ym, ym];
            let kc = kk * arg.cos();
            let dx = b.x - mx;
            let dy = b.y - my;
            let mean = Box2::new(
                fm[0] + (Interval::ONE + kc) * dx + dy,
                fm[1] + kc * dx + dy,
            );
            direct.intersect(&mean).unwrap_or(direct)
        }
    }
}

pub fn eval_explicit_f64(id: ExplicitMap, p: [f64; 2]) -> [f64; 2] {
    match id {
        ExplicitMap::RigidTwist { alpha, tau } => [p[0] + alpha + tau * p[1], p[1]],
        ExplicitMap::StandardMap { k } => {
            let tau = 2.0 * std::f64::consts::PI;
            let s = k / tau * (tau * p[0]).sin();
            let y = p[1] + s;
            [p[0] + y, y]
        }
    }
}

fn refine(
    map: &LiftedAnnulusMap,
    b: LiftedBox,
    settings: &SubdivisionSettings,
    min_width: f64,
    stage: usize,
    counter: &AtomicUsize,
) -> Result<Vec<LiftedBox>, MapError> {
    if counter.fetch_add(1, Ordering::Relaxed) >= settings.max_boxes {
        return Err(MapError::BudgetExhausted {
            stage,
            budget: settings.max_boxes,
        });
    }
    let outcome = map.image(&b);
    let fine = matches!(&outcome, Ok(img) if img.planar.width() <= settings.target_width);
    if fine {
        return outcome.map(|img| vec![img]);
    }
    if b.planar.width() <= min_width {
        return outcome.map(|img| vec![img]);
    }
    let Some((l, r)) = b.planar.split_widest([1.0, 1.0]) else {
        return outcome.map(|img| vec![img]);
    };
    let (a, c) = rayon::join(
        || refine(map, LiftedBox::new(l, b.shift), settings, min_width, stage, counter),
        || refine(map, LiftedBox::new(r, b.shift), settings, min_width, stage, counter),
    );
    let mut a = a?;
    a.extend(c?);
    Ok(a)
}

/// Image of one stage under one application, subdividing members until each
/// image is narrower than `target_width`.
pub fn eval_stage(
    map: &LiftedAnnulusMap,
    set: &EnclosureSet,
    settings: &SubdivisionSettings,
    scale: f64,
) -> Result<EnclosureSet, MapError> {
    use rayon::prelude::*;
    let counter = AtomicUsize::new(0);
    let stage = set.stage + 1;
    let min_width = scale * settings.min_width_ratio;
    let parts: Result<Vec<Vec<LiftedBox>>, MapError> = set
        .members
        .par_iter()
        .map(|m| refine(map, *m, settings, min_width, stage, &counter))
        .collect();
    Ok(EnclosureSet {
        stage,
        members: parts?.into_iter().flatten().collect(),
    })
}

/// Enclosure chain `[b, F(b), …, F^power(b)]`.
pub fn eval_chain(
    map: &LiftedAnnulusMap,
    b: &LiftedBox,
    power: usize,
    settings: &SubdivisionSettings,
) -> Result<Vec<EnclosureSet>, MapError> {
    let scale = b.planar.width().max(f64::MIN_POSITIVE);
    let mut chain = vec![EnclosureSet::single(0, *b)];
    for _ in 0..power {
        let next = eval_stage(map, chain.last().expect("nonempty"), settings, scale)?;
        chain.push(next);
    }
    Ok(chain)
}

/// Covering enclosure of `F^power(b)`.
pub fn eval_lift(
    map: &LiftedAnnulusMap,
    b: &LiftedBox,
    power: usize,
    settings: &SubdivisionSettings,
) -> Result<EnclosureSet, MapError> {
    if power == 0 {
        return Err(MapError::InvalidParameter("power must be at least 1".into()));
    }
    Ok(eval_chain(map, b, power, settings)?.pop().expect("nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x0: f64, x1: f64, y0: f64, y1: f64) -> Box2 {
        Box2::from_bounds(x0, x1, y0, y1).unwrap()
    }

    fn twist(alpha: f64, tau: f64) -> LiftedAnnulusMap {
        LiftedAnnulusMap::make_explicit(ExplicitMap::RigidTwist { alpha, tau }).unwrap()
    }

    fn standard(k: f64) -> LiftedAnnulusMap {
        LiftedAnnulusMap::make_explicit(ExplicitMap::StandardMap { k }).unwrap()
    }

    fn cover(set: &EnclosureSet, l: Interval) -> Box2 {
        set.hull_relative(0, l).unwrap()
    }

    #[test]
    fn paper_pendulum_period() {
        let m = LiftedAnnulusMap::make_pendulum(9.8, 1.0, 3.0, 4.0 * std::f64::consts::PI / 5.0).unwrap();
        match m.backend() {
            Backend::Poincare { field, .. } => assert!((field.period - 2.5).abs() < 1e-15),
            _ => panic!("expected poincare backend"),
        }
        assert!(m.circumference().contains(2.0 * std::f64::consts::PI));
    }

    #[test]
    fn invalid_pendulum() {
        assert!(LiftedAnnulusMap::make_pendulum(9.8, 0.0, 3.0, 1.0).is_err());
        assert!(LiftedAnnulusMap::make_pendulum(9.8, 1.0, 3.0, 0.0).is_err());
        assert!(LiftedAnnulusMap::make_explicit(ExplicitMap::StandardMap { k: f64::NAN }).is_err());
    }

    #[test]
    fn free_rotor_is_twist() {
        let m = LiftedAnnulusMap::make_pendulum(0.0, 1.0, 0.0, 4.0 * std::f64::consts::PI / 5.0).unwrap();
        let p = m.eval_point([0.5, 1.0]);
        assert!((p[0] - 3.0).abs() < 1e-9 && (p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn explicit_point_examples() {
        assert_eq!(twist(0.3, 0.0).eval_point([0.0, 0.0]), [0.3, 0.0]);
        let p = standard(2.0).eval_point([0.25, 0.0]);
        let inv_pi = 1.0 / std::f64::consts::PI;
        assert!((p[0] - (0.25 + inv_pi)).abs() < 1e-15 && (p[1] - inv_pi).abs() < 1e-15);
        assert_eq!(standard(0.0).eval_point([0.2, 0.7]), [0.2 + 0.7, 0.7]);
    }

    #[test]
    fn twist_power_two() {
        let s = SubdivisionSettings {
            target_width: 0.2,
            ..Default::default()
        };
        let m = twist(0.3, 0.0);
        let out = eval_lift(&m, &LiftedBox::from_planar(b(0.0, 0.1, 0.0, 0.1)), 2, &s).unwrap();
        assert_eq!(out.members.len(), 1);
        let h = cover(&out, m.circumference());
        assert!(h.encloses(&b(0.6, 0.7, 0.0, 0.1)));
        assert!(h.width() < 0.1 + 1e-14);
    }

    #[test]
    fn shear_widths_add() {
        let s = SubdivisionSettings {
            target_width: 1.0,
            ..Default::default()
        };
        let m = standard(0.0);
        let out = eval_lift(&m, &LiftedBox::from_planar(b(0.0, 0.1, 1.0, 1.1)), 1, &s).unwrap();
        let h = cover(&out, m.circumference());
        assert!(h.encloses(&b(1.0, 1.2, 1.0, 1.1)));
        assert!(h.x.width() < 0.2 + 1e-14);
    }

    #[test]
    fn lift_offset_translates_exactly() {
        let s = SubdivisionSettings::default();
        let base = standard(1.3);
        let lb = LiftedBox::from_planar(b(0.2, 0.25, 0.1, 0.15));
        for p in 1..=3 {
            let a = eval_lift(&base, &lb, p, &s).unwrap();
            let c = eval_lift(&base.clone().with_lift_offset(1), &lb, p, &s).unwrap();
            assert_eq!(a.translated(p as i64), c);
        }
    }

    #[test]
    fn budget_exhaustion() {
        let s = SubdivisionSettings {
            target_width: 1e-6,
            max_boxes: 64,
            ..Default::default()
        };
        let r = eval_lift(&standard(4.0), &LiftedBox::from_planar(b(0.0, 0.2, 0.0, 0.2)), 1, &s);
        assert!(matches!(r, Err(MapError::BudgetExhausted { stage: 1, budget: 64 })));
    }

    #[test]
    fn standard_map_samples_inside() {
        let s = SubdivisionSettings {
            target_width: 0.02,
            ..Default::default()
        };
        let m = standard(3.0);
        let bx = b(0.1, 0.2, 0.3, 0.35);
        let out = eval_lift(&m, &LiftedBox::from_planar(bx), 2, &s).unwrap();
        let l = m.circumference();
        for i in 0..=20 {
            for j in 0..=20 {
                let p = [0.1 + 0.1 * i as f64 / 20.0, 0.3 + 0.05 * j as f64 / 20.0];
                let q = m.eval_point(m.eval_point(p));
                assert!(out.members.iter().any(|mb| mb.relative_to(0, l).inflate(1e-12).contains_point(q)));
            }
        }
    }
}
