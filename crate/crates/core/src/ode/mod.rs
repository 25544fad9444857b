//! Validated enclosure of the time-T map of the driven pendulum
//! `q'' = -(g/l) sin q + A sin(ωt)` with `ω = 2π/T`.
//!
//! [`taylor_step`] is the plain interval Taylor step (direct and mean-value
//! forms intersected). [`flow_time_t`] composes steps in a centred-frame
//! representation `x ∈ m + A·r` that tracks the linearised flow with a point
//! matrix and keeps the interval part `r` in the transported frame.

mod taylor;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boxes::Box2;
use crate::interval::{Interval, IntervalError, PI};

use taylor::{coefficients, forcing_series, horner, Jet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("invalid field parameter: {0}")]
    InvalidParameter(String),
    #[error("a-priori enclosure not verified after {retries} inflations at t = {t}")]
    PicardFailure { t: f64, retries: usize },
    #[error("step size fell below h_min at t = {t}")]
    IntegrationFailure { t: f64 },
    #[error("enclosure left the phase-space bound |v| <= {v_max}")]
    BoundsExceeded { v_max: f64 },
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

/// Restoring force: `sin q` for the pendulum, `q` for the linear test field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Restoring {
    #[default]
    Sine,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorFieldSpec {
    pub name: String,
    pub g: f64,
    pub l: f64,
    #[serde(rename = "A")]
    pub amplitude: f64,
    /// Forcing period `T`; `ω = 2π/T` is enclosed from it.
    pub period: f64,
    #[serde(default)]
    pub restoring: Restoring,
}

impl VectorFieldSpec {
    pub fn pendulum(g: f64, l: f64, amplitude: f64, period: f64) -> Result<Self, OdeError> {
        let spec = Self {
            name: "pendulum".into(),
            g,
            l,
            amplitude,
            period,
            restoring: Restoring::Sine,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `q'' = -k q` (no forcing), period 2π for bookkeeping.
    pub fn linear_test(k: f64) -> Self {
        Self {
            name: "linear".into(),
            g: k,
            l: 1.0,
            amplitude: 0.0,
            period: 2.0 * std::f64::consts::PI,
            restoring: Restoring::Linear,
        }
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        let finite = [self.g, self.l, self.amplitude, self.period]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(OdeError::InvalidParameter("non-finite parameter".into()));
        }
        if self.l <= 0.0 {
            return Err(OdeError::InvalidParameter(format!("l = {} must be positive", self.l)));
        }
        if self.period <= 0.0 {
            return Err(OdeError::InvalidParameter(format!(
                "period = {} must be positive",
                self.period
            )));
        }
        Ok(())
    }

    pub fn gamma(&self) -> Interval {
        Interval::point(self.g) / Interval::point(self.l)
    }

    pub fn omega(&self) -> Interval {
        PI * 2.0 / Interval::point(self.period)
    }

    /// Field value `(v, -γ sin q + A sin ωt)` over a box and time interval.
    pub fn eval(&self, b: &Box2, t: Interval) -> (Interval, Interval) {
        let restoring = match self.restoring {
            Restoring::Sine => b.x.sin(),
            Restoring::Linear => b.x,
        };
        let force = (self.omega() * t).sin() * self.amplitude;
        (b.y, force - self.gamma() * restoring)
    }

    /// Float field, for reference integrators.
    pub fn eval_f64(&self, q: f64, v: f64, t: f64) -> [f64; 2] {
        let restoring = match self.restoring {
            Restoring::Sine => q.sin(),
            Restoring::Linear => q,
        };
        let omega = 2.0 * std::f64::consts::PI / self.period;
        [v, -(self.g / self.l) * restoring + self.amplitude * (omega * t).sin()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationSettings {
    pub taylor_order: usize,
    /// Initial step is `T / steps_per_period` (a power of two).
    pub steps_per_period: u32,
    /// Smallest step is `T / max_steps_per_period` (a power of two).
    pub max_steps_per_period: u32,
    pub picard_inflation: f64,
    pub max_picard_retries: usize,
    /// Plain interval Taylor steps on the fixed `steps_per_period` grid:
    /// inclusion-isotone, but subject to the wrapping effect.
    pub fixed_step: bool,
    pub v_max: f64,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        Self {
            taylor_order: 4,
            steps_per_period: 256,
            max_steps_per_period: 4096,
            picard_inflation: 1.1,
            max_picard_retries: 8,
            fixed_step: false,
            v_max: 12.0,
        }
    }
}

impl IntegrationSettings {
    pub fn validate(&self) -> Result<(), OdeError> {
        let bad = |m: &str| Err(OdeError::InvalidParameter(m.into()));
        if !(1..=20).contains(&self.taylor_order) {
            return bad("taylor_order must lie in [1, 20]");
        }
        if !self.steps_per_period.is_power_of_two() || !self.max_steps_per_period.is_power_of_two() {
            return bad("step counts must be powers of two");
        }
        if self.steps_per_period > self.max_steps_per_period {
            return bad("steps_per_period exceeds max_steps_per_period");
        }
        if self.max_steps_per_period > 1 << 24 {
            return bad("max_steps_per_period above 2^24");
        }
        if !(self.picard_inflation > 1.0 && self.picard_inflation.is_finite()) {
            return bad("picard_inflation must exceed 1");
        }
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return bad("v_max must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowStep {
    pub rough: Box2,
    pub tight: Box2,
    pub t_span: Interval,
}

fn time_span(t0: Interval, h: f64) -> Interval {
    Interval::new(t0.lo(), (t0 + h).hi()).unwrap_or(t0)
}

/// Rough enclosure `B` with `b + [0,h]·f(B, [t0, t0+h]) ⊆ B`.
pub fn a_priori_enclosure(
    field: &VectorFieldSpec,
    b: &Box2,
    t0: Interval,
    h: f64,
    settings: &IntegrationSettings,
) -> Result<Box2, OdeError> {
    let span = time_span(t0, h);
    let hh = Interval::new(0.0, h).map_err(OdeError::from)?;
    let step = |z: &Box2| {
        let (dq, dv) = field.eval(z, span);
        Box2::new(b.x + hh * dq, b.y + hh * dv)
    };
    let mut z = step(b);
    for retry in 0..=settings.max_picard_retries {
        let grow = |iv: Interval| {
            let rad = 0.5 * iv.width();
            iv.inflate((settings.picard_inflation - 1.0) * rad + 1e-15 * (1.0 + iv.mag()))
        };
        let candidate = Box2::new(grow(z.x), grow(z.y));
        if !candidate.is_finite() {
            return Err(OdeError::Interval(IntervalError::Overflow));
        }
        let next = step(&candidate);
        if candidate.encloses(&next) {
            // One contraction sweep tightens the enclosure at no risk.
            let tighter = step(&next);
            return Ok(if next.encloses(&tighter) { next } else { candidate });
        }
        z = candidate.hull(&next);
        if retry == settings.max_picard_retries {
            break;
        }
    }
    Err(OdeError::PicardFailure {
        t: t0.lo(),
        retries: settings.max_picard_retries,
    })
}

/// Inclusion-isotone variant of [`a_priori_enclosure`]: always runs the full
/// iteration and verifies only the last candidate, so the result is a
/// composition of isotone interval operations of `b`.
fn a_priori_isotone(
    field: &VectorFieldSpec,
    b: &Box2,
    t0: Interval,
    h: f64,
    settings: &IntegrationSettings,
) -> Result<Box2, OdeError> {
    let span = time_span(t0, h);
    let hh = Interval::new(0.0, h).map_err(OdeError::from)?;
    let step = |z: &Box2| {
        let (dq, dv) = field.eval(z, span);
        Box2::new(b.x + hh * dq, b.y + hh * dv)
    };
    let grow = |iv: Interval| {
        let rad = 0.5 * iv.width();
        iv.inflate((settings.picard_inflation - 1.0) * rad + 1e-15 * (1.0 + iv.mag()))
    };
    // Picard iterates of a slightly inflated box settle near the fixed point.
    let mut z = step(b);
    for _ in 0..settings.max_picard_retries {
        z = step(&Box2::new(grow(z.x), grow(z.y)));
    }
    let candidate = Box2::new(grow(z.x), grow(z.y));
    if !candidate.is_finite() {
        return Err(OdeError::Interval(IntervalError::Overflow));
    }
    if candidate.encloses(&step(&candidate)) {
        Ok(candidate)

    } else {
        Err(OdeError::PicardFailure {
            t: t0.lo(),
            retries: settings.max_picard_retries,
        })
    }
}

/// Direct-form Taylor step intersected with the a priori box; isotone in `b`.
fn isotone_step(
    field: &VectorFieldSpec,
    b: &Box2,
    t0: Interval,
    h: f64,
    settings: &IntegrationSettings,
) -> Result<Box2, OdeError> {
    let order = settings.taylor_order;
    let rough = a_priori_isotone(field, b, t0, h, settings)?;
    if rough.y.mag() > settings.v_max {
        return Err(OdeError::BoundsExceeded {
            v_max: settings.v_max,
        });
    }
    let rem = remainder(field, &rough, time_span(t0, h), h, order);
    let forcing = forcing_series(field, t0, order);
    let (q, v) = coefficients(field, b.x, b.y, &forcing, order);
    let hi = Interval::point(h);
    let direct = Box2::new(horner(&q, hi) + rem[0], horner(&v, hi) + rem[1]);
    direct
        .intersect(&rough)
        .ok_or(OdeError::Interval(IntervalError::InvalidEndpoints))
}

/// Lagrange remainder enclosure of the order-`order` expansion over `rough`.
fn remainder(
    field: &VectorFieldSpec,
    rough: &Box2,
    span: Interval,
    h: f64,
    order: usize,
) -> [Interval; 2] {
    let forcing = forcing_series(field, span, order + 1);
    let (q, v) = coefficients(field, rough.x, rough.y, &forcing, order + 1);
    let hp = Interval::point(h).sqr_pow(order + 1);
    [q[order + 1] * hp, v[order + 1] * hp]
}

trait PowExt {
    fn sqr_pow(self, n: usize) -> Interval;
}

impl PowExt for Interval {
    fn sqr_pow(self, n: usize) -> Interval {
        (0..n).fold(Interval::ONE, |acc, _| acc * self)
    }
}

/// Flow of `b` from `t0` over one step of length `h`.
pub fn taylor_step(
    field: &VectorFieldSpec,
    b: &Box2,
    t0: Interval,
    h: f64,
    order: usize,
    settings: &IntegrationSettings,
) -> Result<FlowStep, OdeError> {
    let rough = a_priori_enclosure(field, b, t0, h, settings)?;
    let span = time_span(t0, h);
    let rem = remainder(field, &rough, span, h, order);
    let hi = Interval::point(h);
    let forcing = forcing_series(field, t0, order);
    let (jq, jv) = coefficients(
        field,
        Jet::variable(b.x, 0),
        Jet::variable(b.y, 1),
        &forcing,
        order,
    );
    let pq = horner(&jq, hi);
    let pv = horner(&jv, hi);
    let direct = Box2::new(pq.v + rem[0], pv.v + rem[1]);
    let m = b.midpoint();
    let (cq, cv) = coefficients(field, Interval::point(m[0]), Interval::point(m[1]), &forcing, order);
    let dx = b.x - Interval::point(m[0]);
    let dy = b.y - Interval::point(m[1]);
    let mean = Box2::new(
        horner(&cq, hi) + rem[0] + pq.d[0] * dx + pq.d[1] * dy,
        horner(&cv, hi) + rem[1] + pv.d[0] * dx + pv.d[1] * dy,
    );
    let tight = direct
        .intersect(&mean)
        .and_then(|t| t.intersect(&rough))
        .ok_or(OdeError::Interval(IntervalError::InvalidEndpoints))?;
    if !tight.is_finite() {
        return Err(OdeError::Interval(IntervalError::Overflow));
    }
    Ok(FlowStep {
        rough,
        tight,
        t_span: span,
    })
}

/// Doubleton set `{ m + C r0 + Q s }`: the initial box `r0` is carried by
/// the point matrix `C`, accumulated errors `s` live in the orthonormal frame `Q`.
#[derive(Clone, Copy, Debug)]
struct Frame {
    m: [f64; 2],
    c: [[f64; 2]; 2],
    r0: [Interval; 2],
    q: [[f64; 2]; 2],
    s: [Interval; 2],
}

type Mat = [[Interval; 2]; 2];

const IDENTITY: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

fn point_mat(a: &[[f64; 2]; 2]) -> Mat {
    let p = Interval::point;
    [[p(a[0][0]), p(a[0][1])], [p(a[1][0]), p(a[1][1])]]
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[Interval::ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn mat_vec(a: &Mat, v: &[Interval; 2]) -> [Interval; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

fn mid_mat(a: &Mat) -> [[f64; 2]; 2] {
    [[a[0][0].mid(), a[0][1].mid()], [a[1][0].mid(), a[1][1].mid()]]
}

impl Frame {
    fn from_box(b: &Box2) -> Self {
        let m = b.midpoint();
        Frame {
            m,
            c: IDENTITY,
            r0: [b.x - Interval::point(m[0]), b.y - Interval::point(m[1])],
            q: IDENTITY,
            s: [Interval::ZERO; 2],
        }
    }

    fn hull(&self) -> Box2 {
        let a = mat_vec(&point_mat(&self.c), &self.r0);
        let b = mat_vec(&point_mat(&self.q), &self.s);
        Box2::new(
            Interval::point(self.m[0]) + a[0] + b[0],
            Interval::point(self.m[1]) + a[1] + b[1],
        )
    }

    fn is_finite(&self) -> bool {
        self.s.iter().chain(self.r0.iter()).all(|v| v.is_finite())
    }
}

/// Enclosure of the inverse of a float 2×2 matrix, `None` if near singular.
fn inverse_enclosure(a: &[[f64; 2]; 2]) -> Option<Mat> {
    let p = |x: f64| Interval::point(x);
    let det = p(a[0][0]) * p(a[1][1]) - p(a[0][1]) * p(a[1][0]);
    if det.contains_zero() || !det.is_finite() {
        return None;
    }
    let inv = det.recip();
    Some([
        [p(a[1][1]) * inv, -(p(a[0][1]) * inv)],
        [-(p(a[1][0]) * inv), p(a[0][0]) * inv],
    ])
}

/// Orthonormal frame whose first axis follows the dominant column of
/// `mid(M)` weighted by the radii of `s`.
fn orthogonal_frame(m: &Mat, s: &[Interval; 2]) -> [[f64; 2]; 2] {
    let col = |j: usize| {
        let w = 0.5 * s[j].width();
        [m[0][j].mid() * w, m[1][j].mid() * w]
    };
    let (c0, c1) = (col(0), col(1));
    let n0 = c0[0].hypot(c0[1]);
    let n1 = c1[0].hypot(c1[1]);
    let (c, n) = if n0 >= n1 { (c0, n0) } else { (c1, n1) };
    if !(n > 0.0 && n.is_finite()) {
        return IDENTITY;
    }
    let e = [c[0] / n, c[1] / n];
    [[e[0], -e[1]], [e[1], e[0]]]
}

struct StepOutput {
    frame: Frame,
    hull: Box2,
    rough: Box2,
}

fn frame_step(
    field: &VectorFieldSpec,
    frame: &Frame,
    t0: Interval,
    h: f64,
    settings: &IntegrationSettings,
) -> Result<StepOutput, OdeError> {
    let order = settings.taylor_order;
    let x = frame.hull();
    let rough = a_priori_enclosure(field, &x, t0, h, settings)?;
    if rough.y.mag() > settings.v_max {
        return Err(OdeError::BoundsExceeded {
            v_max: settings.v_max,
        });
    }
    let span = time_span(t0, h);
    let rem = remainder(field, &rough, span, h, order);
    let hi = Interval::point(h);
    let forcing = forcing_series(field, t0, order);

    let (cq, cv) = coefficients(
        field,
        Interval::point(frame.m[0]),
        Interval::point(frame.m[1]),
        &forcing,
        order,
    );
    let u = [horner(&cq, hi) + rem[0], horner(&cv, hi) + rem[1]];

    let (jq, jv) = coefficients(field, Jet::variable(x.x, 0), Jet::variable(x.y, 1), &forcing, order);
    let pq = horner(&jq, hi);
    let pv = horner(&jv, hi);
    let direct = Box2::new(pq.v + rem[0], pv.v + rem[1]);
    let jac: Mat = [pq.d, pv.d];

    let jc = mat_mul(&jac, &point_mat(&frame.c));
    let jq_mat = mat_mul(&jac, &point_mat(&frame.q));
    let m_new = [u[0].mid(), u[1].mid()];
    let c_new = mid_mat(&jc);
    // Error pieces: centre residual, spread of JC against C', transported s.
    let mut err = [u[0] - Interval::point(m_new[0]), u[1] - Interval::point(m_new[1])];
    let spread = [
        [jc[0][0] - Interval::point(c_new[0][0]), jc[0][1] - Interval::point(c_new[0][1])],
        [jc[1][0] - Interval::point(c_new[1][0]), jc[1][1] - Interval::point(c_new[1][1])],
    ];
    let e1 = mat_vec(&spread, &frame.r0);
    err = [err[0] + e1[0], err[1] + e1[1]];

    let mut q_new = orthogonal_frame(&jq_mat, &frame.s);
    let b = match inverse_enclosure(&q_new) {
        Some(b) => b,
        None => {
            q_new = IDENTITY;
            point_mat(&IDENTITY)
        }
    };
    let bjq = mat_mul(&b, &jq_mat);
    let s_lin = mat_vec(&bjq, &frame.s);
    let s_err = mat_vec(&b, &err);
    let next = Frame {
        m: m_new,
        c: c_new,
        r0: frame.r0,
        q: q_new,
        s: [s_lin[0] + s_err[0], s_lin[1] + s_err[1]],
    };
    let hull = next
        .hull()
        .intersect(&direct)
        .and_then(|t| t.intersect(&rough))
        .ok_or(OdeError::Interval(IntervalError::InvalidEndpoints))?;
    if !hull.is_finite() || !next.is_finite() {
        return Err(OdeError::Interval(IntervalError::Overflow));
    }
    Ok(StepOutput {
        frame: next,
        hull,
        rough,
    })
}

/// Start time of grid position `pos` on a grid of `n` cells per period.
fn grid_time(field: &VectorFieldSpec, pos: u32, n: u32) -> Interval {
    Interval::point(field.period) * Interval::point(pos as f64) / Interval::point(n as f64)
}

/// Enclosure of the flow of `b` from `start/n·T` to `end/n·T`, where
/// `n = settings.max_steps_per_period`.
pub fn flow_span(
    field: &VectorFieldSpec,
    b: &Box2,
    start: u32,
    end: u32,
    settings: &IntegrationSettings,
) -> Result<Box2, OdeError> {
    field.validate()?;
    settings.validate()?;
    let n = settings.max_steps_per_period;
    if start > end || end > n {
        return Err(OdeError::InvalidParameter("time span outside [0, T]".into()));
    }
    if b.y.mag() > settings.v_max {
        return Err(OdeError::BoundsExceeded {
            v_max: settings.v_max,
        });
    }
    let base = n / settings.steps_per_period;
    if settings.fixed_step {
        return flow_span_isotone(field, b, start, end, base, settings);
    }
    let mut cells = base;
    let mut pos = start;
    let mut frame = Frame::from_box(b);
    let mut hull = *b;
    while pos < end {
        while pos % cells != 0 || pos + cells > end {
            cells /= 2;
        }
        let h = field.period * cells as f64 / n as f64;
        let t0 = grid_time(field, pos, n);
        match frame_step(field, &frame, t0, h, settings) {
            Ok(out) => {
                frame = out.frame;
                hull = out.hull;
                debug_assert!(out.rough.encloses(&hull));
                pos += cells;
                if cells < base && pos % (2 * cells) == 0 {
                    cells *= 2;
                }
            }
            Err(OdeError::PicardFailure { t, .. }) => {
                if cells == 1 {
                    return Err(OdeError::IntegrationFailure { t });
                }
                cells /= 2;
            }
            Err(e) => return Err(e),
        }
        // Re-centre the frame on its hull when the frame drifts loose.
        let fh = frame.hull();
        if fh.width() > 4.0 * hull.width() + 1e-300 {
            frame = Frame::from_box(&hull);
        }
    }
    Ok(hull)
}

/// Fixed-grid plain interval integration: nested inputs give nested outputs.
fn flow_span_isotone(
    field: &VectorFieldSpec,
    b: &Box2,
    start: u32,
    end: u32,
    base: u32,
    settings: &IntegrationSettings,
) -> Result<Box2, OdeError> {
    let n = settings.max_steps_per_period;
    let mut pos = start;
    let mut x = *b;
    while pos < end {
        let mut cells = base;
        while pos % cells != 0 || pos + cells > end {
            cells /= 2;
        }
        let h = field.period * cells as f64 / n as f64;
        x = isotone_step(field, &x, grid_time(field, pos, n), h, settings)?;
        pos += cells;
    }
    Ok(x)
}

/// Enclosure of the time-T map image of `b`.
pub fn flow_time_t(
    field: &VectorFieldSpec,
    b: &Box2,
    settings: &IntegrationSettings,
) -> Result<Box2, OdeError> {
    flow_span(field, b, 0, settings.max_steps_per_period, settings)
}

/// Float RK4 time-T map with `steps` equal steps (non-rigorous).
pub fn flow_time_t_f64(field: &VectorFieldSpec, p: [f64; 2], steps: u32) -> [f64; 2] {
    let h = field.period / steps as f64;
    let (mut q, mut v) = (p[0], p[1]);
    for i in 0..steps {
        let t = h * i as f64;
        let k1 = field.eval_f64(q, v, t);
        let k2 = field.eval_f64(q + 0.5 * h * k1[0], v + 0.5 * h * k1[1], t + 0.5 * h);
        let k3 = field.eval_f64(q + 0.5 * h * k2[0], v + 0.5 * h * k2[1], t + 0.5 * h);
        let k4 = field.eval_f64(q + h * k3[0], v + h * k3[1], t + h);
        q += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        v += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    }
    [q, v]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper() -> VectorFieldSpec {
        VectorFieldSpec::pendulum(9.8, 1.0, 3.0, 2.5).unwrap()
    }

    fn rotor() -> VectorFieldSpec {
        VectorFieldSpec::pendulum(0.0, 1.0, 0.0, 2.5).unwrap()
    }

    #[test]
    fn invalid_parameters() {
        assert!(VectorFieldSpec::pendulum(9.8, 0.0, 3.0, 2.5).is_err());
        assert!(VectorFieldSpec::pendulum(9.8, 1.0, 3.0, -1.0).is_err());
        assert!(VectorFieldSpec::pendulum(f64::NAN, 1.0, 3.0, 2.5).is_err());
    }

    #[test]
    fn omega_times_period_encloses_two_pi() {
        let f = paper();
        let tw = f.omega() * f.period;
        assert!(tw.contains(2.0 * std::f64::consts::PI));
        assert!(tw.width() < 1e-14);
    }

    #[test]
    fn picard_zero_field_point() {
        let s = IntegrationSettings::default();
        let b = Box2::point(0.0, 0.0);
        let z = a_priori_enclosure(&rotor(), &b, Interval::ZERO, 0.1, &s).unwrap();
        assert!(z.encloses(&b));
        assert!(z.width() < 1e-12);
    }

    #[test]
    fn picard_free_rotor_drift() {
        let s = IntegrationSettings::default();
        let b = Box2::point(0.0, 1.0);
        let z = a_priori_enclosure(&rotor(), &b, Interval::ZERO, 0.1, &s).unwrap();
        assert!(z.encloses(&Box2::from_bounds(0.0, 0.1, 1.0, 1.0).unwrap()));
    }

    #[test]
    fn picard_pendulum_point() {
        let s = IntegrationSettings::default();
        let f = paper();
        let z = a_priori_enclosure(&f, &Box2::point(3.0, 1.2), Interval::ZERO, 2.5 / 256.0, &s);
        assert!(z.is_ok());
    }

    #[test]
    fn zero_field_step_is_identity() {
        let s = IntegrationSettings::default();
        let f = VectorFieldSpec::pendulum(0.0, 1.0, 0.0, 2.5).unwrap();
        let b = Box2::from_bounds(0.2, 0.3, 0.0, 0.0).unwrap();
        let st = taylor_step(&f, &b, Interval::ZERO, 0.5, 4, &s).unwrap();
        assert_eq!(st.tight, b);
        assert!(st.rough.encloses(&st.tight));
    }

    #[test]
    fn linear_field_quarter_turn() {
        let s = IntegrationSettings::default();
        let f = VectorFieldSpec::linear_test(1.0);
        let steps = 64;
        let h = std::f64::consts::FRAC_PI_2 / steps as f64;
        let mut b = Box2::point(1.0, 0.0);
        let mut t = Interval::ZERO;
        for _ in 0..steps {
            let st = taylor_step(&f, &b, t, h, 6, &s).unwrap();
            assert!(st.rough.encloses(&st.tight));
            b = st.tight;
            t = t + h;
        }
        // Step sum is π/2 up to float rounding of h; allow that slack.
        let exact = Box2::point(0.0, -1.0).inflate(1e-13);
        assert!(b.intersect(&exact).is_some(), "{b:?}");
        assert!(b.width() < 1e-10);
    }

    #[test]
    fn free_rotor_period_map() {
        let s = IntegrationSettings::default();
        let out = flow_time_t(&rotor(), &Box2::point(0.0, 2.0), &s).unwrap();
        assert!(out.contains_point([5.0, 2.0]));
        assert!(out.width() < 1e-12);
    }

    #[test]
    fn zero_field_period_map_is_identity() {
        let s = IntegrationSettings::default();
        let b = Box2::from_bounds(0.1, 0.2, 0.0, 0.0).unwrap();
        let out = flow_time_t(&rotor(), &b, &s).unwrap();
        assert!(out.encloses(&b));
        assert!(out.width() - b.width() < 1e-13);
    }

    #[test]
    fn bounds_exceeded() {
        let s = IntegrationSettings::default();
        let r = flow_time_t(&paper(), &Box2::point(0.0, 20.0), &s);
        assert!(matches!(r, Err(OdeError::BoundsExceeded { .. })));
    }

    #[test]
    fn settings_validation() {
        let s = IntegrationSettings {
            taylor_order: 0,
            ..Default::default()
        };
        assert!(s.validate().is_err());
        let s = IntegrationSettings {
            steps_per_period: 100,
            ..Default::default()
        };
        assert!(s.validate().is_err());
    }
}
