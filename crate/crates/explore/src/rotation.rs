use chaos_cert_core::maps::LiftedAnnulusMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("orbit left |y| <= {bound} after {steps} steps")]
pub struct OrbitEscaped {
    pub steps: usize,
    pub bound: f64,
}

/// Mean lifted x-displacement per iterate, in circumference units.
pub fn estimate_rotation(map: &LiftedAnnulusMap, p: [f64; 2], n: usize, bound: f64) -> Result<f64, OrbitEscaped> {
    Ok(orbit_stats(map, p, n.max(1), bound)?.0)
}

/// `(mean displacement, displacement span / n, first image)`.
fn orbit_stats(map: &LiftedAnnulusMap, p: [f64; 2], n: usize, bound: f64) -> Result<(f64, f64, [f64; 2]), OrbitEscaped> {
    let l = map.circumference_f64();
    // The orbit is kept in [0, L) with whole turns counted separately, so
    // rounding does not grow with the lifted coordinate.
    let turns0 = (p[0] / l).floor();
    let mut q = [p[0] - turns0 * l, p[1]];
    let x0 = q[0];
    let mut turns = 0i64;
    let mut first = p;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let mut next = map.eval_point(q);
        if !(next[1].abs() <= bound && next[0].is_finite()) {
            return Err(OrbitEscaped { steps: i + 1, bound });
        }
        let d = next[0] - q[0];
        lo = lo.min(d);
        hi = hi.max(d);
        if i == 0 {
            first = [next[0] + turns0 * l, next[1]];
        }
        let t = (next[0] / l).floor();
        next[0] -= t * l;
        turns += t as i64;
        q = next;
    }
    let total = turns as f64 * l + (q[0] - x0);
    Ok((total / (n as f64 * l), (hi - lo) / (n as f64 * l), first))
}

/// Rotation estimates on a lattice `x ∈ [0, L)`, `y ∈ [y_lo, y_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationField {
    pub nx: usize,
    pub ny: usize,
    pub y_range: [f64; 2],
    pub circumference: f64,
    pub iterates: usize,
    /// Row-major over `(iy, ix)`; `None` for escaping orbits.
    pub values: Vec<Option<f64>>,
    /// Per-point displacement span divided by the iterate count.
    pub error_bounds: Vec<Option<f64>>,
    /// First image of each grid point.
    pub images: Vec<Option<[f64; 2]>>,
}

impl RotationField {
    pub fn compute(
        map: &LiftedAnnulusMap,
        nx: usize,
        ny: usize,
        y_range: [f64; 2],
        iterates: usize,
        bound: f64,
    ) -> Self {
        let l = map.circumference_f64();
        let field = Self {
            nx,
            ny,
            y_range,
            circumference: l,
            iterates: iterates.max(1),
            values: Vec::new(),
            error_bounds: Vec::new(),
            images: Vec::new(),
        };
        let stats: Vec<Option<(f64, f64, [f64; 2])>> = (0..nx * ny)
            .into_par_iter()
            .map(|i| orbit_stats(map, field.point(i), field.iterates, bound).ok())
            .collect();
        Self {
            values: stats.iter().map(|s| s.map(|s| s.0)).collect(),
            error_bounds: stats.iter().map(|s| s.map(|s| s.1)).collect(),
            images: stats.iter().map(|s| s.map(|s| s.2)).collect(),
            ..field
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid point `i` (cell centres in x, endpoints included in y).
    pub fn point(&self, i: usize) -> [f64; 2] {
        let (ix, iy) = (i % self.nx, i / self.nx);
        let x = (ix as f64 + 0.5) / self.nx as f64 * self.circumference;
        let fy = if self.ny > 1 {
            iy as f64 / (self.ny - 1) as f64
        } else {
            0.5
        };
        [x, self.y_range[0] + fy * (self.y_range[1] - self.y_range[0])]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chaos_cert_core::maps::ExplicitMap;

    fn twist(alpha: f64, tau: f64) -> LiftedAnnulusMap {
        LiftedAnnulusMap::make_explicit(ExplicitMap::RigidTwist { alpha, tau }).unwrap()
    }

    #[test]
    fn rigid_rotation_estimate() {
        let r = estimate_rotation(&twist(0.3, 0.0), [0.1, 0.7], 1000, 1e6).unwrap();
        assert!((r - 0.3).abs() < 1e-12);
    }

    #[test]
    fn twist_drift_equals_height() {
        assert_eq!(estimate_rotation(&twist(0.0, 1.0), [0.2, 2.0], 10, 1e6).unwrap(), 2.0);
    }

    #[test]
    fn twist_family_within_ten_ulp() {
        for &(a, t, y) in &[(0.3, 0.0, 0.5), (0.1, 0.5, 1.25), (0.0, 2.0, -0.75)] {
            for n in [1usize, 10, 100, 10_000] {
                let r = estimate_rotation(&twist(a, t), [0.0, y], n, 1e6).unwrap();
                let e = a + t * y;
                let ulp = e.abs().next_up() - e.abs();
                assert!((r - e).abs() <= 10.0 * ulp, "{a} {t} {y} {n}: {r}");
            }
        }
    }

    #[test]
    fn escape_reported() {
        let m = LiftedAnnulusMap::make_explicit(ExplicitMap::StandardMap { k: 0.0 }).unwrap();
        assert!(estimate_rotation(&m, [0.0, 5.0], 3, 1.0).is_err());
    }

    #[test]
    fn field_layout() {
        let f = RotationField::compute(&twist(0.0, 1.0), 4, 3, [0.0, 2.0], 5, 1e6);
        assert_eq!(f.len(), 12);
        assert_eq!(f.point(0), [0.125, 0.0]);
        assert_eq!(f.point(11), [0.875, 2.0]);
        assert_eq!(f.values[5], Some(1.0));
        assert_eq!(f.error_bounds[5], Some(0.0));
    }
}
