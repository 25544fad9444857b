//! Float search for parallelograms whose image crosses several translates.

use argmin::core::{CostFunction, Error, Executor, State};
use argmin::solver::neldermead::NelderMead;
use chaos_cert_core::certify::MarkovRect;
use chaos_cert_core::maps::LiftedAnnulusMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectProposal {
    pub rect: MarkovRect,
    pub n_iter: usize,
    pub shifts: Vec<i64>,
    /// Smallest float crossing margin over the shifts (frame units).
    pub margin: f64,
    pub seed: u64,
}

fn to_frame(r: &MarkovRect, p: [f64; 2]) -> Option<[f64; 2]> {
    let det = r.u[0] * r.v[1] - r.v[0] * r.u[1];
    if det.abs() < 1e-12 {
        return None;
    }
    let (dx, dy) = (p[0] - r.center[0], p[1] - r.center[1]);
    Some([(dx * r.v[1] - dy * r.v[0]) / det, (dy * r.u[0] - dx * r.u[1]) / det])
}

/// Float margin of the crossing condition for translate `shift`, sampled on
/// an `n x n` grid; positive means every sampled condition holds.
pub fn crossing_margin(map: &LiftedAnnulusMap, r: &MarkovRect, n_iter: usize, shift: i64, n: usize) -> f64 {
    let l = map.circumference_f64();
    let n = n.max(2);
    let target = MarkovRect {
        center: [r.center[0] + shift as f64 * l, r.center[1]],
        ..*r
    };
    let mut left = (f64::INFINITY, f64::NEG_INFINITY);
    let mut right = (f64::INFINITY, f64::NEG_INFINITY);
    let mut band = f64::INFINITY;
    for i in 0..n {
        let s = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let t = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
            let mut p = [
                r.center[0] + s * r.u[0] + t * r.v[0],
                r.center[1] + s * r.u[1] + t * r.v[1],
            ];
            for _ in 0..n_iter {
                p = map.eval_point(p);
            }
            let Some([a, b]) = to_frame(&target, p) else {
                return -9.0;
            };
            if !a.is_finite() || !b.is_finite() {
                return -9.0;
            }
            if i == 0 {
                left = (left.0.min(a), left.1.max(a));
            }
            if i == n - 1 {
                right = (right.0.min(a), right.1.max(a));
            }
            if a.abs() <= 1.0 {
                band = band.min(1.0 - b.abs());
            }
        }
    }
    let preserved = (-1.0 - left.1).min(right.0 - 1.0);
    let reversed = (left.0 - 1.0).min(-1.0 - right.1);
    preserved.max(reversed).min(band)
}

fn family_margin(map: &LiftedAnnulusMap, r: &MarkovRect, n_iter: usize, shifts: &[i64], n: usize) -> f64 {
    shifts
        .iter()
        .map(|&j| crossing_margin(map, r, n_iter, j, n))
        .fold(f64::INFINITY, f64::min)
}

fn rect_from(p: &[f64]) -> MarkovRect {
    MarkovRect {
        center: [p[0], p[1]],
        u: [p[2], p[3]],
        v: [p[4], p[5]],
    }
}

struct Cost<'a> {
    map: &'a LiftedAnnulusMap,
    n_iter: usize,
    shifts: &'a [i64],
}

impl CostFunction for Cost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, Error> {
        Ok(-family_margin(self.map, &rect_from(p), self.n_iter, self.shifts, 40))
    }
}

/// Finite-difference Jacobian of `F^n_iter` at `p`.
fn jacobian(map: &LiftedAnnulusMap, p: [f64; 2], n_iter: usize) -> [[f64; 2]; 2] {
    let f = |q: [f64; 2]| (0..n_iter).fold(q, |z, _| map.eval_point(z));
    let h = 1e-6;
    let mut j = [[0.0; 2]; 2];
    for c in 0..2 {
        let mut a = p;
        let mut b = p;
        a[c] += h;
        b[c] -= h;
        let (fa, fb) = (f(a), f(b));
        j[0][c] = (fa[0] - fb[0]) / (2.0 * h);
        j[1][c] = (fa[1] - fb[1]) / (2.0 * h);
    }
    j
}

/// Eigen-directions (unstable, stable) of a real 2x2 matrix, if hyperbolic.
fn eigen_directions(j: [[f64; 2]; 2]) -> Option<([f64; 2], [f64; 2])> {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc <= 0.0 {
        return None;
    }
    let (l1, l2) = (tr / 2.0 + disc.sqrt(), tr / 2.0 - disc.sqrt());
    let dir = |lam: f64| {
        let v = if j[0][1].abs() > 1e-12 {
            [j[0][1], lam - j[0][0]]
        } else {
            [lam - j[1][1], j[1][0]]
        };
        let n = v[0].hypot(v[1]);
        [v[0] / n, v[1] / n]
    };
    let (big, small) = if l1.abs() >= l2.abs() { (l1, l2) } else { (l2, l1) };
    Some((dir(big), dir(small)))
}

/// Nelder-Mead restarts from the best random starts.
const RESTARTS: usize = 8;

fn rotate(v: [f64; 2], a: f64, len: f64) -> [f64; 2] {
    let (s, c) = a.sin_cos();
    [len * (c * v[0] - s * v[1]), len * (s * v[0] + c * v[1])]
}

/// Random search around the hyperbolic point `anchor` (axes seeded by its
/// eigen-directions); the best starts are polished by Nelder-Mead.
pub fn locate_markov_rect(
    map: &LiftedAnnulusMap,
    anchor: [f64; 2],
    n_iter: usize,
    shifts: &[i64],
    trials: usize,
    seed: u64,
) -> Option<RectProposal> {
    let l = map.circumference_f64();
    let (eu, es) = eigen_directions(jacobian(map, anchor, n_iter))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<(f64, Vec<f64>)> = (0..trials)
        .map(|_| {
            let c = [
                anchor[0] + l * rng.gen_range(-0.5..0.5),
                anchor[1] + l * rng.gen_range(-0.5..0.5),
            ];
            let u = rotate(eu, rng.gen_range(-0.3..0.3), l * rng.gen_range(0.05..0.6));
            let v = rotate(es, rng.gen_range(-0.3..0.3), l * rng.gen_range(0.005..0.2));
            vec![c[0], c[1], u[0], u[1], v[0], v[1]]
        })
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|p| (family_margin(map, &rect_from(&p), n_iter, shifts, 12), p))
        .collect();
    starts.sort_by(|a, b| b.0.total_cmp(&a.0));
    starts.truncate(RESTARTS);
    let polished: Vec<(f64, MarkovRect)> = starts
        .into_par_iter()
        .filter_map(|(_, start)| {
            let mut simplex = vec![start.clone()];
            for i in 0..start.len() {
                let mut q = start.clone();
                q[i] += 0.02 * l;
                simplex.push(q);
            }
            let solver = NelderMead::new(simplex).with_sd_tolerance(1e-10).ok()?;
            let cost = Cost { map, n_iter, shifts };
            let res = Executor::new(cost, solver)
                .configure(|s| s.max_iters(1500))
                .run()
                .ok()?;
            let rect = rect_from(res.state().get_best_param()?);
            Some((family_margin(map, &rect, n_iter, shifts, 200), rect))
        })
        .collect();
    let (margin, rect) = polished.into_iter().max_by(|a, b| a.0.total_cmp(&b.0))?;
    Some(RectProposal {
        rect,
        n_iter,
        shifts: shifts.to_vec(),
        margin,
        seed,
    })
}
