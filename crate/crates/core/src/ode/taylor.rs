//! Taylor coefficients of the autonomized pendulum field.
//!
//! The state `(q, v)` is expanded in time together with the auxiliary series
//! `S = sin q`, `C = cos q` and the forcing pair `W = sin ωt`, `Wc = cos ωt`:
//!
//! ```text
//! q_{k+1} = v_k / (k+1)
//! v_{k+1} = (-γ S_k + A W_k) / (k+1)
//! S_k = (1/k) Σ_{j=1..k} j q_j C_{k-j}
//! C_k = -(1/k) Σ_{j=1..k} j q_j S_{k-j}
//! ```

use std::ops::{Add, Mul, Sub};

use crate::interval::Interval;

use super::{Restoring, VectorFieldSpec};

/// Arithmetic needed by the coefficient recursion.
pub(crate) trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
    fn constant(c: Interval) -> Self;
    fn scale(self, c: Interval) -> Self;
    fn sin_cos(self) -> (Self, Self);
}

impl Scalar for Interval {
    #[inline]
    fn constant(c: Interval) -> Self {
        c
    }
    #[inline]
    fn scale(self, c: Interval) -> Self {
        self * c
    }
    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
}

/// Value plus gradient with respect to the initial state `(q0, v0)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Jet {
    pub v: Interval,
    pub d: [Interval; 2],
}

impl Jet {
    pub fn variable(v: Interval, index: usize) -> Self {
        let mut d = [Interval::ZERO; 2];
        d[index] = Interval::ONE;
        Self { v, d }
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1]],
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, o: Jet) -> Jet {
        Jet {
            v: self.v - o.v,
            d: [self.d[0] - o.d[0], self.d[1] - o.d[1]],
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d: [
                self.v * o.d[0] + self.d[0] * o.v,
                self.v * o.d[1] + self.d[1] * o.v,
            ],
        }
    }
}

impl Scalar for Jet {
    #[inline]
    fn constant(c: Interval) -> Self {
        Jet {
            v: c,
            d: [Interval::ZERO; 2],
        }
    }
    #[inline]
    fn scale(self, c: Interval) -> Self {
        Jet {
            v: self.v * c,
            d: [self.d[0] * c, self.d[1] * c],
        }
    }
    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        let (s, c) = (self.v.sin(), self.v.cos());
        (
            Jet {
                v: s,
                d: [self.d[0] * c, self.d[1] * c],
            },
            Jet {
                v: c,
                d: [-(self.d[0] * s), -(self.d[1] * s)],
            },
        )
    }
}

/// Reciprocals `1/k` for the recursion, outward rounded.
fn inv(k: usize) -> Interval {
    Interval::ONE / Interval::point(k as f64)
}

/// Forcing series `A·sin(ω(t0 + s))` in powers of `s`, up to `order`.
pub(crate) fn forcing_series(field: &VectorFieldSpec, t0: Interval, order: usize) -> Vec<Interval> {
    let omega = field.omega();
    let phase = omega * t0;
    let mut w = vec![phase.sin()];
    let mut wc = vec![phase.cos()];
    for k in 1..=order {
        let ik = inv(k);
        let wk = omega * wc[k - 1] * ik;
        let wck = -(omega * w[k - 1] * ik);
        w.push(wk);
        wc.push(wck);
    }
    let amp = Interval::point(field.amplitude);
    w.into_iter().map(|x| x * amp).collect()
}

/// Coefficients `(q_k, v_k)` for `k = 0..=order` at initial state `(q0, v0)`.
pub(crate) fn coefficients<S: Scalar>(
    field: &VectorFieldSpec,
    q0: S,
    v0: S,
    forcing: &[Interval],
    order: usize,
) -> (Vec<S>, Vec<S>) {
    let gamma = field.gamma();
    let mut q = Vec::with_capacity(order + 1);
    let mut v = Vec::with_capacity(order + 1);
    q.push(q0);
    v.push(v0);
    let (s0, c0) = match field.restoring {
        Restoring::Sine => q0.sin_cos(),
        Restoring::Linear => (q0, S::constant(Interval::ZERO)),
    };
    let mut s = vec![s0];
    let mut c = vec![c0];
    for k in 0..order {
        if k >= 1 && field.restoring == Restoring::Sine {
            let mut sk = S::constant(Interval::ZERO);
            let mut ck = S::constant(Interval::ZERO);
            for j in 1..=k {
                let jq = q[j].scale(Interval::point(j as f64));
                sk = sk + jq * c[k - j];
                ck = ck + jq * s[k - j];
            }
            let ik = inv(k);
            s.push(sk.scale(ik));
            c.push(ck.scale(-ik));
        } else if k >= 1 {
            s.push(q[k]);
        }
        let ik1 = inv(k + 1);
        q.push(v[k].scale(ik1));
        let force = S::constant(forcing[k]);
        v.push((force - s[k].scale(gamma)).scale(ik1));
    }
    (q, v)
}

/// Evaluate `Σ x_k h^k` by Horner's rule.
pub(crate) fn horner<S: Scalar>(coeffs: &[S], h: Interval) -> S {
    let mut acc = *coeffs.last().expect("nonempty series");
    for c in coeffs.iter().rev().skip(1) {
        acc = acc.scale(h) + *c;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_rotor() -> VectorFieldSpec {
        VectorFieldSpec::pendulum(0.0, 1.0, 0.0, 2.5).unwrap()
    }

    #[test]
    fn free_rotor_series_is_linear() {
        let f = free_rotor();
        let forcing = forcing_series(&f, Interval::ZERO, 6);
        let (q, v) = coefficients(&f, Interval::point(0.5), Interval::point(2.0), &forcing, 6);
        assert_eq!(q[1], Interval::point(2.0));
        for k in 2..=6 {
            assert!(q[k].contains_zero() && q[k].width() == 0.0);
        }
        assert!(v[1..].iter().all(|x| x.mag() == 0.0));
    }

    #[test]
    fn linear_field_series_matches_cosine() {
        // q'' = -q from (1, 0): q(t) = cos t, coefficients (-1)^m / (2m)!.
        let f = VectorFieldSpec::linear_test(1.0);
        let forcing = forcing_series(&f, Interval::ZERO, 8);
        let (q, _) = coefficients(&f, Interval::ONE, Interval::ZERO, &forcing, 8);
        let expect = [1.0, 0.0, -0.5, 0.0, 1.0 / 24.0, 0.0, -1.0 / 720.0, 0.0, 1.0 / 40320.0];
        for (k, e) in expect.iter().enumerate() {
            assert!(q[k].inflate(1e-15).contains(*e), "k={k} {:?}", q[k]);
        }
    }

    #[test]
    fn jet_gradient_of_sine_recursion() {
        // Second coefficient of v is -γ cos(q0) v0 / 2; check its q0-derivative.
        let f = VectorFieldSpec::pendulum(9.8, 1.0, 0.0, 2.5).unwrap();
        let forcing = forcing_series(&f, Interval::ZERO, 3);
        let q0 = Jet::variable(Interval::point(0.3), 0);
        let v0 = Jet::variable(Interval::point(1.5), 1);
        let (_, v) = coefficients(&f, q0, v0, &forcing, 3);
        let d = 9.8 * 0.3f64.sin() * 1.5 / 2.0;
        assert!(v[2].d[0].inflate(1e-13).contains(d));
        let dv = -9.8 * 0.3f64.cos() / 2.0;
        assert!(v[2].d[1].inflate(1e-13).contains(dv));
    }
}
