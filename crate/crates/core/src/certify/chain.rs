//! Periodic disk chains for `H = F^q - (pL, 0)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{first_witness, grid_points, locate, CertifySettings, Verdict};
use crate::boxes::Box2;
use crate::geometry::{EnclosureSet, LiftedBox};
use crate::maps::{eval_lift, LiftedAnnulusMap, MapError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub from: usize,
    pub to: usize,
    pub m: usize,
    pub seed: Box2,
    /// Rigorous image `H^m(seed)` in plane coordinates.
    pub image: Box2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCertificate {
    pub q: usize,
    pub p: i64,
    pub disks: Vec<Box2>,
    pub exponents: Vec<usize>,
    /// Outer enclosure of `F^q(V_i)`; relative to translate `p` every member
    /// is disjoint from `V_i`.
    pub free_images: Vec<EnclosureSet>,
    pub connections: Vec<Connection>,
    pub conclusion: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("disks {0} and {1} are not disjoint")]
    DisksOverlap(usize, usize),
    #[error("enclosure of H(V_{0}) meets V_{0}")]
    SelfIntersectionNotRefuted(usize),
    #[error("no witness for the connection from disk {0}")]
    NoWitness(usize),
    #[error(transparent)]
    Map(#[from] MapError),
}

impl ChainError {
    /// Chain failures never refute the existence of a periodic point.
    pub fn verdict(&self) -> Verdict {
        Verdict::Inconclusive
    }
}

pub(crate) fn validate(q: usize, disks: &[Box2], exponents: &[usize]) -> Result<(), ChainError> {
    if q == 0 {
        return Err(ChainError::InvalidChain("q must be at least 1".into()));
    }
    if disks.is_empty() || disks.len() != exponents.len() {
        return Err(ChainError::InvalidChain(format!(
            "{} disks with {} exponents",
            disks.len(),
            exponents.len()
        )));
    }
    if exponents.contains(&0) {
        return Err(ChainError::InvalidChain("exponents must be at least 1".into()));
    }
    for (i, a) in disks.iter().enumerate() {
        for (j, b) in disks.iter().enumerate().skip(i + 1) {
            if !a.is_disjoint(b) {
                return Err(ChainError::DisksOverlap(i, j));
            }
        }
    }
    Ok(())
}

pub fn chain_conclusion(q: usize, p: i64) -> String {
    format!("H = F^{q} - ({p}L, 0) has a fixed point, so f has a periodic orbit with rotation number {p}/{q}")
}

pub fn certify_chain(
    map: &LiftedAnnulusMap,
    q: usize,
    p: i64,
    disks: &[Box2],
    exponents: &[usize],
    settings: &CertifySettings,
) -> Result<ChainCertificate, ChainError> {
    validate(q, disks, exponents)?;
    let l = map.circumference();
    let lf = map.circumference_f64();

    let mut free_images = Vec::with_capacity(disks.len());
    for (i, v) in disks.iter().enumerate() {
        let img = eval_lift(map, &LiftedBox::from_planar(*v), q, &settings.subdivision)?;
        if img.members.iter().any(|m| !m.relative_to(p, l).is_disjoint(v)) {
            return Err(ChainError::SelfIntersectionNotRefuted(i));
        }
        free_images.push(img);
    }

    let offset = map.lift_offset();
    let base = map.clone().with_lift_offset(0);
    let mut connections = Vec::with_capacity(disks.len());
    for (i, (v, &m)) in disks.iter().zip(exponents).enumerate() {
        let j = (i + 1) % disks.len();
        let target = &disks[j];
        let steps = q * m;
        let k = p * m as i64;
        let mut hits: Vec<(f64, [f64; 2])> = grid_points(v, settings.seed_grid)
            .into_iter()
            .filter_map(|pt| {
                let mut z = pt;
                for _ in 0..steps {
                    z = base.eval_point(z);
                    if !(z[1].abs() <= settings.orbit_bound && z[0].is_finite()) {
                        return None;
                    }
                }
                let (kk, margin) = locate(target, z, lf);
                (margin > 0.0 && kk + offset * steps as i64 == k).then_some((margin, pt))
            })
            .collect();
        hits.sort_by(|a, b| b.0.total_cmp(&a.0));
        let cands: Vec<([f64; 2], usize, i64)> = hits
            .into_iter()
            .take(settings.max_candidates)
            .map(|(_, pt)| (pt, steps, k))
            .collect();
        let (_, _, w) = first_witness(map, v, target, &cands, settings.max_depth).ok_or(ChainError::NoWitness(i))?;
        connections.push(Connection {
            from: i,
            to: j,
            m,
            seed: w.seed,
            image: w.image.relative_to(k, l),
        });
    }

    Ok(ChainCertificate {
        q,
        p,
        disks: disks.to_vec(),
        exponents: exponents.to_vec(),
        free_images,
        connections,
        conclusion: chain_conclusion(q, p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::ExplicitMap;

    fn b(x0: f64, x1: f64, y0: f64, y1: f64) -> Box2 {
        Box2::from_bounds(x0, x1, y0, y1).unwrap()
    }

    #[test]
    fn rotation_has_no_planar_recurrence() {
        let m = LiftedAnnulusMap::make_explicit(ExplicitMap::RigidTwist {
            alpha: 1.0 / 3.0,
            tau: 0.0,
        })
        .unwrap();
        let s = CertifySettings::default();
        let r = certify_chain(&m, 1, 0, &[b(0.05, 0.15, 0.0, 1.0)], &[1], &s);
        assert_eq!(r.unwrap_err(), ChainError::NoWitness(0));
    }

    #[test]
    fn shape_errors() {
        let m = LiftedAnnulusMap::make_explicit(ExplicitMap::StandardMap { k: 1.0 }).unwrap();
        let s = CertifySettings::default();
        let d = b(0.0, 0.1, 0.0, 0.1);
        assert!(matches!(certify_chain(&m, 0, 0, &[d], &[1], &s), Err(ChainError::InvalidChain(_))));
        assert!(matches!(certify_chain(&m, 1, 0, &[d], &[], &s), Err(ChainError::InvalidChain(_))));
        assert!(matches!(certify_chain(&m, 1, 0, &[d], &[0], &s), Err(ChainError::InvalidChain(_))));
        assert_eq!(
            certify_chain(&m, 1, 0, &[d, b(0.05, 0.2, 0.05, 0.2)], &[1, 1], &s).unwrap_err(),
            ChainError::DisksOverlap(0, 1)
        );
    }

    #[test]
    fn non_free_disk_rejected() {
        let m = LiftedAnnulusMap::make_explicit(ExplicitMap::RigidTwist { alpha: 0.01, tau: 0.0 }).unwrap();
        let s = CertifySettings::default();
        let r = certify_chain(&m, 1, 0, &[b(0.0, 0.1, 0.0, 0.1)], &[1], &s);
        assert_eq!(r.unwrap_err(), ChainError::SelfIntersectionNotRefuted(0));
    }
}
