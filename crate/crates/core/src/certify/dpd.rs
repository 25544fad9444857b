//! n-disjoint pairs and their rotational difference.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::shift::{certify_shift, ShiftCertificate, ShiftError};
use super::{CertifySettings, Verdict};
use crate::boxes::Box2;
use crate::geometry::{annulus_disjoint, inessential_by_translates, inessential_union, EnclosureSet, LiftedBox};
use crate::interval::Interval;
use crate::maps::{eval_chain, LiftedAnnulusMap, MapError};

/// Which sufficient condition showed the union of iterates inessential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InessentialCriterion {
    Strip,
    Translates,
    NotProven,
}

impl InessentialCriterion {
    pub fn holds(self) -> bool {
        self != InessentialCriterion::NotProven
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "kebab-case")]
pub enum DpdIssue {
    ShiftFailed { which: usize, error: String },
    /// Outer enclosure of the image, disjoint from every translate of the box.
    ShiftRefuted { which: usize, image: EnclosureSet },
    ChainFailed { which: usize, error: String },
    Overlap { i: usize, j: usize },
    NotInessential { which: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpdCertificate {
    pub n: usize,
    pub u0: Box2,
    pub u1: Box2,
    pub shift0: Option<ShiftCertificate>,
    pub shift1: Option<ShiftCertificate>,
    pub k0: Option<i64>,
    pub k1: Option<i64>,
    pub rho: Option<i64>,
    /// Stages `0..=n` of the lifted iterates of `U0` and `U1`.
    pub chains: [Vec<EnclosureSet>; 2],
    /// `table[i-1][j-1]`: projections of `F^i(U0)` and `F^j(U1)` proven disjoint.
    pub disjointness_table: Vec<Vec<bool>>,
    pub inessential: [InessentialCriterion; 2],
    pub issues: Vec<DpdIssue>,
    pub verdict: Verdict,
}

/// Chain of the returning lift `F - kL`: stage `i` translated by `-i·k`.
pub fn returning_chain(chain: &[EnclosureSet], k: i64) -> Vec<EnclosureSet> {
    chain
        .iter()
        .map(|s| s.translated(-(s.stage as i64) * k))
        .collect()
}

/// Inessentiality of the projected union of a chain with certified shift `k`.
pub fn inessential_check(chain: &[EnclosureSet], k: Option<i64>, l: Interval) -> InessentialCriterion {
    let Some(k) = k else {
        return InessentialCriterion::NotProven;
    };
    if chain.is_empty() {
        return InessentialCriterion::NotProven;
    }
    let ret = returning_chain(chain, k);
    if inessential_union(&ret, l) {
        InessentialCriterion::Strip
    } else if inessential_by_translates(&ret, l) {
        // Connectedness of the true union comes from the certified shift.
        InessentialCriterion::Translates
    } else {
        InessentialCriterion::NotProven
    }
}

/// Disjointness table for stages `1..=n`.
pub fn disjointness_table(a: &[EnclosureSet], b: &[EnclosureSet], n: usize, l: Interval) -> Vec<Vec<bool>> {
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|i| (1..=n).map(move |j| (i, j))).collect();
    let flat: Vec<bool> = pairs
        .par_iter()
        .map(|&(i, j)| match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => annulus_disjoint(x, y, l),
            _ => false,
        })
        .collect();
    flat.chunks(n.max(1)).map(|c| c.to_vec()).collect()
}

fn chain_for(
    map: &LiftedAnnulusMap,
    u: &Box2,
    n: usize,
    settings: &CertifySettings,
) -> Result<Vec<EnclosureSet>, MapError> {
    eval_chain(map, &LiftedBox::from_planar(*u), n, &settings.subdivision)
}

pub fn certify_ndpd(
    map: &LiftedAnnulusMap,
    u0: &Box2,
    u1: &Box2,
    n: usize,
    settings: &CertifySettings,
) -> DpdCertificate {
    let l = map.circumference();
    let n = n.max(1);
    let mut issues = Vec::new();
    let mut refuted = false;

    let ((r0, r1), (c0, c1)) = rayon::join(
        || rayon::join(|| certify_shift(map, u0, settings), || certify_shift(map, u1, settings)),
        || rayon::join(|| chain_for(map, u0, n, settings), || chain_for(map, u1, n, settings)),
    );

    let mut take_shift = |which: usize, r: Result<ShiftCertificate, ShiftError>| match r {
        Ok(c) => Some(c),
        Err(ShiftError::RefutedIntersection { image }) => {
            refuted = true;
            issues.push(DpdIssue::ShiftRefuted { which, image });
            None
        }
        Err(e) => {
            issues.push(DpdIssue::ShiftFailed {
                which,
                error: e.to_string(),
            });
            None
        }
    };
    let shift0 = take_shift(0, r0);
    let shift1 = take_shift(1, r1);

    let mut take_chain = |which: usize, r: Result<Vec<EnclosureSet>, MapError>| match r {
        Ok(c) => c,
        Err(e) => {
            issues.push(DpdIssue::ChainFailed {
                which,
                error: e.to_string(),
            });
            Vec::new()
        }
    };
    let chain0 = take_chain(0, c0);
    let chain1 = take_chain(1, c1);

    let chains_ok = chain0.len() == n + 1 && chain1.len() == n + 1;
    let table = if chains_ok {
        disjointness_table(&chain0, &chain1, n, l)
    } else {
        vec![vec![false; n]; n]
    };
    if chains_ok {
        for (i, row) in table.iter().enumerate() {
            for (j, ok) in row.iter().enumerate() {
                if !ok {
                    issues.push(DpdIssue::Overlap { i: i + 1, j: j + 1 });
                }
            }
        }
    }

    let k0 = shift0.as_ref().map(|c| c.k);
    let k1 = shift1.as_ref().map(|c| c.k);
    let inessential = [
        inessential_check(&chain0, k0, l),
        inessential_check(&chain1, k1, l),
    ];
    for (which, ok) in inessential.iter().enumerate() {
        if chains_ok && !ok.holds() {
            issues.push(DpdIssue::NotInessential { which });
        }
    }

    let rho = k0.zip(k1).map(|(a, b)| b - a);
    let all_disjoint = chains_ok && table.iter().flatten().all(|&t| t);
    let verdict = if refuted {
        Verdict::Refuted
    } else if rho.is_some() && all_disjoint && inessential.iter().all(|c| c.holds()) {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    };
    DpdCertificate {
        n,
        u0: *u0,
        u1: *u1,
        shift0,
        shift1,
        k0,
        k1,
        rho,
        chains: [chain0, chain1],
        disjointness_table: table,
        inessential,
        issues,
        verdict,
    }
}
