//! Assembly of a dpd certificate, visits and declared hypotheses into a
//! theorem application.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::dpd::{certify_ndpd, DpdCertificate};
use super::visit::{certify_visit, VisitWitness};
use super::{CertifySettings, Verdict};
use crate::boxes::Box2;
use crate::maps::LiftedAnnulusMap;

/// Analytic hypotheses asserted by the user; echoed, never computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Declared {
    pub area_preserving: bool,
    pub nonwandering: bool,
    pub birkhoff_related_ends: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    A,
    B,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "code", rename_all = "kebab-case")]
pub enum ChaosReason {
    DpdNotCertified { verdict: Verdict },
    RhoBelowThreshold,
    NotAdmissible { n: usize, rho: i64 },
    VisitMissing { from: usize, to: usize, error: String },
    HypothesisNotDeclared { name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosCertificate {
    pub dpd: DpdCertificate,
    /// Visit from the box labelled 0 to the box labelled 1, after relabeling.
    pub visit_01: Option<VisitWitness>,
    pub visit_10: Option<VisitWitness>,
    pub declared: Declared,
    /// True when `U0` and `U1` were swapped because the signed ρ was negative.
    pub relabeled: bool,
    /// |ρ| after relabeling.
    pub rho: Option<i64>,
    pub theorem_applied: Theorem,
    pub implied_interval: Option<[Ratio<i64>; 2]>,
    pub conclusion: Option<String>,
    pub reasons: Vec<ChaosReason>,
}

/// Admissible `(n, ρ)` pairs: `n ≥ 3, ρ ≥ 1`; `n ≥ 2, ρ ≥ 2`; `n ≥ 1, ρ ≥ 3`.
pub fn admissible(n: usize, rho: u64) -> bool {
    (n >= 3 && rho >= 1) || (n >= 2 && rho >= 2) || (n >= 1 && rho >= 3)
}

/// `[1/n, ρ - 1/n]`.
pub fn implied_interval(n: usize, rho: i64) -> [Ratio<i64>; 2] {
    let inv = Ratio::new(1, n as i64);
    [inv, Ratio::from_integer(rho) - inv]
}

fn conclusion_text(theorem: Theorem, interval: &[Ratio<i64>; 2]) -> String {
    let name = match theorem {
        Theorem::A => "A",
        Theorem::B => "B",
        Theorem::None => unreachable!("no conclusion without a theorem"),
    };
    format!(
        "theorem {name}: if the declared hypotheses hold, then f has a rotational horseshoe \
         and every rational number in [{}, {}] is the rotation number of a periodic orbit of f",
        interval[0], interval[1]
    )
}

/// Theorem selection from the dpd verdict, the signed ρ and the visit
/// outcomes (already in relabeled order).
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub relabeled: bool,
    pub rho: Option<i64>,
    pub theorem_applied: Theorem,
    pub implied_interval: Option<[Ratio<i64>; 2]>,
    pub conclusion: Option<String>,
    pub reasons: Vec<ChaosReason>,
}

pub fn decide(
    dpd_verdict: Verdict,
    n: usize,
    signed_rho: Option<i64>,
    fwd: Result<(), &str>,
    back: Result<(), &str>,
    declared: Declared,
) -> Decision {
    let relabeled = signed_rho.is_some_and(|r| r < 0);
    let rho = signed_rho.map(i64::abs);

    let mut reasons = Vec::new();
    if dpd_verdict != Verdict::Certified {
        reasons.push(ChaosReason::DpdNotCertified { verdict: dpd_verdict });
    }
    let table_ok = match rho {
        Some(0) => {
            reasons.push(ChaosReason::RhoBelowThreshold);
            false
        }
        Some(r) if !admissible(n, r as u64) => {
            reasons.push(ChaosReason::NotAdmissible { n, rho: r });
            false
        }
        Some(_) => true,
        None => false,
    };
    for (from, to, v) in [(0, 1, &fwd), (1, 0, &back)] {
        if let Err(e) = v {
            reasons.push(ChaosReason::VisitMissing {
                from,
                to,
                error: e.to_string(),
            });
        }
    }
    let base = dpd_verdict == Verdict::Certified && table_ok;
    let can_b = base && fwd.is_ok() && back.is_ok() && declared.area_preserving && declared.birkhoff_related_ends;
    let can_a = base && fwd.is_ok() && declared.nonwandering;
    let theorem = if can_b {
        Theorem::B
    } else if can_a {
        Theorem::A
    } else {
        Theorem::None
    };
    if theorem == Theorem::None {
        let a_possible = declared.nonwandering;
        let b_possible = declared.area_preserving && declared.birkhoff_related_ends;
        if !a_possible && !b_possible {
            for (name, v) in [
                ("nonwandering", declared.nonwandering),
                ("area_preserving", declared.area_preserving),
                ("birkhoff_related_ends", declared.birkhoff_related_ends),
            ] {
                if !v {
                    reasons.push(ChaosReason::HypothesisNotDeclared { name: name.into() });
                }
            }
        }
    }
    let (implied, conclusion) = match (theorem, rho) {
        (Theorem::None, _) | (_, None) => (None, None),
        (t, Some(r)) => {
            let iv = implied_interval(n, r);
            (Some(iv), Some(conclusion_text(t, &iv)))
        }
    };
    Decision {
        relabeled,
        rho,
        theorem_applied: theorem,
        implied_interval: implied,
        conclusion,
        reasons,
    }
}

/// Decide which theorem applies from already computed evidence.
pub fn apply_theorems(
    dpd: DpdCertificate,
    visit_fwd: Result<VisitWitness, String>,
    visit_back: Result<VisitWitness, String>,
    declared: Declared,
) -> ChaosCertificate {
    let relabeled = dpd.rho.is_some_and(|r| r < 0);
    let (fwd, back) = if relabeled {
        (visit_back, visit_fwd)
    } else {
        (visit_fwd, visit_back)
    };
    let d = decide(
        dpd.verdict,
        dpd.n,
        dpd.rho,
        fwd.as_ref().map(|_| ()).map_err(String::as_str),
        back.as_ref().map(|_| ()).map_err(String::as_str),
        declared,
    );
    ChaosCertificate {
        dpd,
        visit_01: fwd.ok(),
        visit_10: back.ok(),
        declared,
        relabeled: d.relabeled,
        rho: d.rho,
        theorem_applied: d.theorem_applied,
        implied_interval: d.implied_interval,
        conclusion: d.conclusion,
        reasons: d.reasons,
    }
}

pub fn certify_chaos(
    map: &LiftedAnnulusMap,
    u0: &Box2,
    u1: &Box2,
    n: usize,
    declared: Declared,
    max_m: usize,
    settings: &CertifySettings,
) -> ChaosCertificate {
    let dpd = certify_ndpd(map, u0, u1, n, settings);
    let (fwd, back) = rayon::join(
        || certify_visit(map, u0, u1, max_m, settings).map_err(|e| e.to_string()),
        || certify_visit(map, u1, u0, max_m, settings).map_err(|e| e.to_string()),
    );
    apply_theorems(dpd, fwd, back, declared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::dpd::InessentialCriterion;

    fn fake_dpd(n: usize, rho: i64, verdict: Verdict) -> DpdCertificate {
        let b = Box2::point(0.0, 0.0);
        DpdCertificate {
            n,
            u0: b,
            u1: b,
            shift0: None,
            shift1: None,
            k0: Some(0),
            k1: Some(rho),
            rho: Some(rho),
            chains: [Vec::new(), Vec::new()],
            disjointness_table: vec![vec![true; n]; n],
            inessential: [InessentialCriterion::Strip; 2],
            issues: Vec::new(),
            verdict,
        }
    }

    fn visit() -> Result<VisitWitness, String> {
        Ok(VisitWitness {
            seed: Box2::point(0.0, 0.0),
            m: 1,
            k: 0,
            final_enclosure: Box2::point(0.0, 0.0),
        })
    }

    const B_ONLY: Declared = Declared {
        area_preserving: true,
        nonwandering: false,
        birkhoff_related_ends: true,
    };
    const A_ONLY: Declared = Declared {
        area_preserving: false,
        nonwandering: true,
        birkhoff_related_ends: false,
    };

    #[test]
    fn table() {
        assert!(admissible(1, 3) && admissible(2, 2) && admissible(3, 1));
        assert!(!admissible(1, 2) && !admissible(2, 1) && !admissible(5, 0));
    }

    #[test]
    fn theorem_b_interval() {
        let c = apply_theorems(fake_dpd(1, 4, Verdict::Certified), visit(), visit(), B_ONLY);
        assert_eq!(c.theorem_applied, Theorem::B);
        assert_eq!(c.implied_interval, Some([Ratio::from_integer(1), Ratio::from_integer(3)]));
        assert!(c.conclusion.unwrap().contains("[1, 3]"));
    }

    #[test]
    fn negative_rho_relabels() {
        let c = apply_theorems(fake_dpd(1, -4, Verdict::Certified), visit(), Err("none".into()), A_ONLY);
        assert!(c.relabeled);
        assert_eq!(c.rho, Some(4));
        // The backward visit becomes the forward one, which A needs.
        assert_eq!(c.theorem_applied, Theorem::None);
        let c = apply_theorems(fake_dpd(1, -4, Verdict::Certified), Err("none".into()), visit(), A_ONLY);
        assert_eq!(c.theorem_applied, Theorem::A);
    }

    #[test]
    fn zero_rho_and_inadmissible() {
        let c = apply_theorems(fake_dpd(1, 0, Verdict::Certified), visit(), visit(), B_ONLY);
        assert_eq!(c.theorem_applied, Theorem::None);
        assert!(c.reasons.contains(&ChaosReason::RhoBelowThreshold));
        let c = apply_theorems(fake_dpd(1, 2, Verdict::Certified), visit(), visit(), A_ONLY);
        assert!(c.reasons.contains(&ChaosReason::NotAdmissible { n: 1, rho: 2 }));
        let c = apply_theorems(fake_dpd(2, 2, Verdict::Certified), visit(), visit(), A_ONLY);
        assert_eq!(c.theorem_applied, Theorem::A);
        assert_eq!(
            c.implied_interval,
            Some([Ratio::new(1, 2), Ratio::new(3, 2)])
        );
    }

    #[test]
    fn flipping_hypotheses_removes_theorem() {
        for flip in 0..2 {
            let mut d = B_ONLY;
            if flip == 0 {
                d.area_preserving = false;
            } else {
                d.birkhoff_related_ends = false;
            }
            let c = apply_theorems(fake_dpd(1, 4, Verdict::Certified), visit(), visit(), d);
            assert_eq!(c.theorem_applied, Theorem::None);
            assert!(c.implied_interval.is_none());
        }
    }

    #[test]
    fn uncertified_dpd_blocks() {
        let c = apply_theorems(fake_dpd(1, 4, Verdict::Inconclusive), visit(), visit(), B_ONLY);
        assert_eq!(c.theorem_applied, Theorem::None);
    }
}
