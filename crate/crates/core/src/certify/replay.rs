//! Re-checking stored evidence with the interval kernel alone.
//!
//! Nothing here evaluates a map: every inclusion, disjointness and
//! inessentiality test is repeated on the enclosures carried by the
//! certificate, and the verdict logic is re-run on the outcomes. Whether the
//! stored enclosures really enclose the map is the business of a deep
//! replay, which recomputes them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::chain::{chain_conclusion, validate, ChainCertificate};
use super::chaos::{decide, ChaosCertificate};
use super::dpd::{disjointness_table, inessential_check, DpdCertificate, DpdIssue};
use super::markov::{evaluate_shifts, MarkovCertificate};
use super::shift::{touching_translates, ShiftCertificate};
use super::visit::VisitWitness;
use super::Verdict;
use crate::boxes::Box2;
use crate::geometry::{boxes_annulus_disjoint, EnclosureSet, LiftedBox};
use crate::interval::Interval;

/// One failed check: where in the evidence, and what was expected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub path: String,
    pub detail: String,
}

#[derive(Debug, Default)]
struct Report(Vec<Mismatch>);

impl Report {
    fn check(&mut self, ok: bool, path: &str, detail: impl FnOnce() -> String) {
        if !ok {
            self.0.push(Mismatch {
                path: path.to_string(),
                detail: detail(),
            });
        }
    }

    fn equal<T: PartialEq + std::fmt::Debug>(&mut self, path: &str, stored: &T, recomputed: &T) {
        self.check(stored == recomputed, path, || {
            format!("stored {stored:?}, recomputed {recomputed:?}")
        });
    }

    fn nest(&mut self, prefix: &str, inner: Vec<Mismatch>) {
        self.0.extend(inner.into_iter().map(|m| Mismatch {
            path: format!("{prefix}.{}", m.path),
            detail: m.detail,
        }));
    }
}

fn translates_touched(set: &EnclosureSet, u: &Box2, l: Interval) -> BTreeSet<i64> {
    set.members.iter().flat_map(|m| touching_translates(m, u, l)).collect()
}

pub fn replay_shift(u: &Box2, c: &ShiftCertificate, l: Interval) -> Vec<Mismatch> {
    let mut r = Report::default();
    r.check(u.strictly_encloses(&c.witness), "witness", || "not inside the box interior".into());
    r.check(u.strictly_encloses(&c.witness_image), "witness_image", || {
        format!("not inside the interior of translate {}", c.k)
    });
    r.check(c.image.stage == 1, "image.stage", || format!("{} != 1", c.image.stage));
    r.check(!c.image.members.is_empty(), "image", || "empty enclosure".into());
    let touched = translates_touched(&c.image, u, l);
    r.equal("image (translates met)", &touched, &BTreeSet::from([c.k]));
    r.equal("image_hull", &Some(c.image_hull), &c.image.hull_relative(c.k, l));
    r.0
}

fn replay_chain_stages(chain: &[EnclosureSet], u: &Box2, n: usize, path: &str, r: &mut Report) {
    r.check(chain.len() == n + 1, path, || format!("{} stages for n = {n}", chain.len()));
    for (i, s) in chain.iter().enumerate() {
        r.check(s.stage == i, &format!("{path}[{i}].stage"), || format!("{} != {i}", s.stage));
    }
    if let Some(first) = chain.first() {
        r.equal(
            &format!("{path}[0]"),
            first,
            &EnclosureSet::single(0, LiftedBox::from_planar(*u)),
        );
    }
}

/// Re-checks a dpd certificate; returns the mismatches and the verdict the
/// evidence supports.
pub fn replay_dpd(c: &DpdCertificate, l: Interval) -> (Vec<Mismatch>, Verdict) {
    let mut r = Report::default();
    let n = c.n;
    r.check(n >= 1, "n", || "must be at least 1".into());
    let boxes = [c.u0, c.u1];
    let shifts = [&c.shift0, &c.shift1];
    let ks = [c.k0, c.k1];
    for i in 0..2 {
        if let Some(s) = shifts[i] {
            r.nest(&format!("shift{i}"), replay_shift(&boxes[i], s, l));
        }
        r.equal(&format!("k{i}"), &ks[i], &shifts[i].as_ref().map(|s| s.k));
    }
    r.equal("rho", &c.rho, &c.k0.zip(c.k1).map(|(a, b)| b - a));

    let chains_ok = c.chains[0].len() == n + 1 && c.chains[1].len() == n + 1;
    if chains_ok {
        for i in 0..2 {
            replay_chain_stages(&c.chains[i], &boxes[i], n, &format!("chains[{i}]"), &mut r);
            if let Some(s) = shifts[i] {
                r.equal(&format!("chains[{i}][1]"), &c.chains[i][1], &s.image);
            }
        }
    }
    let table = if chains_ok {
        disjointness_table(&c.chains[0], &c.chains[1], n, l)
    } else {
        vec![vec![false; n]; n]
    };
    r.equal("disjointness_table", &c.disjointness_table, &table);
    let ess = [
        inessential_check(&c.chains[0], c.k0, l),
        inessential_check(&c.chains[1], c.k1, l),
    ];
    r.equal("inessential", &c.inessential, &ess);

    // A refutation stands only if its enclosure misses every translate.
    let mut refuted = false;
    for (idx, issue) in c.issues.iter().enumerate() {
        if let DpdIssue::ShiftRefuted { which, image } = issue {
            let u = boxes.get(*which).copied();
            let ok = u.is_some_and(|u| !image.members.is_empty() && translates_touched(image, &u, l).is_empty());
            r.check(ok, &format!("issues[{idx}]"), || "refuting enclosure meets a translate".into());
            refuted |= ok;
        }
    }
    let all_disjoint = chains_ok && table.iter().flatten().all(|&t| t);
    let verdict = if refuted {
        Verdict::Refuted
    } else if c.rho.is_some() && all_disjoint && ess.iter().all(|e| e.holds()) {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    };
    r.equal("verdict", &c.verdict, &verdict);
    (r.0, verdict)
}

pub fn replay_visit(source: &Box2, target: &Box2, w: &VisitWitness, max_m: usize, l: Interval) -> Vec<Mismatch> {
    let mut r = Report::default();
    r.check(boxes_annulus_disjoint(source, target, l), "boxes", || {
        "source and target not provably disjoint".into()
    });
    r.check((1..=max_m).contains(&w.m), "m", || format!("{} outside 1..={max_m}", w.m));
    r.check(source.strictly_encloses(&w.seed), "seed", || "not inside the source interior".into());
    r.check(target.strictly_encloses(&w.final_enclosure), "final_enclosure", || {
        format!("not inside the interior of target translate {}", w.k)
    });
    r.0
}

pub fn replay_chaos(c: &ChaosCertificate, max_m: usize, l: Interval) -> (Vec<Mismatch>, Verdict) {
    let mut r = Report::default();
    let (dm, dv) = replay_dpd(&c.dpd, l);
    r.nest("dpd", dm);
    let relabeled = c.dpd.rho.is_some_and(|x| x < 0);
    let (a, b) = if relabeled {
        (c.dpd.u1, c.dpd.u0)
    } else {
        (c.dpd.u0, c.dpd.u1)
    };
    if let Some(w) = &c.visit_01 {
        r.nest("visit_01", replay_visit(&a, &b, w, max_m, l));
    }
    if let Some(w) = &c.visit_10 {
        r.nest("visit_10", replay_visit(&b, &a, w, max_m, l));
    }
    let missing = |v: &Option<VisitWitness>| if v.is_some() { Ok(()) } else { Err("absent") };
    let d = decide(dv, c.dpd.n, c.dpd.rho, missing(&c.visit_01), missing(&c.visit_10), c.declared);
    r.equal("relabeled", &c.relabeled, &d.relabeled);
    r.equal("rho", &c.rho, &d.rho);
    r.equal("theorem_applied", &c.theorem_applied, &d.theorem_applied);
    r.equal("implied_interval", &c.implied_interval, &d.implied_interval);
    r.equal("conclusion", &c.conclusion, &d.conclusion);
    let verdict = chaos_verdict(c.theorem_applied != super::Theorem::None, dv);
    (r.0, verdict)
}

/// Certified when a theorem applies; Refuted only with a refuted dpd.
pub fn chaos_verdict(theorem_applied: bool, dpd: Verdict) -> Verdict {
    if theorem_applied {
        Verdict::Certified
    } else if dpd == Verdict::Refuted {
        Verdict::Refuted
    } else {
        Verdict::Inconclusive
    }
}

pub fn replay_chain(c: &ChainCertificate, l: Interval) -> Vec<Mismatch> {
    let mut r = Report::default();
    if let Err(e) = validate(c.q, &c.disks, &c.exponents) {
        r.check(false, "disks", || e.to_string());
        return r.0;
    }
    let len = c.disks.len();
    r.check(c.free_images.len() == len, "free_images", || format!("{} sets for {len} disks", c.free_images.len()));
    for (i, (set, v)) in c.free_images.iter().zip(&c.disks).enumerate() {
        r.check(set.stage == c.q, &format!("free_images[{i}].stage"), || format!("{} != q", set.stage));
        r.check(!set.members.is_empty(), &format!("free_images[{i}]"), || "empty enclosure".into());
        let free = set.members.iter().all(|m| m.relative_to(c.p, l).is_disjoint(v));
        r.check(free, &format!("free_images[{i}]"), || "meets its disk".into());
    }
    r.check(c.connections.len() == len, "connections", || {
        format!("{} connections for {len} disks", c.connections.len())
    });
    for (i, conn) in c.connections.iter().enumerate() {
        let path = format!("connections[{i}]");
        r.equal(&format!("{path}.from"), &conn.from, &i);
        r.equal(&format!("{path}.to"), &conn.to, &((i + 1) % len));
        r.equal(&format!("{path}.m"), &Some(conn.m), &c.exponents.get(i).copied());
        if let (Some(src), Some(dst)) = (c.disks.get(conn.from), c.disks.get(conn.to)) {
            r.check(src.strictly_encloses(&conn.seed), &format!("{path}.seed"), || "not inside the disk interior".into());
            r.check(dst.strictly_encloses(&conn.image), &format!("{path}.image"), || {
                "not inside the next disk's interior".into()
            });
        }
    }
    r.equal("conclusion", &c.conclusion, &chain_conclusion(c.q, c.p));
    r.0
}

pub fn replay_markov(c: &MarkovCertificate, shifts: &[i64], l: Interval) -> Vec<Mismatch> {
    let mut r = Report::default();
    for (name, set) in [("left", &c.images.left), ("right", &c.images.right), ("whole", &c.images.whole)] {
        r.check(set.stage == c.n_iter, &format!("images.{name}.stage"), || format!("{} != n_iter", set.stage));
        r.check(!set.members.is_empty(), &format!("images.{name}"), || "empty enclosure".into());
    }
    let (verdicts, symbols, entropy, verdict) = evaluate_shifts(&c.rect, c.n_iter, shifts, &c.images, l);
    r.equal("verdicts", &c.verdicts, &verdicts);
    r.equal("symbols", &c.symbols, &symbols);
    r.equal("entropy_lower_bound", &c.entropy_lower_bound, &entropy);
    r.equal("verdict", &c.verdict, &verdict);
    r.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{certify_chaos, certify_ndpd, CertifySettings, Declared};
    use crate::maps::{ExplicitMap, LiftedAnnulusMap};

    fn b(x0: f64, x1: f64, y0: f64, y1: f64) -> Box2 {
        Box2::from_bounds(x0, x1, y0, y1).unwrap()
    }

    fn twist(alpha: f64, tau: f64) -> LiftedAnnulusMap {
        LiftedAnnulusMap::make_explicit(ExplicitMap::RigidTwist { alpha, tau }).unwrap()
    }

    #[test]
    fn honest_dpd_replays() {
        let m = twist(0.3, 0.0);
        let c = certify_ndpd(&m, &b(0.0, 0.4, 0.0, 0.2), &b(0.0, 0.4, 0.5, 0.7), 2, &CertifySettings::default());
        let (mm, v) = replay_dpd(&c, m.circumference());
        assert!(mm.is_empty(), "{mm:?}");
        assert_eq!(v, c.verdict);
    }

    #[test]
    fn moved_witness_detected() {
        let m = twist(0.3, 0.0);
        let mut c = certify_ndpd(&m, &b(0.0, 0.4, 0.0, 0.2), &b(0.0, 0.4, 0.5, 0.7), 1, &CertifySettings::default());
        let s = c.shift0.as_mut().unwrap();
        s.witness_image = s.witness_image.shift_x(Interval::point(1.0));
        let (mm, _) = replay_dpd(&c, m.circumference());
        assert!(mm.iter().any(|x| x.path == "shift0.witness_image"), "{mm:?}");
    }

    #[test]
    fn flipped_table_entry_detected() {
        let m = twist(0.3, 0.0);
        let mut c = certify_ndpd(&m, &b(0.0, 0.4, 0.0, 0.2), &b(0.0, 0.4, 0.1, 0.3), 1, &CertifySettings::default());
        assert_eq!(c.verdict, Verdict::Inconclusive);
        c.disjointness_table[0][0] = true;
        c.verdict = Verdict::Certified;
        let (mm, v) = replay_dpd(&c, m.circumference());
        assert_eq!(v, Verdict::Inconclusive);
        assert!(mm.iter().any(|x| x.path == "disjointness_table"));
        assert!(mm.iter().any(|x| x.path == "verdict"));
    }

    #[test]
    fn refutation_replays() {
        let m = twist(0.3, 0.0);
        let c = certify_ndpd(&m, &b(0.0, 0.1, 0.0, 1.0), &b(0.0, 0.4, 2.0, 2.2), 1, &CertifySettings::default());
        assert_eq!(c.verdict, Verdict::Refuted);
        let (mm, v) = replay_dpd(&c, m.circumference());
        assert!(mm.is_empty(), "{mm:?}");
        assert_eq!(v, Verdict::Refuted);
    }

    #[test]
    fn chaos_theorem_claim_rechecked() {
        let m = twist(0.3, 0.0);
        let d = Declared {
            area_preserving: true,
            nonwandering: true,
            birkhoff_related_ends: true,
        };
        let mut c = certify_chaos(&m, &b(0.0, 0.4, 0.0, 0.2), &b(0.0, 0.4, 0.5, 0.7), 1, d, 5, &CertifySettings::default());
        let l = m.circumference();
        let (mm, v) = replay_chaos(&c, 5, l);
        assert!(mm.is_empty(), "{mm:?}");
        assert_eq!(v, Verdict::Inconclusive);
        c.theorem_applied = super::super::Theorem::B;
        let (mm, _) = replay_chaos(&c, 5, l);
        assert!(mm.iter().any(|x| x.path == "theorem_applied"));
    }
}
