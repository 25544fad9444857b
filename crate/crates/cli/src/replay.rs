//! Shallow and deep replay of certificate documents.

use chaos_cert_core::certify::replay::{
    chaos_verdict, replay_chain, replay_chaos, replay_dpd, replay_markov, replay_visit,
};
use chaos_cert_core::certify::{Mismatch, Theorem, Verdict};
use chaos_cert_core::interval::Interval;
use serde::Serialize;

use crate::document::{CertificateDocument, Command, Evidence};
use crate::run::{dpd_conclusion, evaluate, markov_conclusion, visit_conclusion, visit_verdict};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub deep: bool,
    /// Verdict recomputed from the evidence; `None` if it could not be.
    pub verdict: Option<Verdict>,
    pub mismatches: Vec<Mismatch>,
}

impl ReplayReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// Stored verdict's code when everything matches, otherwise 2.
    pub fn exit_code(&self) -> i32 {
        match (self.ok(), self.verdict) {
            (true, Some(v)) => v.exit_code(),
            _ => Verdict::Inconclusive.exit_code(),
        }
    }
}

struct Checks(Vec<Mismatch>);

impl Checks {
    fn fail(&mut self, path: &str, detail: impl Into<String>) {
        self.0.push(Mismatch {
            path: path.into(),
            detail: detail.into(),
        });
    }

    fn equal<T: PartialEq + std::fmt::Debug>(&mut self, path: &str, stored: &T, expected: &T) {
        if stored != expected {
            self.fail(path, format!("stored {stored:?}, expected {expected:?}"));
        }
    }

    fn nest(&mut self, prefix: &str, inner: Vec<Mismatch>) {
        self.0.extend(inner.into_iter().map(|m| Mismatch {
            path: format!("{prefix}.{}", m.path),
            detail: m.detail,
        }));
    }
}

fn selection_kind(doc: &CertificateDocument, c: &mut Checks) {
    let kind_ok = matches!(
        (doc.command, &doc.evidence),
        (Command::CertifyDpd, Evidence::Dpd(_))
            | (Command::CertifyVisit, Evidence::Visit(_))
            | (Command::CertifyChaos, Evidence::Chaos(_))
            | (Command::CertifyChain, Evidence::Chain { .. })
            | (Command::CertifyMarkov, Evidence::Markov { .. })
    );
    if !kind_ok {
        c.fail("evidence.kind", format!("does not match command {}", doc.command.name()));
    }
}

/// Re-check a document from its own contents: digest, consistency with the
/// echoed config, every stored inclusion and the verdict logic.
pub fn shallow(doc: &CertificateDocument) -> ReplayReport {
    let mut c = Checks(Vec::new());
    let digest = doc.compute_digest();
    if digest != doc.digest {
        c.fail("digest", format!("stored {}, recomputed {digest}", doc.digest));
    }
    selection_kind(doc, &mut c);
    let cfg = &doc.config;
    let l: Interval = match cfg.build_map() {
        Ok(m) => m.circumference(),
        Err(e) => {
            c.fail("config", e.to_string());
            return ReplayReport {
                deep: false,
                verdict: None,
                mismatches: c.0,
            };
        }
    };
    let boxed = |name: &str, c: &mut Checks| match cfg.boxed(name) {
        Ok(b) => Some(b),
        Err(e) => {
            c.fail("selection", e.to_string());
            None
        }
    };
    let max_m = cfg.settings.max_m;
    let sel = &doc.selection;

    let (verdict, conclusion) = match &doc.evidence {
        Evidence::Dpd(d) => {
            if sel.len() == 2 {
                let expected = boxed(&sel[0], &mut c);
                c.equal("evidence.data.u0", &Some(d.u0), &expected);
                let expected = boxed(&sel[1], &mut c);
                c.equal("evidence.data.u1", &Some(d.u1), &expected);
            } else {
                c.fail("selection", "expected two box names");
            }
            c.equal("evidence.data.n", &d.n, &cfg.n);
            let (m, v) = replay_dpd(d, l);
            c.nest("evidence.data", m);
            let concl = if sel.len() == 2 { dpd_conclusion(d, sel) } else { None };
            (v, concl)
        }
        Evidence::Chaos(ch) => {
            if sel.len() == 2 {
                let expected = boxed(&sel[0], &mut c);
                c.equal("evidence.data.dpd.u0", &Some(ch.dpd.u0), &expected);
                let expected = boxed(&sel[1], &mut c);
                c.equal("evidence.data.dpd.u1", &Some(ch.dpd.u1), &expected);
            } else {
                c.fail("selection", "expected two box names");
            }
            c.equal("evidence.data.dpd.n", &ch.dpd.n, &cfg.n);
            c.equal("evidence.data.declared", &ch.declared, &cfg.declared);
            let (m, dv) = replay_chaos(ch, max_m, l);
            c.nest("evidence.data", m);
            let v = chaos_verdict(ch.theorem_applied != Theorem::None, dv);
            (v, ch.conclusion.clone())
        }
        Evidence::Visit(legs) => {
            let names: Vec<String> = legs.iter().flat_map(|g| [g.from.clone(), g.to.clone()]).collect();
            c.equal("selection", sel, &names);
            for (i, leg) in legs.iter().enumerate() {
                let path = format!("evidence.data[{i}]");
                if leg.witness.is_some() == leg.error.is_some() {
                    c.fail(&path, "exactly one of witness and error must be present");
                }
                if let (Some(w), Some(s), Some(t)) =
                    (&leg.witness, boxed(&leg.from, &mut c), boxed(&leg.to, &mut c))
                {
                    c.nest(&format!("{path}.witness"), replay_visit(&s, &t, w, max_m, l));
                }
            }
            (visit_verdict(legs), visit_conclusion(legs))
        }
        Evidence::Chain { certificate, error } => match (certificate, error, &cfg.chain) {
            (Some(cert), None, Some(spec)) => {
                let disks: Vec<_> = spec.disks.iter().map(|d| boxed(d, &mut c)).collect();
                c.equal("selection", sel, &spec.disks);
                c.equal("evidence.data.certificate.q", &cert.q, &spec.q);
                c.equal("evidence.data.certificate.p", &cert.p, &spec.p);
                c.equal("evidence.data.certificate.exponents", &cert.exponents, &spec.exponents);
                let stored: Vec<_> = cert.disks.iter().copied().map(Some).collect();
                c.equal("evidence.data.certificate.disks", &stored, &disks);
                c.nest("evidence.data.certificate", replay_chain(cert, l));
                (Verdict::Certified, Some(cert.conclusion.clone()))
            }
            (None, Some(_), Some(_)) => (Verdict::Inconclusive, None),
            (_, _, None) => {
                c.fail("config.chain", "missing");
                (Verdict::Inconclusive, None)
            }
            _ => {
                c.fail("evidence.data", "exactly one of certificate and error must be present");
                (Verdict::Inconclusive, None)
            }
        },
        Evidence::Markov { certificate, error } => match (certificate, error, &cfg.markov) {
            (Some(cert), None, Some(spec)) => {
                c.equal("evidence.data.certificate.rect", &cert.rect, &spec.rect);
                c.equal("evidence.data.certificate.n_iter", &cert.n_iter, &spec.n_iter);
                c.nest("evidence.data.certificate", replay_markov(cert, &spec.shifts, l));
                let concl = (cert.verdict == Verdict::Certified).then(|| markov_conclusion(cert.symbols, cert.n_iter));
                (cert.verdict, concl)
            }
            (None, Some(_), Some(_)) => (Verdict::Inconclusive, None),
            (_, _, None) => {
                c.fail("config.markov", "missing");
                (Verdict::Inconclusive, None)
            }
            _ => {
                c.fail("evidence.data", "exactly one of certificate and error must be present");
                (Verdict::Inconclusive, None)
            }
        },
    };
    c.equal("verdict", &doc.verdict, &verdict);
    c.equal("conclusion", &doc.conclusion, &conclusion);
    ReplayReport {
        deep: false,
        verdict: Some(verdict),
        mismatches: c.0,
    }
}

/// Shallow checks plus a full recomputation from the echoed config,
/// compared field by field with the stored evidence.
pub fn deep(doc: &CertificateDocument) -> ReplayReport {
    let mut report = shallow(doc);
    report.deep = true;
    let mut c = Checks(Vec::new());
    match evaluate(&doc.config, doc.command, &doc.selection) {
        Ok((verdict, conclusion, evidence)) => {
            c.equal("verdict (recomputed)", &doc.verdict, &verdict);
            c.equal("conclusion (recomputed)", &doc.conclusion, &conclusion);
            let stored = serde_json::to_value(&doc.evidence).expect("evidence serializes");
            let fresh = serde_json::to_value(&evidence).expect("evidence serializes");
            diff_values("evidence", &stored, &fresh, &mut c);
            report.verdict = Some(verdict);
        }
        Err(e) => {
            c.fail("config", e.to_string());
            report.verdict = None;
        }
    }
    report.mismatches.extend(c.0);
    report
}

/// Report the first few paths where two JSON trees differ.
fn diff_values(path: &str, a: &serde_json::Value, b: &serde_json::Value, c: &mut Checks) {
    use serde_json::Value;
    const LIMIT: usize = 20;
    if c.0.len() >= LIMIT || a == b {
        return;
    }
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let keys: std::collections::BTreeSet<_> = x.keys().chain(y.keys()).collect();
            for k in keys {
                let (va, vb) = (x.get(k).unwrap_or(&Value::Null), y.get(k).unwrap_or(&Value::Null));
                diff_values(&format!("{path}.{k}"), va, vb, c);
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (i, (va, vb)) in x.iter().zip(y).enumerate() {
                diff_values(&format!("{path}[{i}]"), va, vb, c);
            }
        }
        _ => {
            let short = |v: &Value| {
                let s = v.to_string();
                if s.chars().count() > 120 {
                    format!("{}...", s.chars().take(120).collect::<String>())
                } else {
                    s
                }
            };
            c.fail(path, format!("stored {}, recomputed {}", short(a), short(b)));
        }
    }
}
