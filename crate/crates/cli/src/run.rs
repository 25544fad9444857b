//! One entry point per certify command.

use std::time::Instant;

use chaos_cert_core::certify::replay::chaos_verdict;
use chaos_cert_core::certify::{
    certify_chain, certify_chaos, certify_markov, certify_ndpd, certify_visit, DpdCertificate, Theorem, Verdict,
    VisitError,
};

use crate::config::{ConfigError, RunConfig};
use crate::document::{CertificateDocument, Command, Evidence, LegError, VisitLeg};

/// Verdict, conclusion and evidence of one command.
pub type Outcome = (Verdict, Option<String>, Evidence);

pub fn dpd_conclusion(c: &DpdCertificate, names: &[String]) -> Option<String> {
    (c.verdict == Verdict::Certified).then(|| {
        format!(
            "{} and {} form a {}-disjoint pair of disks with rotation difference {}",
            names[0],
            names[1],
            c.n,
            c.rho.unwrap_or_default()
        )
    })
}

pub fn visit_conclusion(legs: &[VisitLeg]) -> Option<String> {
    let parts: Option<Vec<String>> = legs
        .iter()
        .map(|leg| {
            leg.witness
                .as_ref()
                .map(|w| format!("an orbit from {} enters {} after {} iterates", leg.from, leg.to, w.m))
        })
        .collect();
    parts.filter(|p| !p.is_empty()).map(|p| p.join("; "))
}

pub fn visit_verdict(legs: &[VisitLeg]) -> Verdict {
    if !legs.is_empty() && legs.iter().all(|l| l.witness.is_some()) {
        Verdict::Certified
    } else {
        Verdict::Inconclusive
    }
}

pub fn markov_conclusion(symbols: usize, n_iter: usize) -> String {
    format!(
        "the rectangle carries a horseshoe for F^{n_iter} on {symbols} symbols, \
         so the topological entropy of F^{n_iter} is at least log {symbols}"
    )
}

fn pair<'a>(selection: &'a [String], what: &str) -> Result<[&'a str; 2], ConfigError> {
    match selection {
        [a, b] => Ok([a, b]),
        _ => Err(ConfigError::invalid("selection", format!("{what} needs exactly two box names"))),
    }
}

/// Compute the evidence for `command` on the named boxes.
pub fn evaluate(cfg: &RunConfig, command: Command, selection: &[String]) -> Result<Outcome, ConfigError> {
    let map = cfg.build_map()?;
    let settings = cfg.settings.certify();
    let max_m = cfg.settings.max_m;
    Ok(match command {
        Command::CertifyDpd => {
            let [a, b] = pair(selection, "certify-dpd")?;
            let c = certify_ndpd(&map, &cfg.boxed(a)?, &cfg.boxed(b)?, cfg.n, &settings);
            (c.verdict, dpd_conclusion(&c, selection), Evidence::Dpd(c))
        }
        Command::CertifyChaos => {
            let [a, b] = pair(selection, "certify-chaos")?;
            let c = certify_chaos(&map, &cfg.boxed(a)?, &cfg.boxed(b)?, cfg.n, cfg.declared, max_m, &settings);
            let v = chaos_verdict(c.theorem_applied != Theorem::None, c.dpd.verdict);
            (v, c.conclusion.clone(), Evidence::Chaos(c))
        }
        Command::CertifyVisit => {
            if selection.is_empty() || selection.len() % 2 != 0 {
                return Err(ConfigError::invalid("selection", "certify-visit needs (from, to) name pairs"));
            }
            let mut jobs = Vec::new();
            for p in selection.chunks(2) {
                jobs.push((p[0].clone(), p[1].clone(), cfg.boxed(&p[0])?, cfg.boxed(&p[1])?));
            }
            let legs: Vec<VisitLeg> = jobs
                .into_iter()
                .map(|(from, to, s, t)| {
                    let (witness, error) = match certify_visit(&map, &s, &t, max_m, &settings) {
                        Ok(w) => (Some(w), None),
                        Err(e) => {
                            let code = match e {
                                VisitError::NoVisitFound { .. } => "NoVisitFound",
                                VisitError::NotDisjoint => "NotDisjoint",
                            };
                            let err = LegError {
                                code: code.into(),
                                message: e.to_string(),
                            };
                            (None, Some(err))
                        }
                    };
                    VisitLeg { from, to, witness, error }
                })
                .collect();
            (visit_verdict(&legs), visit_conclusion(&legs), Evidence::Visit(legs))
        }
        Command::CertifyChain => {
            let spec = cfg
                .chain
                .as_ref()
                .ok_or_else(|| ConfigError::invalid("chain", "certify-chain needs a `chain` section"))?;
            let disks = spec.disks.iter().map(|d| cfg.boxed(d)).collect::<Result<Vec<_>, _>>()?;
            match certify_chain(&map, spec.q, spec.p, &disks, &spec.exponents, &settings) {
                Ok(c) => (
                    Verdict::Certified,
                    Some(c.conclusion.clone()),
                    Evidence::Chain {
                        certificate: Some(c),
                        error: None,
                    },
                ),
                Err(e) => (
                    e.verdict(),
                    None,
                    Evidence::Chain {
                        certificate: None,
                        error: Some(e.to_string()),
                    },
                ),
            }
        }
        Command::CertifyMarkov => {
            let spec = cfg
                .markov
                .as_ref()
                .ok_or_else(|| ConfigError::invalid("markov", "certify-markov needs a `markov` section"))?;
            match certify_markov(&map, &spec.rect, spec.n_iter, &spec.shifts, &settings) {
                Ok(c) => {
                    let conclusion =
                        (c.verdict == Verdict::Certified).then(|| markov_conclusion(c.symbols, c.n_iter));
                    (
                        c.verdict,
                        conclusion,
                        Evidence::Markov {
                            certificate: Some(c),
                            error: None,
                        },
                    )
                }
                Err(e) => (
                    Verdict::Inconclusive,
                    None,
                    Evidence::Markov {
                        certificate: None,
                        error: Some(e.to_string()),
                    },
                ),
            }
        }
    })
}

/// Run a command and package the result as a sealed document.
pub fn run(cfg: &RunConfig, command: Command, selection: Vec<String>) -> Result<CertificateDocument, ConfigError> {
    let start = Instant::now();
    let (verdict, conclusion, evidence) = evaluate(cfg, command, &selection)?;
    let ms = start.elapsed().as_millis() as u64;
    Ok(CertificateDocument::new(
        command,
        selection,
        cfg.clone(),
        verdict,
        conclusion,
        evidence,
        ms,
    ))
}
