//! Explorer front end: float search that writes a ready-to-certify config.

use chaos_cert_core::Box2;
use chaos_cert_explore::{find_chain, locate_markov_rect, propose_candidates, RotationField};
use clap::ValueEnum;
use serde_json::json;

use crate::config::{ChainSpec, ConfigError, MarkovSpec, RunConfig};
use crate::document::Command;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// Disjoint pair plus visits, certified with `certify-chaos`.
    Dpd,
    Markov,
    Chain,
}

impl Target {
    pub fn command(self) -> Command {
        match self {
            Target::Dpd => Command::CertifyChaos,
            Target::Markov => Command::CertifyMarkov,
            Target::Chain => Command::CertifyChain,
        }
    }
}

pub struct Exploration {
    /// Raw explorer output, for inspection.
    pub report: serde_json::Value,
    /// `cfg` with the best proposal filled in.
    pub proposal: Option<RunConfig>,
    /// Box names the follow-up command should run on.
    pub selection: Vec<String>,
}

pub fn explore(cfg: &RunConfig, target: Target) -> Result<Exploration, ConfigError> {
    let map = cfg.build_map()?;
    let spec = cfg.explore.clone().unwrap_or_default();
    let mut proposal = cfg.clone();
    match target {
        Target::Dpd => {
            let field = RotationField::compute(
                &map,
                spec.grid[0],
                spec.grid[1],
                spec.y_range,
                spec.iterates,
                spec.params.bound,
            );
            let cands = propose_candidates(&map, &field, spec.rho_min, cfg.n, &spec.params).unwrap_or_default();
            let best = cands.iter().find(|c| !c.flagged);
            let selection = vec!["U0".to_string(), "U1".to_string()];
            let proposal = best.map(|c| {
                proposal.boxes.insert("U0".into(), c.u0);
                proposal.boxes.insert("U1".into(), c.u1);
                proposal
            });
            Ok(Exploration {
                report: json!({ "target": "dpd", "candidates": cands }),
                proposal,
                selection,
            })
        }
        Target::Markov => {
            let m = &spec.markov;
            let best = m
                .seeds
                .iter()
                .filter_map(|&s| locate_markov_rect(&map, m.anchor, m.n_iter, &m.shifts, m.trials, s))
                .max_by(|a, b| a.margin.total_cmp(&b.margin));
            let report = json!({ "target": "markov", "proposal": best });
            let proposal = best.filter(|b| b.margin > 0.0).map(|b| {
                proposal.markov = Some(MarkovSpec {
                    rect: b.rect,
                    n_iter: b.n_iter,
                    shifts: b.shifts.clone(),
                });
                proposal
            });
            Ok(Exploration {
                report,
                proposal,
                selection: Vec::new(),
            })
        }
        Target::Chain => {
            let c = &spec.chain;
            let region = Box2::from_bounds(c.region[0][0], c.region[0][1], c.region[1][0], c.region[1][1])
                .map_err(|e| ConfigError::invalid("explore.chain.region", e.to_string()))?;
            let found = find_chain(&map, c.q, c.p, &region, c.n_disks, c.max_m, c.samples, cfg.seed);
            let report = json!({ "target": "chain", "proposal": found });
            let mut selection = Vec::new();
            let proposal = found.map(|f| {
                for (i, d) in f.disks.iter().enumerate() {
                    let name = format!("C{i}");
                    proposal.boxes.insert(name.clone(), *d);
                    selection.push(name);
                }
                proposal.chain = Some(ChainSpec {
                    q: f.q,
                    p: f.p,
                    disks: selection.clone(),
                    exponents: f.exponents.clone(),
                });
                proposal
            });
            Ok(Exploration {
                report,
                proposal,
                selection,
            })
        }
    }
}
