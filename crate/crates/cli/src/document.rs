//! Certificate documents: config echo, verdict, evidence and a digest.

use chaos_cert_core::certify::{
    ChainCertificate, ChaosCertificate, DpdCertificate, MarkovCertificate, Verdict, VisitWitness,
};
use chaos_cert_core::geometry::EnclosureSet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{check_schema, parse_at, ConfigError, RunConfig};

pub const DOCUMENT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CertifyDpd,
    CertifyVisit,
    CertifyChaos,
    CertifyChain,
    CertifyMarkov,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CertifyDpd => "certify-dpd",
            Command::CertifyVisit => "certify-visit",
            Command::CertifyChaos => "certify-chaos",
            Command::CertifyChain => "certify-chain",
            Command::CertifyMarkov => "certify-markov",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegError {
    /// `NoVisitFound` or `NotDisjoint`.
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitLeg {
    pub from: String,
    pub to: String,
    pub witness: Option<VisitWitness>,
    pub error: Option<LegError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "kebab-case")]
pub enum Evidence {
    Dpd(DpdCertificate),
    Visit(Vec<VisitLeg>),
    Chaos(ChaosCertificate),
    Chain {
        certificate: Option<ChainCertificate>,
        error: Option<String>,
    },
    Markov {
        certificate: Option<MarkovCertificate>,
        error: Option<String>,
    },
}

impl Evidence {
    /// Every stored enclosure set, for budget counters and rendering.
    pub fn enclosure_sets(&self) -> Vec<&EnclosureSet> {
        match self {
            Evidence::Dpd(d) => dpd_sets(d),
            Evidence::Chaos(c) => dpd_sets(&c.dpd),
            Evidence::Visit(_) => Vec::new(),
            Evidence::Chain { certificate, .. } => {
                certificate.iter().flat_map(|c| c.free_images.iter()).collect()
            }
            Evidence::Markov { certificate, .. } => certificate
                .iter()
                .flat_map(|c| [&c.images.left, &c.images.right, &c.images.whole])
                .collect(),
        }
    }
}

fn dpd_sets(d: &DpdCertificate) -> Vec<&EnclosureSet> {
    d.chains.iter().flatten().collect()
}

/// Run statistics; excluded from the digest because they vary between runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    pub wall_ms: u64,
    pub threads: usize,
    /// Largest number of stored enclosure boxes in one stage.
    pub max_stage_boxes: usize,
    pub total_boxes: usize,
}

impl Counters {
    pub fn measure(evidence: &Evidence, wall_ms: u64) -> Self {
        let sets = evidence.enclosure_sets();
        Self {
            wall_ms,
            threads: rayon::current_num_threads(),
            max_stage_boxes: sets.iter().map(|s| s.members.len()).max().unwrap_or(0),
            total_boxes: sets.iter().map(|s| s.members.len()).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateDocument {
    pub schema_version: u32,
    pub command: Command,
    /// Box names the command ran on, in argument order.
    pub selection: Vec<String>,
    pub config: RunConfig,
    pub verdict: Verdict,
    pub conclusion: Option<String>,
    pub evidence: Evidence,
    pub counters: Counters,
    /// Hex SHA-256 of every field except `counters` and `digest`.
    pub digest: String,
}

#[derive(Serialize)]
struct Sealed<'a> {
    schema_version: u32,
    command: Command,
    selection: &'a [String],
    config: &'a RunConfig,
    verdict: Verdict,
    conclusion: &'a Option<String>,
    evidence: &'a Evidence,
}

impl CertificateDocument {
    pub fn new(
        command: Command,
        selection: Vec<String>,
        config: RunConfig,
        verdict: Verdict,
        conclusion: Option<String>,
        evidence: Evidence,
        wall_ms: u64,
    ) -> Self {
        let counters = Counters::measure(&evidence, wall_ms);
        let mut doc = Self {
            schema_version: DOCUMENT_SCHEMA_VERSION,
            command,
            selection,
            config,
            verdict,
            conclusion,
            evidence,
            counters,
            digest: String::new(),
        };
        doc.seal();
        doc
    }

    pub fn compute_digest(&self) -> String {
        let sealed = Sealed {
            schema_version: self.schema_version,
            command: self.command,
            selection: &self.selection,
            config: &self.config,
            verdict: self.verdict,
            conclusion: &self.conclusion,
            evidence: &self.evidence,
        };
        let bytes = serde_json::to_vec(&sealed).expect("document serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn seal(&mut self) {
        self.digest = self.compute_digest();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ConfigError::invalid("(document)", e.to_string()))?;
        check_schema(&value, DOCUMENT_SCHEMA_VERSION)?;
        parse_at(value, "")
    }
}
