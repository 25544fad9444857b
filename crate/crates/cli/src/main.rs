use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chaos_cert::config::{ConfigError, RunConfig};
use chaos_cert::document::{CertificateDocument, Command};
use chaos_cert::explore::{explore, Target};
use chaos_cert::render::{render, View};
use chaos_cert::replay;
use chaos_cert::run::run;
use clap::{Args, Parser, Subcommand};

const USAGE_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "chaos-cert", version, about = "Certify rotational chaos of annulus maps")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Where to write the certificate; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap on sub-box evaluations per image stage.
    #[arg(long, value_name = "BOXES")]
    budget: Option<usize>,
}

#[derive(Args)]
struct Pair {
    #[arg(long, default_value = "U0")]
    u0: String,
    #[arg(long, default_value = "U1")]
    u1: String,
}

#[derive(Subcommand)]
enum Cmd {
    /// Float search; writes candidates.json and proposal.json.
    Explore {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "dpd")]
        target: Target,
        /// Certify the proposal and write certificate.json.
        #[arg(long)]
        certify: bool,
    },
    /// Certify that two boxes form an n-disjoint pair.
    CertifyDpd {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: Pair,
    },
    /// Certify visits between two boxes (both directions unless --from/--to).
    CertifyVisit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: Pair,
        #[arg(long, requires = "to")]
        from: Option<String>,
        #[arg(long, requires = "from")]
        to: Option<String>,
    },
    /// Disjoint pair, both visits and the theorem table.
    CertifyChaos {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: Pair,
    },
    /// Periodic disk chain from the config's `chain` section.
    CertifyChain {
        #[command(flatten)]
        common: Common,
    },
    /// Markov rectangle from the config's `markov` section.
    CertifyMarkov {
        #[command(flatten)]
        common: Common,
    },
    /// Re-check a certificate document.
    Replay {
        certificate: PathBuf,
        /// Recompute every enclosure from the echoed config.
        #[arg(long)]
        deep_replay: bool,
        /// Where to write the JSON report; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a certificate as SVG.
    Render {
        certificate: PathBuf,
        #[arg(long, value_enum, default_value = "annulus")]
        view: View,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct UsageError(String);

impl From<ConfigError> for UsageError {
    fn from(e: ConfigError) -> Self {
        UsageError(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> UsageError {
    UsageError(format!("{}: {e}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), UsageError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| io_err(p, e)),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load(common: &Common) -> Result<RunConfig, UsageError> {
    let mut cfg = RunConfig::load(&common.config)
        .map_err(|e| UsageError(format!("{}: {e}", common.config.display())))?;
    if let Some(b) = common.budget {
        if b == 0 {
            return Err(UsageError("--budget must be positive".into()));
        }
        cfg.settings.subdivision.max_boxes = b;
    }
    Ok(cfg)
}

fn load_document(path: &Path) -> Result<Result<CertificateDocument, ConfigError>, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Ok(CertificateDocument::from_json(&text))
}

fn certify(common: &Common, command: Command, selection: Vec<String>) -> Result<u8, UsageError> {
    let cfg = load(common)?;
    let doc = run(&cfg, command, selection)?;
    emit(common.out.as_deref(), &doc.to_json())?;
    report_verdict(&doc);
    Ok(doc.verdict.exit_code() as u8)
}

fn report_verdict(doc: &CertificateDocument) {
    eprintln!("{}: {:?}", doc.command.name(), doc.verdict);
    if let Some(c) = &doc.conclusion {
        eprintln!("{c}");
    }
}

fn execute(cmd: Cmd) -> Result<u8, UsageError> {
    match cmd {
        Cmd::CertifyDpd { common, pair } => certify(&common, Command::CertifyDpd, vec![pair.u0, pair.u1]),
        Cmd::CertifyChaos { common, pair } => certify(&common, Command::CertifyChaos, vec![pair.u0, pair.u1]),
        Cmd::CertifyVisit {
            common,
            pair,
            from,
            to,
        } => {
            let selection = match (from, to) {
                (Some(f), Some(t)) => vec![f, t],
                _ => vec![pair.u0.clone(), pair.u1.clone(), pair.u1, pair.u0],
            };
            certify(&common, Command::CertifyVisit, selection)
        }
        Cmd::CertifyChain { common } => {
            let cfg = load(&common)?;
            let disks = cfg
                .chain
                .as_ref()
                .map(|c| c.disks.clone())
                .ok_or_else(|| UsageError(format!("{}: chain: section missing", common.config.display())))?;
            certify(&common, Command::CertifyChain, disks)
        }
        Cmd::CertifyMarkov { common } => certify(&common, Command::CertifyMarkov, Vec::new()),
        Cmd::Explore {
            common,
            out_dir,
            target,
            certify,
        } => {
            let cfg = load(&common)?;
            std::fs::create_dir_all(&out_dir).map_err(|e| io_err(&out_dir, e))?;
            let ex = explore(&cfg, target)?;
            let report = serde_json::to_string_pretty(&ex.report).expect("report serializes");
            let p = out_dir.join("candidates.json");
            std::fs::write(&p, report).map_err(|e| io_err(&p, e))?;
            let Some(proposal) = ex.proposal else {
                eprintln!("explore: no proposal found");
                return Ok(2);
            };
            let p = out_dir.join("proposal.json");
            std::fs::write(&p, proposal.to_json()).map_err(|e| io_err(&p, e))?;
            eprintln!("explore: proposal written to {}", p.display());
            if !certify {
                return Ok(0);
            }
            let doc = run(&proposal, target.command(), ex.selection)?;
            let p = out_dir.join("certificate.json");
            std::fs::write(&p, doc.to_json()).map_err(|e| io_err(&p, e))?;
            report_verdict(&doc);
            Ok(doc.verdict.exit_code() as u8)
        }
        Cmd::Replay {
            certificate,
            deep_replay,
            out,
        } => {
            let doc = match load_document(&certificate)? {
                Ok(d) => d,
                Err(e @ ConfigError::SchemaMismatch { .. }) => {
                    return Err(UsageError(format!("{}: SchemaMismatch: {e}", certificate.display())))
                }
                Err(e) => {
                    eprintln!("replay: malformed certificate: {e}");
                    return Ok(2);
                }
            };
            let report = if deep_replay {
                replay::deep(&doc)
            } else {
                replay::shallow(&doc)
            };
            emit(
                out.as_deref(),
                &serde_json::to_string_pretty(&report).expect("report serializes"),
            )?;
            if report.ok() {
                eprintln!("replay: ok, verdict {:?}", doc.verdict);
            } else {
                eprintln!("replay: {} mismatches", report.mismatches.len());
                for m in &report.mismatches {
                    eprintln!("  {}: {}", m.path, m.detail);
                }
            }
            Ok(report.exit_code() as u8)
        }
        Cmd::Render { certificate, view, out } => {
            let doc = load_document(&certificate)??;
            emit(out.as_deref(), &render(&doc, view)?)?;
            Ok(0)
        }
    }
}

fn init_threads() -> Result<(), UsageError> {
    let Ok(v) = std::env::var("CHAOS_CERT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| UsageError(format!("CHAOS_CERT_THREADS: not a thread count: {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| UsageError(format!("CHAOS_CERT_THREADS: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = init_threads().and_then(|_| execute(cli.command));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}
