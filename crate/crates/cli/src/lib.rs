//! Config, certificate documents, replay and rendering behind the
//! `chaos-cert` binary.

pub mod config;
pub mod document;
pub mod explore;
pub mod render;
pub mod replay;
pub mod run;

pub use config::{ConfigError, RunConfig};
pub use document::{CertificateDocument, Command, Evidence};
