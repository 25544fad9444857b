//! Run configuration: map, named boxes, settings and declared hypotheses.

use std::collections::BTreeMap;
use std::path::Path;

use chaos_cert_core::certify::{CertifySettings, Declared, MarkovRect};
use chaos_cert_core::maps::{Backend, ExplicitMap, LiftedAnnulusMap, SubdivisionSettings};
use chaos_cert_core::ode::{IntegrationSettings, VectorFieldSpec};
use chaos_cert_core::Box2;
use chaos_cert_explore::ExploreParams;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("schema_version {found} is not supported (expected {expected})")]
    SchemaMismatch { found: u64, expected: u32 },
}

impl ConfigError {
    pub fn invalid(path: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            path: path.to_string(),
            message: message.into(),
        }
    }
}

/// Deserialize with the failing field's path in the error.
pub(crate) fn parse_at<T: DeserializeOwned>(value: serde_json::Value, prefix: &str) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner.as_str()) {
            (true, _) => inner.clone(),
            (false, ".") => prefix.to_string(),
            (false, _) => format!("{prefix}.{inner}"),
        };
        ConfigError::Invalid {
            path,
            message: e.into_inner().to_string(),
        }
    })
}

/// Reject documents whose `schema_version` differs before parsing the rest.
pub(crate) fn check_schema(value: &serde_json::Value, expected: u32) -> Result<(), ConfigError> {
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == expected as u64 => Ok(()),
        Some(found) => Err(ConfigError::SchemaMismatch { found, expected }),
        None => Err(ConfigError::invalid("schema_version", "missing or not an integer")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    Pendulum,
    StandardMap,
    RigidTwist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PendulumParams {
    g: f64,
    l: f64,
    #[serde(rename = "A")]
    amplitude: f64,
    #[serde(default)]
    period: Option<f64>,
    #[serde(default)]
    omega: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StandardParams {
    #[serde(rename = "K")]
    k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TwistParams {
    alpha: f64,
    tau: f64,
}

/// `"2pi"` for the pendulum, `1` for the explicit maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Circumference {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub kind: MapKind,
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circumference: Option<Circumference>,
    #[serde(default)]
    pub lift_offset: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSettings {
    pub integration: IntegrationSettings,
    /// RK4 steps per period for float orbits of the pendulum.
    pub float_steps: u32,
    pub subdivision: SubdivisionSettings,
    pub max_depth: u32,
    pub seed_grid: usize,
    pub max_seed_grid: usize,
    pub max_candidates: usize,
    pub orbit_bound: f64,
    /// Largest visit length tried.
    pub max_m: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        let c = CertifySettings::default();
        Self {
            integration: IntegrationSettings::default(),
            float_steps: 1024,
            subdivision: c.subdivision,
            max_depth: c.max_depth,
            seed_grid: c.seed_grid,
            max_seed_grid: c.max_seed_grid,
            max_candidates: c.max_candidates,
            orbit_bound: c.orbit_bound,
            max_m: 60,
        }
    }
}

impl RunSettings {
    pub fn certify(&self) -> CertifySettings {
        CertifySettings {
            subdivision: self.subdivision.clone(),
            max_depth: self.max_depth,
            seed_grid: self.seed_grid,
            max_seed_grid: self.max_seed_grid,
            max_candidates: self.max_candidates,
            orbit_bound: self.orbit_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub q: usize,
    pub p: i64,
    /// Names from `boxes`, in chain order.
    pub disks: Vec<String>,
    pub exponents: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovSpec {
    pub rect: MarkovRect,
    pub n_iter: usize,
    pub shifts: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarkovSearch {
    pub anchor: [f64; 2],
    pub n_iter: usize,
    pub shifts: Vec<i64>,
    pub trials: usize,
    /// Searches run once per seed; the largest margin wins.
    pub seeds: Vec<u64>,
}

impl Default for MarkovSearch {
    fn default() -> Self {
        Self {
            anchor: [0.0, 0.0],
            n_iter: 1,
            shifts: vec![0, 1],
            trials: 20_000,
            seeds: vec![2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainSearch {
    pub q: usize,
    pub p: i64,
    pub region: [[f64; 2]; 2],
    pub n_disks: usize,
    pub max_m: usize,
    pub samples: usize,
}

impl Default for ChainSearch {
    fn default() -> Self {
        Self {
            q: 1,
            p: 0,
            region: [[-0.4, 0.4], [-0.4, 0.4]],
            n_disks: 2,
            max_m: 40,
            samples: 4000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExploreSpec {
    /// Rotation-field lattice `[nx, ny]`.
    pub grid: [usize; 2],
    pub y_range: [f64; 2],
    pub iterates: usize,
    pub rho_min: i64,
    pub params: ExploreParams,
    pub markov: MarkovSearch,
    pub chain: ChainSearch,
}

impl Default for ExploreSpec {
    fn default() -> Self {
        Self {
            grid: [64, 161],
            y_range: [-0.5, 3.5],
            iterates: 1,
            rho_min: 3,
            params: ExploreParams::default(),
            markov: MarkovSearch::default(),
            chain: ChainSearch::default(),
        }
    }
}

fn default_n() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub map: MapConfig,
    #[serde(default)]
    pub boxes: BTreeMap<String, Box2>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub settings: RunSettings,
    /// Mandatory: the three analytic hypotheses have no defaults.
    pub declared: Declared,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markov: Option<MarkovSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explore: Option<ExploreSpec>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ConfigError::invalid("(document)", e.to_string()))?;
        check_schema(&value, SCHEMA_VERSION)?;
        let cfg: RunConfig = parse_at(value, "")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 {
            return Err(ConfigError::invalid("n", "must be at least 1"));
        }
        self.build_map()?;
        if let Some(c) = &self.chain {
            for (i, name) in c.disks.iter().enumerate() {
                self.boxed(name).map_err(|_| {
                    ConfigError::invalid(&format!("chain.disks[{i}]"), format!("no box named {name:?}"))
                })?;
            }
        }
        Ok(())
    }

    /// The box called `name`.
    pub fn boxed(&self, name: &str) -> Result<Box2, ConfigError> {
        self.boxes
            .get(name)
            .copied()
            .ok_or_else(|| ConfigError::invalid(&format!("boxes.{name}"), "not defined"))
    }

    pub fn build_map(&self) -> Result<LiftedAnnulusMap, ConfigError> {
        let m = &self.map;
        let params = m.params.clone();
        let backend = match m.kind {
            MapKind::Pendulum => {
                let p: PendulumParams = parse_at(params, "map.params")?;
                let period = match (p.period, p.omega) {
                    (Some(t), None) => t,
                    (None, Some(w)) if w > 0.0 => 2.0 * std::f64::consts::PI / w,
                    (None, Some(_)) => return Err(ConfigError::invalid("map.params.omega", "must be positive")),
                    _ => {
                        return Err(ConfigError::invalid(
                            "map.params",
                            "exactly one of `period` and `omega` is required",
                        ))
                    }
                };
                let field = VectorFieldSpec::pendulum(p.g, p.l, p.amplitude, period)
                    .map_err(|e| ConfigError::invalid("map.params", e.to_string()))?;
                Backend::Poincare {
                    field,
                    settings: self.settings.integration.clone(),
                    float_steps: self.settings.float_steps,
                }
            }
            MapKind::StandardMap => {
                let p: StandardParams = parse_at(params, "map.params")?;
                Backend::Explicit(ExplicitMap::StandardMap { k: p.k })
            }
            MapKind::RigidTwist => {
                let p: TwistParams = parse_at(params, "map.params")?;
                Backend::Explicit(ExplicitMap::RigidTwist {
                    alpha: p.alpha,
                    tau: p.tau,
                })
            }
        };
        if let Some(c) = &m.circumference {
            let ok = match (m.kind, c) {
                (MapKind::Pendulum, Circumference::Text(t)) => matches!(t.as_str(), "2pi" | "2π"),
                (MapKind::StandardMap | MapKind::RigidTwist, Circumference::Number(v)) => *v == 1.0,
                _ => false,
            };
            if !ok {
                let expected = if m.kind == MapKind::Pendulum { "\"2pi\"" } else { "1" };
                return Err(ConfigError::invalid(
                    "map.circumference",
                    format!("must be {expected} for this map kind"),
                ));
            }
        }
        LiftedAnnulusMap::from_backend(backend, m.lift_offset).map_err(|e| ConfigError::invalid("map", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "map": {"kind": "rigid-twist", "params": {"alpha": 0.3, "tau": 0.0}},
        "boxes": {"U0": {"x": ["0", "0.4"], "y": ["0x0p+0", "0.2"]}},
        "declared": {"area_preserving": true, "nonwandering": true, "birkhoff_related_ends": false}
    }"#;

    #[test]
    fn minimal_config_parses() {
        let c = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.n, 1);
        assert_eq!(c.boxed("U0").unwrap().x.hi(), 0.4);
        assert_eq!(c.settings, RunSettings::default());
    }

    #[test]
    fn echo_roundtrips() {
        let c = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    fn expect_invalid(text: &str, path: &str) {
        match RunConfig::from_json(text) {
            Err(ConfigError::Invalid { path: p, .. }) => assert_eq!(p, path),
            other => panic!("expected invalid {path}, got {other:?}"),
        }
    }

    #[test]
    fn declared_booleans_are_mandatory() {
        let text = MINIMAL.replace(r#", "birkhoff_related_ends": false"#, "");
        expect_invalid(&text, "declared");
    }

    #[test]
    fn unknown_fields_are_named() {
        expect_invalid(&MINIMAL.replace(r#""tau": 0.0"#, r#""tau": 0.0, "beta": 1"#), "map.params.beta");
        expect_invalid(
            &MINIMAL.replace(r#""schema_version": 1,"#, r#""schema_version": 1, "extra": 2,"#),
            "extra",
        );
        expect_invalid(
            &MINIMAL.replace(r#""boxes""#, r#""settings": {"max_m": 5, "speed": 1}, "boxes""#),
            "settings.speed",
        );
    }

    #[test]
    fn schema_version_checked() {
        let text = MINIMAL.replace(r#""schema_version": 1"#, r#""schema_version": 2"#);
        assert!(matches!(
            RunConfig::from_json(&text),
            Err(ConfigError::SchemaMismatch { found: 2, .. })
        ));
    }

    #[test]
    fn circumference_must_match_kind() {
        let text = MINIMAL.replace(r#""tau": 0.0}"#, r#""tau": 0.0}, "circumference": "2pi""#);
        expect_invalid(&text, "map.circumference");
    }

    #[test]
    fn pendulum_needs_one_frequency() {
        let text = MINIMAL.replace(
            r#""kind": "rigid-twist", "params": {"alpha": 0.3, "tau": 0.0}"#,
            r#""kind": "pendulum", "params": {"g": 9.8, "l": 1.0, "A": 3.0}"#,
        );
        expect_invalid(&text, "map.params");
    }
}
