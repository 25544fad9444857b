//! Non-rigorous reconnaissance for the certifier.
//!
//! Everything here runs in plain binary64 arithmetic. Outputs are proposals:
//! the certifier re-checks each of them from scratch and nothing in
//! `chaos-cert-core` depends on this crate.

pub mod candidates;
pub mod chain;
pub mod markov;
pub mod rotation;
pub mod visits;

pub use candidates::{propose_candidates, CandidatePair, ExploreError, ExploreParams, VisitSeed};
pub use chain::{find_chain, ChainProposal};
pub use markov::{crossing_margin, locate_markov_rect, RectProposal};
pub use rotation::{estimate_rotation, OrbitEscaped, RotationField};
pub use visits::{find_visit_orbit, VisitHit};

/// `x` reduced to `[-L/2, L/2)`.
pub(crate) fn wrap_centered(x: f64, l: f64) -> f64 {
    x - l * (x / l).round()
}

/// Max-norm distance on the annulus.
pub(crate) fn annulus_dist(a: [f64; 2], b: [f64; 2], l: f64) -> f64 {
    wrap_centered(a[0] - b[0], l).abs().max((a[1] - b[1]).abs())
}
