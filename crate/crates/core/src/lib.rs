//! Rate-constrained on-off link activation in Rayleigh-fading single-hop
//! networks: activation strategies, design-point optimization, theoretical
//! bounds, random-graph machinery, and a reproducible Monte Carlo harness.
//!
//! Module map:
//! - [`network`]: instances, SINR/rate/throughput, feasibility.
//! - [`tblas`]: the decentralized single-threshold strategy.
//! - [`dtblas`]: the centralized double-threshold strategy.
//! - [`graph`] / [`random_graph`]: cliques and G(m,p) concentration theory.
//! - [`optimizer`]: the (delta, alpha') design problem and its asymptotics.
//! - [`noise_limited`]: the SNR-dependent operating regime.
//! - [`bounds`]: upper bounds and the exhaustive ground-truth solver.
//! - [`experiment`]: seeded experiment runner and report emission.
//! - [`acceptance`]: the release-gating check suite.

// `!(x > 0.0)` in argument validation is deliberate: it rejects NaN along
// with non-positive values, which `x <= 0.0` would silently accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod bounds;
pub mod dtblas;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod network;
pub mod noise_limited;
pub mod numeric;
pub mod optimizer;
pub mod random_graph;
pub mod rng;
pub mod tblas;

pub use error::{Error, Result};
pub use network::{generate_network, ActivationSet, NetworkInstance, RateConstraint};
