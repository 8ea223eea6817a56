//! Double-threshold link activation (DTBLAS).
//!
//! Phase 1 filters on direct gains (g_ii > Delta, same rule as TBLAS);
//! phase 2 keeps a largest subset whose cross gains are pairwise <= delta,
//! i.e. a maximum clique of the conflict graph. The exact solver is used up
//! to a vertex cap; beyond it a seeded greedy works directly against the
//! gain oracle so the conflict graph is never materialized (phase-1 sets at
//! n = 10^6 run to hundreds of thousands of vertices).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, Graph, EXACT_CLIQUE_CAP_DEFAULT};
use crate::network::{ActivationSet, NetworkInstance};
use crate::optimizer;
use crate::rng::SplitMix64;
use crate::tblas::tblas_select;

/// The two thresholds plus accessors for the derived constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DtblasParams {
    /// Phase-1 direct-gain threshold (Delta).
    pub direct_threshold: f64,
    /// Phase-2 cross-gain threshold (delta).
    pub cross_threshold: f64,
}

impl DtblasParams {
    pub fn new(direct_threshold: f64, cross_threshold: f64) -> Result<Self> {
        if !(direct_threshold > 0.0) || !(cross_threshold > 0.0) {
            return Err(Error::invalid(format!(
                "thresholds must be positive, got Delta = {direct_threshold}, delta = {cross_threshold}"
            )));
        }
        Ok(DtblasParams {
            direct_threshold,
            cross_threshold,
        })
    }

    /// Optimizer-backed parameterization for a demanded rate:
    /// delta* from the stationarity equation, Delta = (1 - alpha'*) ln n.
    pub fn for_target_rate(n: usize, lambda: f64) -> Result<(Self, optimizer::OptimalOperatingPoint)> {
        let point = optimizer::optimal_point(lambda)?;
        let params = DtblasParams::new(
            (1.0 - point.alpha_prime_star) * (n as f64).ln(),
            point.delta_star,
        )?;
        Ok((params, point))
    }

    /// Conflict-graph edge probability p = (1 - e^{-delta})^2.
    pub fn edge_probability(&self) -> f64 {
        let one_minus = -(-self.cross_threshold).exp_m1();
        one_minus * one_minus
    }

    /// b = 1/p.
    pub fn base_b(&self) -> f64 {
        self.edge_probability().recip()
    }

    pub fn mu_hat(&self) -> f64 {
        optimizer::mu_hat(self.cross_threshold).expect("cross threshold is positive")
    }

    pub fn sigma_hat_sq(&self) -> f64 {
        optimizer::sigma_hat_sq(self.cross_threshold).expect("cross threshold is positive")
    }
}

/// Conflict graph over phase-1 survivors; vertices map back to link ids.
#[derive(Debug, Clone)]
pub struct ConflictGraph {
    pub links: Vec<usize>,
    pub graph: Graph,
}

impl ConflictGraph {
    /// Edge-list export with original 1-based link labels.
    pub fn write_edge_list<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let m = self.links.len();
        for a in 0..m {
            for b in (a + 1)..m {
                if self.graph.has_edge(a, b) {
                    writeln!(w, "{} {}", self.links[a] + 1, self.links[b] + 1)?;
                }
            }
        }
        Ok(())
    }
}

/// Phase-1 sets larger than this are carried without per-link annotations
/// (annotating is O(k1^2) gain evaluations).
pub const PHASE1_ANNOTATION_LIMIT: usize = 1024;

/// Phase 1: the TBLAS rule at threshold Delta.
pub fn phase1_select(inst: &NetworkInstance, direct_threshold: f64) -> ActivationSet {
    tblas_select(inst, direct_threshold)
}

#[inline]
fn compatible(inst: &NetworkInstance, delta: f64, a: usize, b: usize) -> bool {
    inst.gain(a, b) <= delta && inst.gain(b, a) <= delta
}

/// Build the conflict graph: edge {i, j} iff both cross gains are <= delta
/// (non-strict, as defined).
pub fn build_conflict_graph(
    inst: &NetworkInstance,
    candidates: &[usize],
    delta: f64,
) -> Result<ConflictGraph> {
    if let Some(&bad) = candidates.iter().find(|&&i| i >= inst.n()) {
        return Err(Error::invalid(format!(
            "candidate {bad} out of range for n = {}",
            inst.n()
        )));
    }
    let m = candidates.len();
    let mut graph = Graph::new(m);
    for a in 0..m {
        for b in (a + 1)..m {
            if compatible(inst, delta, candidates[a], candidates[b]) {
                graph.add_edge(a, b);
            }
        }
    }
    Ok(ConflictGraph {
        links: candidates.to_vec(),
        graph,
    })
}

/// How phase 2 solves the clique problem.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CliqueMode {
    /// Branch-and-bound on the materialized conflict graph.
    Exact { cap: usize },
    /// Seeded randomized greedy against the gain oracle; optionally stops
    /// once `max_size` links are selected.
    Greedy {
        restarts: usize,
        seed: u64,
        max_size: Option<usize>,
    },
}

impl CliqueMode {
    pub fn exact() -> Self {
        CliqueMode::Exact {
            cap: EXACT_CLIQUE_CAP_DEFAULT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CliqueCertificate {
    Exact,
    GreedyLowerBound,
}

/// Result of the two-phase selection.
#[derive(Debug, Clone)]
pub struct DtblasResult {
    pub phase1: ActivationSet,
    pub active: ActivationSet,
    pub certificate: CliqueCertificate,
}

/// Greedy maximal clique over an implicit compatibility oracle: scan
/// candidates in a shuffled order, keep everything compatible with the
/// current clique, best of `restarts` rounds. Deterministic per seed.
fn greedy_clique_oracle<F: Fn(usize, usize) -> bool>(
    candidates: &[usize],
    compatible: F,
    restarts: usize,
    seed: u64,
    max_size: Option<usize>,
) -> Vec<usize> {
    if candidates.is_empty() {
        return Vec::new();
    }
    let cap = max_size.unwrap_or(usize::MAX);
    let mut rng = SplitMix64::new(seed);
    let mut order: Vec<usize> = candidates.to_vec();
    let mut best: Vec<usize> = Vec::new();
    for _ in 0..restarts.max(1) {
        rng.shuffle(&mut order);
        let mut clique: Vec<usize> = Vec::new();
        let mut remaining: Vec<usize> = order.clone();
        while let Some(&v) = remaining.first() {
            clique.push(v);
            if clique.len() >= cap {
                break;
            }
            remaining.retain(|&u| u != v && compatible(u, v));
        }
        if clique.len() > best.len() {
            best = clique;
            if best.len() >= cap {
                break;
            }
        }
    }
    best.sort_unstable();
    best
}

/// Run both phases and annotate the result.
pub fn dtblas_select(
    inst: &NetworkInstance,
    params: &DtblasParams,
    mode: &CliqueMode,
) -> Result<DtblasResult> {
    let phase1_links = crate::tblas::threshold_indices(inst, params.direct_threshold);
    let delta = params.cross_threshold;
    let (links, certificate) = match *mode {
        CliqueMode::Exact { cap } => {
            if phase1_links.len() > cap {
                return Err(Error::CliqueSizeCap {
                    cap,
                    got: phase1_links.len(),
                });
            }
            let cg = build_conflict_graph(inst, &phase1_links, delta)?;
            let clique = graph::max_clique_exact_capped(&cg.graph, cap)?;
            let mut links: Vec<usize> = clique.into_iter().map(|v| cg.links[v]).collect();
            links.sort_unstable();
            (links, CliqueCertificate::Exact)
        }
        CliqueMode::Greedy {
            restarts,
            seed,
            max_size,
        } => {
            let links = greedy_clique_oracle(
                &phase1_links,
                |a, b| compatible(inst, delta, a, b),
                restarts,
                seed,
                max_size,
            );
            (links, CliqueCertificate::GreedyLowerBound)
        }
    };
    let phase1 = if phase1_links.len() <= PHASE1_ANNOTATION_LIMIT {
        ActivationSet::annotated(inst, phase1_links)?
    } else {
        ActivationSet::unannotated(inst, phase1_links)?
    };
    let active = ActivationSet::annotated(inst, links)?;
    Ok(DtblasResult {
        phase1,
        active,
        certificate,
    })
}

/// Predicted concentration window for the number of active links:
/// k'_± = floor(2 log_b m - 2 log_b(log_b(m(1 - 1/b))) + 2 log_b(e/2) + 1
/// ± eps/p) with m = n e^{-Delta} and b = (1 - e^{-delta})^{-2}.
pub fn predicted_k2_window(
    n: usize,
    direct_threshold: f64,
    cross_threshold: f64,
    epsilon: f64,
) -> Result<(i64, i64)> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let params = DtblasParams::new(direct_threshold, cross_threshold)?;
    let p = params.edge_probability();
    let b = params.base_b();
    if b < 1.0 + 1e-6 {
        return Err(Error::OutOfDomain(format!(
            "b = {b} too close to 1 (delta too large); the window diverges"
        )));
    }
    let m = n as f64 * (-direct_threshold).exp();
    let ln_b = b.ln();
    let log_b = |x: f64| x.ln() / ln_b;
    let inner = m * (1.0 - b.recip());
    let lb_inner = log_b(inner);
    if lb_inner <= 0.0 {
        return Err(Error::OutOfDomain(format!(
            "log_b(ne^{{-Delta}}(1-1/b)) = {lb_inner} must be positive (argument {inner})"
        )));
    }
    let core =
        2.0 * log_b(m) - 2.0 * lb_inner.ln() / ln_b + 2.0 * log_b(std::f64::consts::E / 2.0) + 1.0;
    let shift = epsilon / p;
    Ok(((core - shift).floor() as i64, (core + shift).floor() as i64))
}

/// Achievable-throughput lower bound k2·ln(1 + Delta/(mu_hat·k2)); the
/// vanishing correction term is omitted.
pub fn dtblas_throughput_lower_bound(k2: usize, direct_threshold: f64, mu_hat: f64) -> Result<f64> {
    if k2 < 1 {
        return Err(Error::invalid("k2 must be at least 1"));
    }
    if !(mu_hat > 0.0) {
        return Err(Error::invalid("mu_hat must be positive"));
    }
    let k = k2 as f64;
    Ok(k * (direct_threshold / (mu_hat * k)).ln_1p())
}
