//! Monte Carlo experiment runner and report emission.
//!
//! Every experiment is a pure function of its config: per-trial seeds are
//! `base_seed + trial_index`, trial rows are collected in trial order, and
//! aggregates are reduced sequentially from the ordered rows, so trial-level
//! parallelism can never change a reported number. Hit-flag thresholds are
//! always computed by the owning module's bound operation, never re-derived
//! here.

mod report;
mod runners;

pub use report::{EmitFormat, ExperimentReport, TrialData};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random_graph::WindowRegime;

/// Which experiment to run, with its strategy parameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentKind {
    /// TBLAS count concentration: |k - n e^{-Delta}| <= sigma_mult·sqrt(n e^{-Delta}).
    TblasConc { n: usize, alpha: f64, sigma_mult: f64 },
    /// TBLAS rate concentration against the slack-scaled half-width.
    RateConc { n: usize, alpha: f64, slack: f64 },
    /// DTBLAS active-count window (exact clique solver).
    DtblasWindow {
        n: usize,
        alpha_prime: f64,
        delta: f64,
        epsilon: f64,
        cap: usize,
    },
    /// Clique number of G(m,p) against the predicted window.
    CliqueWindow {
        m: usize,
        p: f64,
        epsilon: f64,
        regime: WindowRegime,
    },
    /// Clique-count moments of G(m,p) against the closed forms.
    SecondMoment { m: usize, p: f64, sizes: Vec<usize> },
    /// Noise-limited DTBLAS behavior.
    NoiseLimited {
        n: usize,
        beta: f64,
        rho: f64,
        lambda: f64,
        restarts: usize,
        window_slack: f64,
        k2_tolerance: i64,
    },
    /// Operating-point sweep over a lambda grid (deterministic, no trials).
    Sweep {
        lambda_min: f64,
        lambda_max: f64,
        points: usize,
        log_spacing: bool,
    },
    /// TBLAS / DTBLAS / brute-force comparison on small instances.
    BruteSandwich { n: usize, lambda: f64, size_slack: i64 },
}

fn default_parallel() -> bool {
    true
}

/// A complete experiment specification.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub kind: ExperimentKind,
    pub trials: usize,
    pub base_seed: u64,
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        use ExperimentKind::*;
        match &self.kind {
            TblasConc { n, alpha, sigma_mult } => {
                if *n < 3 {
                    return Err(Error::config("n", "must be at least 3"));
                }
                if !(*alpha > 0.0) {
                    return Err(Error::config("alpha", "must be positive"));
                }
                if !(*sigma_mult > 0.0) {
                    return Err(Error::config("sigma_mult", "must be positive"));
                }
            }
            RateConc { n, alpha, slack } => {
                if *n < 16 {
                    return Err(Error::config("n", "must be at least 16"));
                }
                if !(*alpha > 0.0) {
                    return Err(Error::config("alpha", "must be positive"));
                }
                if !(*slack > 0.0) {
                    return Err(Error::config("slack", "must be positive"));
                }
            }
            DtblasWindow {
                n,
                alpha_prime,
                delta,
                epsilon,
                cap,
            } => {
                if *n < 16 {
                    return Err(Error::config("n", "must be at least 16"));
                }
                if !(*alpha_prime > 0.0 && *alpha_prime < 1.0) {
                    return Err(Error::config("alpha_prime", "must lie in (0,1)"));
                }
                if !(*delta > 0.0) {
                    return Err(Error::config("delta", "must be positive"));
                }
                if !(*epsilon > 0.0) {
                    return Err(Error::config("epsilon", "must be positive"));
                }
                if *cap == 0 {
                    return Err(Error::config("cap", "must be positive"));
                }
            }
            CliqueWindow { m, p, epsilon, .. } => {
                if *m < 3 {
                    return Err(Error::config("m", "must be at least 3"));
                }
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::config("p", "must lie in (0,1)"));
                }
                if !(*epsilon > 0.0) {
                    return Err(Error::config("epsilon", "must be positive"));
                }
            }
            SecondMoment { m, p, sizes } => {
                if *m < 3 {
                    return Err(Error::config("m", "must be at least 3"));
                }
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::config("p", "must lie in (0,1)"));
                }
                if sizes.is_empty() || sizes.iter().any(|&s| s < 2 || s > *m) {
                    return Err(Error::config("sizes", "each size must lie in [2, m]"));
                }
            }
            NoiseLimited {
                n,
                beta,
                rho,
                lambda,
                restarts,
                window_slack,
                k2_tolerance,
            } => {
                if *n < 16 {
                    return Err(Error::config("n", "must be at least 16"));
                }
                if !(*beta > 0.0) {
                    return Err(Error::config("beta", "must be positive"));
                }
                if !(*rho > 0.0) {
                    return Err(Error::config("rho", "must be positive"));
                }
                if !(*lambda > 0.0) {
                    return Err(Error::config("lambda", "must be positive"));
                }
                if *restarts == 0 {
                    return Err(Error::config("restarts", "must be at least 1"));
                }
                if !(*window_slack >= 0.0) {
                    return Err(Error::config("window_slack", "must be nonnegative"));
                }
                if *k2_tolerance < 0 {
                    return Err(Error::config("k2_tolerance", "must be nonnegative"));
                }
            }
            Sweep {
                lambda_min,
                lambda_max,
                points,
                ..
            } => {
                if !(*lambda_min > 0.0 && *lambda_max > *lambda_min) {
                    return Err(Error::config(
                        "lambda_min/lambda_max",
                        "need 0 < lambda_min < lambda_max",
                    ));
                }
                if *points < 2 {
                    return Err(Error::config("points", "must be at least 2"));
                }
            }
            BruteSandwich { n, lambda, size_slack } => {
                if *n < 2 || *n > crate::bounds::BRUTE_FORCE_CAP {
                    return Err(Error::config(
                        "n",
                        format!("must lie in [2, {}]", crate::bounds::BRUTE_FORCE_CAP),
                    ));
                }
                if !(*lambda > 0.0) {
                    return Err(Error::config("lambda", "must be positive"));
                }
                if *size_slack < 0 {
                    return Err(Error::config("size_slack", "must be nonnegative"));
                }
            }
        }
        Ok(())
    }

    /// Seed for one trial: base_seed + index, wrapping.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }
}

/// Run an experiment to a finished report.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = std::time::Instant::now();
    let (trials, aggregates) = runners::dispatch(config)?;
    Ok(ExperimentReport {
        config: config.clone(),
        trials,
        aggregates,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}
