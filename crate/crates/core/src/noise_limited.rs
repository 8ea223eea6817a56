//! DTBLAS parameterization for the noise-limited regime.
//!
//! The thresholds are chosen so that every active link sees interference
//! pinned at a design constant beta while the direct gain clears
//! Delta_0 = gamma0(1/rho + beta); then g_ii > Delta_0 and I_i <= beta
//! together guarantee r_i >= lambda, and rates scale with the transmit SNR.
//!
//! Two solutions for the cross threshold are provided. `solve_delta_nl` is
//! the asymptotic form, the root of x/(-ln x) = 2 beta/(ln n - ln ln n).
//! `solve_delta_design` solves the exact finite-n design condition
//! (k2 - 1)·mu_hat(delta) = beta at the predicted active count
//! k2 = floor(ln n / ln ln n); at n = 10^6 the asymptotic root undershoots
//! the design point badly (log log n / log n ~ 0.19 is not small), so the
//! derived parameters use the design root and report both.

use serde::{Deserialize, Serialize};

use crate::dtblas::{dtblas_select, CliqueMode, DtblasParams, DtblasResult};
use crate::error::{Error, Result};
use crate::network::{ActivationSet, NetworkInstance};
use crate::numeric::bisect;
use crate::optimizer::mu_hat;

/// Phase-1 threshold Delta_0 = gamma0 (1/rho + beta).
pub fn delta0_threshold(gamma0: f64, rho: f64, beta: f64) -> Result<f64> {
    if !(gamma0 > 0.0 && rho > 0.0 && beta > 0.0) {
        return Err(Error::invalid(format!(
            "gamma0, rho, beta must all be positive (got {gamma0}, {rho}, {beta})"
        )));
    }
    Ok(gamma0 * (rho.recip() + beta))
}

/// Solution of the asymptotic cross-threshold equation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NlDelta {
    /// Exact root of x/(-ln x) = 2 beta/(ln n - ln ln n) on (0, e^{-1}).
    pub delta: f64,
    /// Leading closed form 2 beta ln ln n / ln n, for comparison.
    pub leading: f64,
    /// Residual of the defining equation at `delta`.
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
}

fn check_n_for_nl(n: usize) -> Result<(f64, f64)> {
    if n < 16 {
        return Err(Error::invalid("n must be at least 16"));
    }
    let ln_n = (n as f64).ln();
    Ok((ln_n, ln_n.ln()))
}

/// Solve x/(-ln x) = 2 beta/(ln n - ln ln n) on (0, e^{-1}), where the left
/// side is monotone increasing. Errors if beta is too large for this n.
pub fn solve_delta_nl(n: usize, beta: f64) -> Result<NlDelta> {
    let (ln_n, ln_ln_n) = check_n_for_nl(n)?;
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    let target = 2.0 * beta / (ln_n - ln_ln_n);
    let sup = std::f64::consts::E.recip(); // value of x/(-ln x) at x = e^{-1}
    if target >= sup {
        return Err(Error::Regime(format!(
            "no root in (0, e^-1): 2 beta/(ln n - ln ln n) = {target:.6} >= 1/e; beta too large for n = {n}"
        )));
    }
    let f = |x: f64| x / (-x.ln()) - target;
    let delta = bisect(f, 1e-300, sup, 0.0)?;
    let warning = (beta.ln().abs() > ln_ln_n).then(|| {
        format!(
            "|ln beta| = {:.3} exceeds ln ln n = {ln_ln_n:.3}; the regime assumption is strained",
            beta.ln().abs()
        )
    });
    Ok(NlDelta {
        delta,
        leading: 2.0 * beta * ln_ln_n / ln_n,
        residual: f(delta),
        warning,
    })
}

/// Predicted active count k2 = floor(ln n / ln ln n).
pub fn predicted_active_nl(n: usize) -> Result<usize> {
    let (ln_n, ln_ln_n) = check_n_for_nl(n)?;
    Ok((ln_n / ln_ln_n).floor() as usize)
}

/// Solve the finite-n design condition (k2 - 1)·mu_hat(delta) = beta at
/// k2 = predicted_active_nl(n). mu_hat is increasing from 0 to 1, so this
/// needs beta < k2 - 1; otherwise the regime is unreachable at this n.
pub fn solve_delta_design(n: usize, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    let k2 = predicted_active_nl(n)?;
    if k2 < 2 || beta >= (k2 - 1) as f64 {
        return Err(Error::Regime(format!(
            "design condition (k2-1)·mu_hat = beta unsolvable: k2 = {k2}, beta = {beta}"
        )));
    }
    let target = beta / (k2 - 1) as f64; // mu_hat must equal this, in (0,1)
    let f = |d: f64| mu_hat(d).expect("positive delta") - target;
    // mu_hat(1e-9) ~ 5e-10, mu_hat(100) ~ 1: a sign change always exists.
    bisect(f, 1e-9, 100.0, 0.0)
}

/// Full parameter set for a noise-limited operating point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseLimitedParams {
    pub beta: f64,
    pub rho: f64,
    pub lambda: f64,
    pub gamma0: f64,
    /// Phase-1 threshold Delta_0.
    pub delta0: f64,
    /// Cross threshold actually used for phase 2 (design equation root).
    pub delta: f64,
    /// Asymptotic-equation root, reported for comparison.
    pub delta_asymptotic: f64,
    /// Leading closed form of the asymptotic root.
    pub delta_leading: f64,
    pub predicted_k2: usize,
}

impl NoiseLimitedParams {
    pub fn derive(n: usize, lambda: f64, rho: f64, beta: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::invalid(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let gamma0 = lambda.exp_m1();
        let delta0 = delta0_threshold(gamma0, rho, beta)?;
        let asymptotic = solve_delta_nl(n, beta)?;
        Ok(NoiseLimitedParams {
            beta,
            rho,
            lambda,
            gamma0,
            delta0,
            delta: solve_delta_design(n, beta)?,
            delta_asymptotic: asymptotic.delta,
            delta_leading: asymptotic.leading,
            predicted_k2: predicted_active_nl(n)?,
        })
    }
}

/// Run DTBLAS at the noise-limited operating point: phase 1 at Delta_0,
/// phase 2 greedy against the gain oracle, capped at the designed active
/// count (operating at the design size is what pins the expected
/// interference at beta).
pub fn nl_select(
    inst: &NetworkInstance,
    params: &NoiseLimitedParams,
    restarts: usize,
    seed: u64,
) -> Result<DtblasResult> {
    let dt = DtblasParams::new(params.delta0, params.delta)?;
    dtblas_select(
        inst,
        &dt,
        &CliqueMode::Greedy {
            restarts,
            seed,
            max_size: Some(params.predicted_k2),
        },
    )
}

/// The interference concentration half-width beta·ln ln n / sqrt(ln n);
/// realized deviations |I_i - beta| stay below it with high probability.
pub fn interference_concentration_bound(n: usize, beta: f64) -> Result<f64> {
    let (ln_n, ln_ln_n) = check_n_for_nl(n)?;
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    Ok(beta * ln_ln_n / ln_n.sqrt())
}

/// Realized interference deviation against the concentration bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InterferenceDeviation {
    /// max_i |I_i - beta| over active links.
    pub max_deviation: f64,
    /// beta·ln ln n / sqrt(ln n).
    pub bound: f64,
}

pub fn interference_deviation(
    active: &ActivationSet,
    beta: f64,
    n: usize,
) -> Result<InterferenceDeviation> {
    let max_deviation = active
        .max_interference_deviation(beta)
        .ok_or(Error::EmptySet("interference deviation"))?;
    Ok(InterferenceDeviation {
        max_deviation,
        bound: interference_concentration_bound(n, beta)?,
    })
}

/// Throughput window with the floor(ln n/ln ln n) prefactor:
/// [k2·ln(1 + Delta0/(1/rho + beta)), k2·ln(1 + (Delta0+1)/(1/rho + beta))].
pub fn nl_throughput_window(n: usize, delta0: f64, rho: f64, beta: f64) -> Result<(f64, f64)> {
    let k2 = predicted_active_nl(n)? as f64;
    if !(delta0 > 0.0 && rho > 0.0 && beta > 0.0) {
        return Err(Error::invalid("delta0, rho, beta must be positive"));
    }
    let denom = rho.recip() + beta;
    Ok((
        k2 * (delta0 / denom).ln_1p(),
        k2 * ((delta0 + 1.0) / denom).ln_1p(),
    ))
}
