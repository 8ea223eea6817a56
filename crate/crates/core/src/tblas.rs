//! Threshold-based link activation (TBLAS) and its predicted scaling.
//!
//! The rule is decentralized: link i is active iff its own direct gain
//! exceeds the threshold, g_ii > Delta. With Delta = ln n - ln ln n - ln a
//! the active count concentrates at a·ln n and the per-link rates
//! concentrate around ln(1 + 1/a).

use crate::error::{Error, Result};
use crate::network::{ActivationSet, NetworkInstance};

/// TBLAS design point: threshold plus the alpha it was derived from.
#[derive(Debug, Clone, Copy)]
pub struct TblasParams {
    pub n: usize,
    pub alpha: f64,
    pub delta_threshold: f64,
}

impl TblasParams {
    /// Delta = ln n - ln ln n - ln alpha. Needs ln ln n > 0, i.e. n >= 3.
    pub fn from_alpha(n: usize, alpha: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("n must be at least 3 (ln ln n > 0)"));
        }
        if !(alpha > 0.0) {
            return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
        }
        let ln_n = (n as f64).ln();
        Ok(TblasParams {
            n,
            alpha,
            delta_threshold: ln_n - ln_n.ln() - alpha.ln(),
        })
    }
}

/// Indices with g_ii > Delta (strict inequality), without annotations.
pub fn threshold_indices(inst: &NetworkInstance, delta_threshold: f64) -> Vec<usize> {
    (0..inst.n())
        .filter(|&i| inst.direct(i) > delta_threshold)
        .collect()
}

/// Activate exactly the links with g_ii > Delta, annotated with SINR and
/// rates under that set. Annotation is O(k^2); at the
/// log-scaling threshold the selection is Theta(log n)-sized, so this
/// stays cheap.
pub fn tblas_select(inst: &NetworkInstance, delta_threshold: f64) -> ActivationSet {
    let links = threshold_indices(inst, delta_threshold);
    ActivationSet::annotated(inst, links).expect("selected links are sorted and in range")
}

/// The alpha whose limiting average rate ln(1 + 1/alpha) equals lambda:
/// alpha = 1/(e^lambda - 1).
pub fn alpha_for_lambda(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(lambda.exp_m1().recip())
}

/// Limit scaling factors (kappa, tau, rbar) shared by TBLAS and DTBLAS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFactors {
    /// Active links per ln n.
    pub kappa: f64,
    /// Throughput per ln n.
    pub tau: f64,
    /// Average rate per active link.
    pub rbar: f64,
}

/// Limit scaling: kappa = alpha, rbar = ln(1 + 1/alpha), tau = alpha·rbar.
pub fn predicted_scaling(alpha: f64) -> Result<ScalingFactors> {
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    let rbar = alpha.recip().ln_1p();
    Ok(ScalingFactors {
        kappa: alpha,
        tau: alpha * rbar,
        rbar,
    })
}

/// Rate-concentration half-width 2·sqrt(ln ln n / (alpha^3 ln n)).
///
/// The (1 + o(1)) factor is not included; harness checks apply a
/// configurable slack multiplier instead.
pub fn rate_concentration_bound(n: usize, alpha: f64) -> Result<f64> {
    if n < 16 {
        return Err(Error::invalid("n must be at least 16"));
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    let ln_n = (n as f64).ln();
    Ok(2.0 * (ln_n.ln() / (alpha.powi(3) * ln_n)).sqrt())
}

/// Count-concentration window for |A|: mean n·e^{-Delta} and half-width
/// xi·sqrt(n·e^{-Delta}). This is the single source of truth for the
/// harness's count hit-flags.
pub fn count_window(n: usize, delta_threshold: f64, xi: f64) -> (f64, f64) {
    let mean = n as f64 * (-delta_threshold).exp();
    (mean, xi * mean.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{generate_network, NetworkInstance};

    #[test]
    fn threshold_rule_on_fixed_diagonal() {
        // diag gains (0.5, 1.2, 0.9, 3.0), Delta = 1.0 -> active {1, 3}.
        let mut rows = vec![0.01; 16];
        for (i, g) in [0.5, 1.2, 0.9, 3.0].iter().enumerate() {
            rows[i * 4 + i] = *g;
        }
        let inst = NetworkInstance::from_gains(4, 10.0, rows).unwrap();
        assert_eq!(tblas_select(&inst, 1.0).links, vec![1, 3]);
        // Delta = 0 activates everything (gains are positive).
        assert_eq!(tblas_select(&inst, 0.0).links, vec![0, 1, 2, 3]);
    }

    #[test]
    fn selection_is_monotone_in_delta() {
        for seed in 0..10 {
            let inst = generate_network(64, 10.0, seed, 0).unwrap();
            let loose = tblas_select(&inst, 0.7);
            let tight = tblas_select(&inst, 1.9);
            assert!(tight.links.iter().all(|i| loose.links.contains(i)));
        }
    }

    #[test]
    fn decentralization_ignores_cross_gains() {
        // Permuting all cross gains leaves the selected index set unchanged.
        let n = 6;
        let inst = generate_network(n, 10.0, 3, 0).unwrap();
        let mut rows: Vec<f64> = (0..n * n).map(|k| inst.gain(k % n, k / n)).collect();
        // reverse the off-diagonal entries among themselves
        let mut off: Vec<f64> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .map(|(i, j)| rows[i * n + j])
            .collect();
        off.reverse();
        let mut it = off.into_iter();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    rows[i * n + j] = it.next().unwrap();
                }
            }
        }
        let scrambled = NetworkInstance::from_gains(n, 10.0, rows).unwrap();
        assert_eq!(
            tblas_select(&inst, 0.8).links,
            tblas_select(&scrambled, 0.8).links
        );
    }

    #[test]
    fn count_concentrates_at_alpha_log_n() {
        // n = 10^4, alpha = 1: |k - ln n| <= 3 sqrt(ln n) in >= 99% of trials
        // (binomial window; quick version of the acceptance run).
        let n = 10_000;
        let params = TblasParams::from_alpha(n, 1.0).unwrap();
        let (mean, half) = count_window(n, params.delta_threshold, 3.0);
        let mut hits = 0;
        let trials = 100;
        for seed in 0..trials {
            let inst = generate_network(n, f64::INFINITY, seed, 0).unwrap();
            let k = tblas_select(&inst, params.delta_threshold).len() as f64;
            if (k - mean).abs() <= half {
                hits += 1;
            }
        }
        assert!(hits >= 97, "hits = {hits}/{trials}");
    }

    #[test]
    fn alpha_lambda_inverses() {
        assert!((alpha_for_lambda(2f64.ln()).unwrap() - 1.0).abs() < 1e-15);
        // lambda = 1 -> alpha = 1/(e-1)
        let a = alpha_for_lambda(1.0).unwrap();
        assert!((a - 0.5819767068693265).abs() < 1e-15);
        assert!(alpha_for_lambda(0.0).is_err());
        // Round trip over a grid: rbar(alpha(lambda)) = lambda to 1e-12.
        let mut lambda = 0.01;
        while lambda <= 10.0 {
            let alpha = alpha_for_lambda(lambda).unwrap();
            let s = predicted_scaling(alpha).unwrap();
            assert!(
                (s.rbar - lambda).abs() <= 1e-12 * lambda.max(1.0),
                "lambda {lambda}: rbar {}",
                s.rbar
            );
            lambda *= 1.7;
        }
    }

    #[test]
    fn scaling_values() {
        let s = predicted_scaling(1.0).unwrap();
        assert_eq!(s.kappa, 1.0);
        assert!((s.tau - 2f64.ln()).abs() < 1e-15);
        assert!((s.rbar - 2f64.ln()).abs() < 1e-15);
        // tau -> 1 as alpha -> infinity: alpha ln(1+1/alpha) = 1 - 1/(2 alpha) + ...
        let s = predicted_scaling(1e6).unwrap();
        assert!((s.tau - 1.0).abs() < 1e-6);
        // alpha = 1/(e-1) gives rbar = 1
        let s = predicted_scaling(1.0 / 1f64.exp_m1()).unwrap();
        assert!((s.rbar - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_bound_values() {
        // n = 10^6, alpha = 2: 2 sqrt(lnln/(8 ln)) = 0.308270300640...
        let b = rate_concentration_bound(1_000_000, 2.0).unwrap();
        assert!((b - 0.3082703006404048).abs() < 1e-12, "{b}");
        // monotone vanishing in alpha
        assert!(rate_concentration_bound(1_000_000, 1e9).unwrap() < 1e-4);
        // doubling ln n at fixed alpha shrinks the bound by < sqrt(2), > 1
        let b1 = rate_concentration_bound(1_000, 2.0).unwrap();
        let b2 = rate_concentration_bound(1_000_000, 2.0).unwrap();
        let ratio = b1 / b2;
        assert!(ratio > 1.0 && ratio < std::f64::consts::SQRT_2, "{ratio}");
        assert!(rate_concentration_bound(8, 1.0).is_err());
    }
}
