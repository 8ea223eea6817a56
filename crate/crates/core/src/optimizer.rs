//! DTBLAS design-point optimization.
//!
//! Given a demanded rate lambda (required SINR gamma0 = e^lambda - 1), the
//! thresholds are reduced to a scalar problem: minimize over delta
//!
//! ```text
//! f(delta) = gamma0 · mu_hat(delta) - ln(1 - e^{-delta})
//! ```
//!
//! whose stationarity condition is e^lambda (1 - e^{-delta} - delta) + delta
//! = 0. The optimizer solves that root (the delta = 0 root is degenerate and
//! excluded by bracketing from the asymptotic seed), recovers alpha' from
//! the closed form, and reports the resulting scaling factors.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect_from_seed, ln_one_minus_exp_neg};
use crate::tblas::ScalingFactors;

/// Threshold below which the truncated moments switch to series; the exact
/// forms lose digits to cancellation there.
const MOMENT_SERIES_CUTOFF: f64 = 1e-4;

/// Mean of a unit exponential conditioned on being <= delta:
/// mu_hat = 1 - delta·e^{-delta}/(1 - e^{-delta}) = 1 - delta/(e^delta - 1).
///
/// For delta < 1e-4 uses the series delta/2 - delta^2/12 + delta^4/720.
pub fn mu_hat(delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    if delta < MOMENT_SERIES_CUTOFF {
        Ok(delta / 2.0 - delta * delta / 12.0 + delta.powi(4) / 720.0)
    } else {
        Ok(1.0 - delta / delta.exp_m1())
    }
}

/// Variance of a unit exponential conditioned on being <= delta:
/// sigma^2 = 1 - delta^2 e^{-delta}/(1 - e^{-delta})^2.
///
/// For delta < 1e-4 uses the series delta^2/12 - delta^4/240 + delta^6/6048.
pub fn sigma_hat_sq(delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    if delta < MOMENT_SERIES_CUTOFF {
        let d2 = delta * delta;
        Ok(d2 / 12.0 - d2 * d2 / 240.0 + d2 * d2 * d2 / 6048.0)
    } else {
        let one_minus = -(-delta).exp_m1(); // 1 - e^{-delta}
        Ok(1.0 - delta * delta * (-delta).exp() / (one_minus * one_minus))
    }
}

/// The unconstrained objective gamma0·mu_hat(delta) - ln(1 - e^{-delta}).
pub fn objective(delta: f64, gamma0: f64) -> f64 {
    gamma0 * mu_hat(delta).expect("delta validated by caller") - ln_one_minus_exp_neg(delta)
}

/// Stationarity residual e^lambda (1 - e^{-delta} - delta) + delta.
///
/// Zero at the optimizing delta. delta -> 0 is a degenerate root (both
/// sides vanish to second order); root finders must bracket away from it.
pub fn stationarity_residual(delta: f64, lambda: f64) -> f64 {
    lambda.exp() * (-(-delta).exp_m1() - delta) + delta
}

/// Seed for the stationarity root: the large-lambda form 2e^{-lambda} for
/// lambda >= 2, the small-lambda form 1/lambda + 1/2 below.
fn delta_star_seed(lambda: f64) -> f64 {
    if lambda >= 2.0 {
        2.0 * (-lambda).exp()
    } else {
        lambda.recip() + 0.5
    }
}

/// Solve the stationarity equation for the unique positive root.
pub fn solve_delta_star(lambda: f64, tol: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(tol >= 1e-14) {
        return Err(Error::invalid("tol must be at least 1e-14"));
    }
    let f = |d: f64| stationarity_residual(d, lambda);
    bisect_from_seed(f, delta_star_seed(lambda), 1.6, 200, tol)
}

/// Closed form for alpha' at a given delta:
/// alpha' = -ln(1-e^{-delta}) / (gamma0·mu_hat(delta) - ln(1-e^{-delta})).
pub fn alpha_prime_from_delta(delta: f64, gamma0: f64) -> Result<f64> {
    if !(gamma0 > 0.0) {
        return Err(Error::invalid(format!(
            "gamma0 must be positive, got {gamma0}"
        )));
    }
    let neg_log = -ln_one_minus_exp_neg(delta); // > 0
    Ok(neg_log / (gamma0 * mu_hat(delta)? + neg_log))
}

/// Scaling factors for a (delta, alpha') pair:
/// kappa = -alpha'/ln(1-e^{-delta}),
/// rbar  = ln(1 - (1-alpha')·ln(1-e^{-delta})/(alpha'·mu_hat)),
/// tau   = kappa·rbar.
pub fn scaling_factors(delta: f64, alpha_prime: f64) -> Result<ScalingFactors> {
    if !(alpha_prime > 0.0 && alpha_prime < 1.0) {
        return Err(Error::invalid(format!(
            "alpha' must lie in (0,1), got {alpha_prime}"
        )));
    }
    let log_term = ln_one_minus_exp_neg(delta); // < 0
    let kappa = -alpha_prime / log_term;
    let rbar = (1.0 - (1.0 - alpha_prime) * log_term / (alpha_prime * mu_hat(delta)?)).ln();
    Ok(ScalingFactors {
        kappa,
        tau: kappa * rbar,
        rbar,
    })
}

/// A solved (or expanded) DTBLAS operating point for one lambda.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimalOperatingPoint {
    pub lambda: f64,
    pub gamma0: f64,
    pub delta_star: f64,
    pub alpha_prime_star: f64,
    pub kappa_star: f64,
    pub tau_star: f64,
    /// Stationarity residual at delta_star; near zero for solved points,
    /// merely small for asymptotic expansions.
    pub residual: f64,
}

/// Solve the design problem for one demanded rate.
pub fn optimal_point(lambda: f64) -> Result<OptimalOperatingPoint> {
    let gamma0 = lambda.exp_m1();
    let delta_star = solve_delta_star(lambda, 1e-14)?;
    let alpha_prime_star = alpha_prime_from_delta(delta_star, gamma0)?;
    let s = scaling_factors(delta_star, alpha_prime_star)?;
    Ok(OptimalOperatingPoint {
        lambda,
        gamma0,
        delta_star,
        alpha_prime_star,
        kappa_star: s.kappa,
        tau_star: s.tau,
        residual: stationarity_residual(delta_star, lambda),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoticRegime {
    Large,
    Small,
}

/// Leading-order expansions of the operating point.
///
/// Large lambda: delta = 2e^{-lambda}, alpha' = 1 - 1/lambda,
/// kappa = 1/lambda, tau = 1 - ln(e/2)/lambda.
/// Small lambda: delta = 1/lambda + 1/2,
/// alpha' = e^{-1/lambda - 1/2}(1/lambda + 1/2), kappa = 1/lambda - 1/2,
/// tau = 1 - lambda/2.
///
/// The residual field carries the actual stationarity residual of the
/// approximate delta, marking these as approximations.
pub fn asymptotic_point(lambda: f64, regime: AsymptoticRegime) -> Result<OptimalOperatingPoint> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let gamma0 = lambda.exp_m1();
    let (delta, alpha_prime, kappa, tau) = match regime {
        AsymptoticRegime::Large => {
            let inv = lambda.recip();
            (
                2.0 * (-lambda).exp(),
                1.0 - inv,
                inv,
                1.0 - (std::f64::consts::E / 2.0).ln() * inv,
            )
        }
        AsymptoticRegime::Small => {
            let d = lambda.recip() + 0.5;
            (d, (-d).exp() * d, lambda.recip() - 0.5, 1.0 - lambda / 2.0)
        }
    };
    Ok(OptimalOperatingPoint {
        lambda,
        gamma0,
        delta_star: delta,
        alpha_prime_star: alpha_prime,
        kappa_star: kappa,
        tau_star: tau,
        residual: stationarity_residual(delta, lambda),
    })
}

/// One row of the sweep artifact: the solved point plus the TBLAS
/// comparison columns and the upper bound 1/lambda.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub delta_star: f64,
    pub alpha_prime_star: f64,
    pub kappa_dtblas: f64,
    pub tau_dtblas: f64,
    pub kappa_tblas: f64,
    pub tau_tblas: f64,
    pub kappa_upper: f64,
}

/// Solve the design problem across a grid of demanded rates.
pub fn sweep_operating_points(lambda_grid: &[f64]) -> Result<Vec<SweepRow>> {
    lambda_grid
        .iter()
        .map(|&lambda| {
            let p = optimal_point(lambda)?;
            let gamma0 = p.gamma0;
            Ok(SweepRow {
                lambda,
                delta_star: p.delta_star,
                alpha_prime_star: p.alpha_prime_star,
                kappa_dtblas: p.kappa_star,
                tau_dtblas: p.tau_star,
                kappa_tblas: gamma0.recip(),
                tau_tblas: lambda / gamma0,
                kappa_upper: lambda.recip(),
            })
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str =
    "lambda,delta_star,alpha_prime_star,kappa_dtblas,tau_dtblas,kappa_tblas,tau_tblas,kappa_upper";

/// Write the sweep as the fixed-schema CSV artifact.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    use crate::numeric::fmt_f64 as f;
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            f(r.lambda),
            f(r.delta_star),
            f(r.alpha_prime_star),
            f(r.kappa_dtblas),
            f(r.tau_dtblas),
            f(r.kappa_tblas),
            f(r.tau_tblas),
            f(r.kappa_upper),
        )?;
    }
    Ok(())
}

/// Log-spaced grid over [lo, hi], inclusive of both ends.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || points < 2 {
        return Err(Error::invalid("need 0 < lo < hi and at least 2 points"));
    }
    let step = (hi / lo).ln() / (points - 1) as f64;
    Ok((0..points)
        .map(|i| lo * (step * i as f64).exp())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_moments_frozen_values() {
        // delta = 1, mpmath: 0.41802329313067357 / 0.07932640579220768
        assert!((mu_hat(1.0).unwrap() - 0.41802329313067357).abs() < 1e-15);
        assert!((sigma_hat_sq(1.0).unwrap() - 0.07932640579220768).abs() < 1e-15);
        // delta -> infinity: truncation vanishes
        assert!((mu_hat(50.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((sigma_hat_sq(50.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(mu_hat(0.0).is_err());
        assert!(sigma_hat_sq(-1.0).is_err());
    }

    #[test]
    fn series_branch_accuracy() {
        // delta = 1e-6: high-precision reference 4.9999991666666667e-7
        let got = mu_hat(1e-6).unwrap();
        assert!((got / 4.9999991666666667e-7 - 1.0).abs() < 1e-12, "{got}");
        let sg = sigma_hat_sq(1e-6).unwrap();
        assert!((sg / 8.3333333333329167e-14 - 1.0).abs() < 1e-12, "{sg}");
        // continuity at the branch cut
        let below = mu_hat(MOMENT_SERIES_CUTOFF * 0.999).unwrap();
        let above = mu_hat(MOMENT_SERIES_CUTOFF * 1.001).unwrap();
        assert!((below / above - 0.999 / 1.001 * (1.0 + 1e-6)).abs() < 1e-6);
    }

    #[test]
    fn objective_values_and_limits() {
        // gamma0 = 1, delta = 1: mpmath 0.87669843851775547
        assert!((objective(1.0, 1.0) - 0.87669843851775547).abs() < 1e-14);
        // delta -> 0+: +infinity (log term); delta -> infinity: gamma0.
        assert!(objective(1e-8, 1.0) > 15.0);
        assert!((objective(60.0, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stationarity_frozen_value_and_algebraic_zero() {
        // lambda=1, delta=0.8: mpmath 0.12225360753163921
        assert!((stationarity_residual(0.8, 1.0) - 0.12225360753163921).abs() < 1e-14);
        // lambda with e^lambda = delta/(delta + e^{-delta} - 1): residual 0.
        let delta = 0.7f64;
        let lambda = (delta / (delta + (-delta).exp() - 1.0)).ln();
        assert!(stationarity_residual(delta, lambda).abs() < 1e-13);
    }

    #[test]
    fn delta_star_known_roots() {
        // lambda = 1 solves exactly at delta = 1.
        let d = solve_delta_star(1.0, 1e-14).unwrap();
        assert!((d - 1.0).abs() < 1e-12, "{d}");
        // lambda = 8: within 10 e^{-16} of 2 e^{-8}.
        let d = solve_delta_star(8.0, 1e-14).unwrap();
        assert!((d - 2.0 * (-8f64).exp()).abs() <= 10.0 * (-16f64).exp());
        // lambda = 0.05: within 0.5 of 20.5.
        let d = solve_delta_star(0.05, 1e-14).unwrap();
        assert!((d - 20.5).abs() <= 0.5, "{d}");
    }

    #[test]
    fn residuals_meet_tolerance_across_grid() {
        for &lambda in &[0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
            let d = solve_delta_star(lambda, 1e-14).unwrap();
            let r = stationarity_residual(d, lambda);
            assert!(r.abs() < 1e-10, "lambda {lambda}: residual {r}");
        }
    }

    #[test]
    fn grid_minimization_oracle() {
        // delta_star beats every point of a log grid spanning [d/10, 10d].
        for &lambda in &[0.1f64, 1.0, 5.0] {
            let gamma0 = lambda.exp_m1();
            let d = solve_delta_star(lambda, 1e-14).unwrap();
            let best = objective(d, gamma0);
            let grid = log_grid(d / 10.0, d * 10.0, 10_000).unwrap();
            for g in grid {
                assert!(
                    best <= objective(g, gamma0) + 1e-12 * best.abs().max(1.0),
                    "lambda {lambda}: grid point {g} beats delta_star {d}"
                );
            }
        }
    }

    #[test]
    fn alpha_prime_closed_form() {
        // delta=1, gamma0=1: mpmath 0.52318462681714073
        let a = alpha_prime_from_delta(1.0, 1.0).unwrap();
        assert!((a - 0.52318462681714073).abs() < 1e-14, "{a}");
        // gamma0 -> 0: alpha' -> 1; gamma0 -> infinity: alpha' -> 0.
        assert!(alpha_prime_from_delta(1.0, 1e-12).unwrap() > 1.0 - 1e-9);
        assert!(alpha_prime_from_delta(1.0, 1e12).unwrap() < 1e-9);
    }

    #[test]
    fn round_trip_rbar_equals_lambda() {
        for &lambda in &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let p = optimal_point(lambda).unwrap();
            let s = scaling_factors(p.delta_star, p.alpha_prime_star).unwrap();
            assert!(
                (s.rbar - lambda).abs() < 1e-8,
                "lambda {lambda}: rbar {}",
                s.rbar
            );
            assert!((p.residual).abs() < 1e-10);
        }
    }

    #[test]
    fn dtblas_degenerates_to_tblas_at_large_delta() {
        // At fixed large delta the pairwise filter stops binding and kappa
        // approaches the single-threshold value.
        let delta = 30.0;
        let lambda = 0.8f64;
        let gamma0 = lambda.exp_m1();
        let alpha_prime = alpha_prime_from_delta(delta, gamma0).unwrap();
        let s = scaling_factors(delta, alpha_prime).unwrap();
        // rbar should match lambda (constraint satisfied by construction)
        assert!((s.rbar - lambda).abs() < 1e-8);
        // kappa approaches 1/gamma0 = kappa_TBLAS as delta -> infinity
        assert!(
            (s.kappa - gamma0.recip()).abs() < 1e-8,
            "kappa {} vs {}",
            s.kappa,
            gamma0.recip()
        );
    }

    #[test]
    fn kappa_near_inverse_lambda_at_large_lambda() {
        let p = optimal_point(5.0).unwrap();
        assert!((p.kappa_star - 0.2).abs() <= 0.04, "{}", p.kappa_star);
    }

    #[test]
    fn asymptotic_points_match_expansions() {
        let p = asymptotic_point(10.0, AsymptoticRegime::Large).unwrap();
        assert!((p.delta_star / 9.0799859524969703e-5 - 1.0).abs() < 1e-15);
        assert!((p.alpha_prime_star - 0.9).abs() < 1e-12);
        assert!((p.kappa_star - 0.1).abs() < 1e-12);
        assert!((p.tau_star - 0.9693147180559945).abs() < 1e-12);

        let p = asymptotic_point(0.01, AsymptoticRegime::Small).unwrap();
        assert!((p.delta_star - 100.5).abs() < 1e-9);
        assert!((p.kappa_star - 99.5).abs() < 1e-9);
        assert!((p.tau_star - 0.995).abs() < 1e-12);
    }

    #[test]
    fn sweep_rows_satisfy_bounds() {
        let grid = log_grid(0.05, 20.0, 60).unwrap();
        let rows = sweep_operating_points(&grid).unwrap();
        assert_eq!(rows.len(), 60);
        for r in &rows {
            assert!(r.kappa_dtblas < r.kappa_upper, "lambda {}", r.lambda);
            assert!(
                r.kappa_tblas <= r.kappa_dtblas + 1e-9,
                "lambda {}: tblas {} dtblas {}",
                r.lambda,
                r.kappa_tblas,
                r.kappa_dtblas
            );
        }
        // tau_DTBLAS increasing toward 1, tau_TBLAS decreasing, for lambda >= 1
        let late: Vec<_> = rows.iter().filter(|r| r.lambda >= 1.0).collect();
        for w in late.windows(2) {
            assert!(w[1].tau_dtblas >= w[0].tau_dtblas - 1e-12);
            assert!(w[1].tau_tblas <= w[0].tau_tblas + 1e-12);
        }
    }

    #[test]
    fn sweep_csv_schema() {
        let rows = sweep_operating_points(&[0.5, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_CSV_HEADER);
        assert_eq!(lines.count(), 2);
    }
}
