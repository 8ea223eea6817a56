//! The acceptance suite: every release-gating check, runnable from tests
//! and from the CLI `verify` subcommand.
//!
//! Monte Carlo criteria run at fixed seeds, so every verdict is
//! deterministic; hit-frequency thresholds and slack multipliers are pinned
//! here, in code. Each criterion returns a result with a one-line summary;
//! `run_all` executes the full suite in order.

use std::time::Instant;

use crate::bounds::sinr_ccdf_random_set;
use crate::experiment::{run, ExperimentConfig, ExperimentKind};
use crate::network::{average_rate, generate_network, rate, sinr, throughput};
use crate::numeric::fmt_f64;
use crate::optimizer::{
    alpha_prime_from_delta, log_grid, objective, optimal_point, scaling_factors,
    solve_delta_star, stationarity_residual, sweep_operating_points,
};
use crate::random_graph::WindowRegime;
use crate::rng::{CounterStream, SplitMix64};

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} {:<24} {} ({:.2}s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.details
        )
    }
}

fn finish(
    id: u32,
    name: &'static str,
    start: Instant,
    passed: bool,
    details: String,
) -> CriterionResult {
    CriterionResult {
        id,
        name,
        passed,
        details,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Decorrelate per-criterion seeds from one base seed.
fn seed_for(base_seed: u64, criterion: u64) -> u64 {
    base_seed.wrapping_add(criterion.wrapping_mul(1_000_003))
}

/// Criterion 1: sinr/rate/throughput against an independent scalar-loop
/// re-implementation on 1000 random (instance, set) pairs, 1e-12 relative.
pub fn criterion_formula_oracles(base_seed: u64) -> CriterionResult {
    let start = Instant::now();
    let mut rng = SplitMix64::new(seed_for(base_seed, 1));
    let rhos = [f64::INFINITY, 10.0, 2.0, 0.5];
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for t in 0..1000u64 {
        let n = 2 + rng.index(23); // 2..=24
        let rho = rhos[t as usize % rhos.len()];
        let inst = generate_network(n, rho, rng.next_u64(), 0).expect("valid arguments");
        let mut active: Vec<usize> = (0..n).filter(|_| rng.next_f64() < 0.5).collect();
        if active.is_empty() {
            active.push(rng.index(n));
        }

        // independent scalar-loop oracle
        let noise = if rho.is_infinite() { 0.0 } else { 1.0 / rho };
        let mut t_oracle = 0.0;
        for &i in &active {
            let mut interference = 0.0;
            for &j in &active {
                if j != i {
                    interference += inst.gain(j, i);
                }
            }
            let g_oracle = inst.direct(i) / (noise + interference);
            let r_oracle = g_oracle.ln_1p();
            t_oracle += r_oracle;

            let g = sinr(&inst, &active, i).unwrap();
            let r = rate(&inst, &active, i).unwrap();
            let rel_g = (g - g_oracle).abs() / g_oracle.max(f64::MIN_POSITIVE);
            if g_oracle.is_infinite() {
                assert!(g.is_infinite());
            } else {
                worst = worst.max(rel_g);
            }
            if r_oracle.is_finite() {
                worst = worst.max((r - r_oracle).abs() / r_oracle.max(1e-300));
            }
            checked += 2;
        }
        let t_impl = throughput(&inst, &active).unwrap();
        if t_oracle.is_finite() {
            worst = worst.max((t_impl - t_oracle).abs() / t_oracle.max(1e-300));
            let avg = average_rate(&inst, &active).unwrap();
            worst = worst.max((avg - t_oracle / active.len() as f64).abs() / t_oracle.max(1e-300));
        }
        checked += 2;
    }
    let passed = worst <= 1e-12;
    finish(
        1,
        "formula_oracles",
        start,
        passed,
        format!("{checked} comparisons, worst relative error {}", fmt_f64(worst)),
    )
}

/// Criterion 2: the SINR tail formula against Monte Carlo (10^6 draws)
/// within 3 standard errors on a 12-point (x, k, rho) grid.
pub fn criterion_ccdf_law(base_seed: u64) -> CriterionResult {
    let start = Instant::now();
    let draws: u64 = 1_000_000;
    let mut passed = true;
    let mut worst_z: f64 = 0.0;
    let mut point = 0u64;
    for &x in &[0.5, 2.0] {
        for &k in &[1usize, 3, 8] {
            for &rho in &[2.0, f64::INFINITY] {
                point += 1;
                let p = sinr_ccdf_random_set(x, k, rho).unwrap();
                let stream = CounterStream::new(seed_for(base_seed, 2), 100 + point);
                let inv_rho = if rho.is_infinite() { 0.0 } else { 1.0 / rho };
                let mut hits = 0u64;
                for t in 0..draws {
                    let base = t * k as u64;
                    let g = stream.exponential(base);
                    let interference: f64 =
                        (1..k as u64).map(|j| stream.exponential(base + j)).sum();
                    if g / (inv_rho + interference) > x {
                        hits += 1;
                    }
                }
                let phat = hits as f64 / draws as f64;
                let se = (p * (1.0 - p) / draws as f64).sqrt();
                if se == 0.0 {
                    passed &= phat == p;
                } else {
                    let z = (phat - p).abs() / se;
                    worst_z = worst_z.max(z);
                    passed &= z <= 3.0;
                }
            }
        }
    }
    finish(
        2,
        "ccdf_law",
        start,
        passed,
        format!("12 grid points, worst |z| = {worst_z:.2}"),
    )
}

/// Criterion 3: TBLAS count concentration at n = 10^5, alpha = 1,
/// 200 trials: hit frequency >= 0.97.
pub fn criterion_tblas_count(base_seed: u64, parallel: bool) -> CriterionResult {
    let start = Instant::now();
    let report = run(&ExperimentConfig {
        kind: ExperimentKind::TblasConc {
            n: 100_000,
            alpha: 1.0,
            sigma_mult: 3.0,
        },
        trials: 200,
        base_seed: seed_for(base_seed, 3),
        parallel,
    })
    .expect("valid config");
    let f = report.aggregate("hit_frequency").unwrap();
    finish(
        3,
        "tblas_count_conc",
        start,
        f >= 0.97,
        format!("hit frequency {f:.3} (need >= 0.97)"),
    )
}

/// Criterion 4: TBLAS rate concentration at n = 10^6, alpha = 2, slack 1.5,
/// 50 trials: hit frequency >= 0.9.
pub fn criterion_rate_concentration(base_seed: u64, parallel: bool) -> CriterionResult {
    let start = Instant::now();
    let report = run(&ExperimentConfig {
        kind: ExperimentKind::RateConc {
            n: 1_000_000,
            alpha: 2.0,
            slack: 1.5,
        },
        trials: 50,
        base_seed: seed_for(base_seed, 4),
        parallel,
    })
    .expect("valid config");
    let f = report.aggregate("hit_frequency").unwrap();
    let bound = report.aggregate("bound").unwrap();
    finish(
        4,
        "rate_conc",
        start,
        f >= 0.9,
        format!("hit frequency {f:.3} against bound {bound:.4} (need >= 0.9)"),
    )
}

/// Criterion 5: optimizer correctness across the lambda grid.
pub fn criterion_optimizer(_base_seed: u64) -> CriterionResult {
    let start = Instant::now();
    let mut passed = true;
    let mut worst_residual: f64 = 0.0;
    let mut worst_round: f64 = 0.0;
    for &lambda in &[0.01f64, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
        let gamma0 = lambda.exp_m1();
        let d = match solve_delta_star(lambda, 1e-14) {
            Ok(d) => d,
            Err(e) => {
                return finish(5, "optimizer", start, false, format!("solver failed: {e}"));
            }
        };
        let r = stationarity_residual(d, lambda).abs();
        worst_residual = worst_residual.max(r);
        passed &= r < 1e-10;

        // grid-minimization oracle
        let best = objective(d, gamma0);
        let grid = log_grid(d / 10.0, d * 10.0, 10_000).unwrap();
        passed &= grid
            .iter()
            .all(|&g| best <= objective(g, gamma0) + 1e-12 * best.abs().max(1.0));

        // round trip rbar = lambda
        let ap = alpha_prime_from_delta(d, gamma0).unwrap();
        let s = scaling_factors(d, ap).unwrap();
        worst_round = worst_round.max((s.rbar - lambda).abs());
        passed &= (s.rbar - lambda).abs() <= 1e-8;
    }
    finish(
        5,
        "optimizer",
        start,
        passed,
        format!(
            "worst residual {}, worst round-trip {}",
            fmt_f64(worst_residual),
            fmt_f64(worst_round)
        ),
    )
}

/// Criterion 6: asymptotic expansions of delta* and kappa*.
pub fn criterion_asymptotics(_base_seed: u64) -> CriterionResult {
    let start = Instant::now();
    let mut passed = true;
    let mut notes = Vec::new();
    for &lambda in &[6.0f64, 8.0, 10.0] {
        let d = solve_delta_star(lambda, 1e-14).unwrap();
        let gap = (d - 2.0 * (-lambda).exp()).abs();
        let tol = 10.0 * (-2.0 * lambda).exp();
        passed &= gap <= tol;
        let p = optimal_point(lambda).unwrap();
        let kgap = (p.kappa_star - lambda.recip()).abs();
        let ktol = 5.0 / (lambda * lambda);
        passed &= kgap <= ktol;
        notes.push(format!("l={lambda}: d-gap {gap:.2e}/{tol:.2e} k-gap {kgap:.3}/{ktol:.3}"));
    }
    for &lambda in &[0.01f64, 0.02, 0.05] {
        let d = solve_delta_star(lambda, 1e-14).unwrap();
        let gap = (d - (lambda.recip() + 0.5)).abs();
        passed &= gap <= 10.0 * lambda;
    }
    finish(6, "asymptotics", start, passed, notes.join("; "))
}

/// Criterion 7: bound dominance across 100 log-spaced lambdas in [0.05, 20].
pub fn criterion_bound_dominance(_base_seed: u64) -> CriterionResult {
    let start = Instant::now();
    let grid = log_grid(0.05, 20.0, 100).unwrap();
    let rows = sweep_operating_points(&grid).unwrap();
    let upper_ok = rows.iter().all(|r| r.kappa_dtblas < r.kappa_upper);
    let dominance_ok = rows
        .iter()
        .all(|r| r.kappa_tblas <= r.kappa_dtblas + 1e-9);
    finish(
        7,
        "bound_dominance",
        start,
        upper_ok && dominance_ok,
        format!(
            "100 rows: kappa* < 1/lambda {}, kappa_tblas <= kappa* + 1e-9 {}",
            upper_ok, dominance_ok
        ),
    )
}

/// Criterion 8: clique-number windows, fixed p and vanishing p.
pub fn criterion_clique_windows(base_seed: u64, parallel: bool) -> CriterionResult {
    let start = Instant::now();
    let fixed = run(&ExperimentConfig {
        kind: ExperimentKind::CliqueWindow {
            m: 200,
            p: 0.5,
            epsilon: 0.2,
            regime: WindowRegime::FixedP,
        },
        trials: 50,
        base_seed: seed_for(base_seed, 8),
        parallel,
    })
    .expect("valid config");
    let f_fixed = fixed.aggregate("hit_frequency").unwrap();

    let vanishing = run(&ExperimentConfig {
        kind: ExperimentKind::CliqueWindow {
            m: 2000,
            p: 0.05,
            epsilon: 0.1,
            regime: WindowRegime::VanishingP,
        },
        trials: 50,
        base_seed: seed_for(base_seed, 88),
        parallel,
    })
    .expect("valid config");
    let f_pm1 = vanishing.aggregate("hit_pm1_frequency").unwrap();
    let f_exact = vanishing.aggregate("hit_frequency").unwrap();

    let passed = f_fixed >= 0.9 && f_pm1 >= 0.8;
    finish(
        8,
        "clique_windows",
        start,
        passed,
        format!(
            "fixed-p hit {f_fixed:.3} (need >= 0.9); vanishing-p +-1 hit {f_pm1:.3} \
             (need >= 0.8, exact-window hit {f_exact:.3})"
        ),
    )
}

/// Criterion 9: clique-count moments at m = 30, p = 0.3, 2000 trials.
pub fn criterion_second_moment(base_seed: u64, parallel: bool) -> CriterionResult {
    let start = Instant::now();
    let report = run(&ExperimentConfig {
        kind: ExperimentKind::SecondMoment {
            m: 30,
            p: 0.3,
            sizes: vec![3, 4],
        },
        trials: 2000,
        base_seed: seed_for(base_seed, 9),
        parallel,
    })
    .expect("valid config");
    let mut passed = true;
    let mut notes = Vec::new();
    for s in [3usize, 4] {
        let m = report.aggregate(&format!("mean_y_{s}")).unwrap();
        let se = report.aggregate(&format!("se_y_{s}")).unwrap();
        let mu = report.aggregate(&format!("mu_{s}")).unwrap();
        let z = (m - mu).abs() / se;
        passed &= z <= 3.0;
        notes.push(format!("Y_{s}: mean {m:.2} vs {mu:.2} (|z| {z:.2})"));
    }
    let ratio = report.aggregate("ratio_3").unwrap();
    let ratio_se = report.aggregate("ratio_se_3").unwrap();
    let ratio_theory = report.aggregate("ratio_theory_3").unwrap();
    let z = (ratio - ratio_theory).abs() / ratio_se;
    passed &= z <= 3.0;
    notes.push(format!(
        "Var/Mean^2: {ratio:.4} vs {ratio_theory:.4} (|z| {z:.2})"
    ));
    finish(9, "second_moment", start, passed, notes.join("; "))
}

/// Criterion 10: the brute-force sandwich at n = 12, lambda = ln 2,
/// 100 seeded instances.
pub fn criterion_brute_sandwich(base_seed: u64, parallel: bool) -> CriterionResult {
    let start = Instant::now();
    let report = run(&ExperimentConfig {
        kind: ExperimentKind::BruteSandwich {
            n: 12,
            lambda: 2f64.ln(),
            size_slack: 4,
        },
        trials: 100,
        base_seed: seed_for(base_seed, 10),
        parallel,
    })
    .expect("valid config");
    let brute_ok = report.aggregate("brute_feasible_frequency").unwrap() == 1.0;
    let dt_violations = report.aggregate("dtblas_order_violations").unwrap();
    let tb_violations = report.aggregate("tblas_order_violations").unwrap();
    let slack_f = report.aggregate("slack_hit_frequency").unwrap();
    let passed = brute_ok && dt_violations == 0.0 && tb_violations == 0.0 && slack_f >= 0.85;
    finish(
        10,
        "brute_sandwich",
        start,
        passed,
        format!(
            "brute feasible 100%: {brute_ok}; order violations dtblas {dt_violations} \
             tblas {tb_violations}; |tblas| <= |dtblas|+4 freq {slack_f:.3} (need >= 0.85)"
        ),
    )
}

/// Criterion 11: noise-limited behavior at n = 10^6, beta = 1, rho = 10,
/// gamma0 = 1, 50 trials.
pub fn criterion_noise_limited(base_seed: u64, parallel: bool) -> CriterionResult {
    let start = Instant::now();
    let report = run(&ExperimentConfig {
        kind: ExperimentKind::NoiseLimited {
            n: 1_000_000,
            beta: 1.0,
            rho: 10.0,
            lambda: 2f64.ln(), // gamma0 = 1
            restarts: 4,
            window_slack: 0.25,
            k2_tolerance: 2,
        },
        trials: 50,
        base_seed: seed_for(base_seed, 11),
        parallel,
    })
    .expect("valid config");
    let f_int = report.aggregate("interference_hit_frequency").unwrap();
    let guarantee = report.aggregate("rate_guarantee_holds").unwrap() == 1.0;
    let qualifying = report.aggregate("qualifying_trials").unwrap();
    let f_thr = report.aggregate("throughput_hit_frequency").unwrap();
    let f_mono = report.aggregate("snr_monotone_frequency").unwrap();
    let passed = f_int >= 0.85 && guarantee && f_thr >= 0.8 && f_mono == 1.0;
    finish(
        11,
        "noise_limited",
        start,
        passed,
        format!(
            "interference hit {f_int:.3} (>= 0.85); rate guarantee on {qualifying} \
             qualifying trials: {guarantee}; throughput hit {f_thr:.3} (>= 0.8); \
             SNR monotone {f_mono:.3} (= 1)"
        ),
    )
}

/// Criterion 12: byte-identical report bodies across reruns and across
/// parallel/sequential execution.
pub fn criterion_reproducibility(base_seed: u64) -> CriterionResult {
    let start = Instant::now();
    let seed = seed_for(base_seed, 12);
    let configs = vec![
        ExperimentConfig {
            kind: ExperimentKind::TblasConc {
                n: 10_000,
                alpha: 1.0,
                sigma_mult: 3.0,
            },
            trials: 20,
            base_seed: seed,
            parallel: true,
        },
        ExperimentConfig {
            kind: ExperimentKind::NoiseLimited {
                n: 100_000,
                beta: 1.0,
                rho: 10.0,
                lambda: 2f64.ln(),
                restarts: 2,
                window_slack: 0.25,
                k2_tolerance: 2,
            },
            trials: 10,
            base_seed: seed,
            parallel: true,
        },
        ExperimentConfig {
            kind: ExperimentKind::CliqueWindow {
                m: 100,
                p: 0.5,
                epsilon: 0.5,
                regime: WindowRegime::FixedP,
            },
            trials: 10,
            base_seed: seed,
            parallel: true,
        },
    ];
    let mut passed = true;
    for config in configs {
        let a = run(&config).expect("valid config");
        let b = run(&config).expect("valid config");
        passed &= a.body_json() == b.body_json();
        passed &= a.body_csv() == b.body_csv();

        let mut sequential = config.clone();
        sequential.parallel = false;
        let c = run(&sequential).expect("valid config");
        // bodies differ only in the config echo's parallel flag
        let mut c_patched = c.clone();
        c_patched.config.parallel = true;
        passed &= a.body_json() == c_patched.body_json();
    }
    finish(
        12,
        "reproducibility",
        start,
        passed,
        "rerun and parallel-toggle bodies byte-identical".into(),
    )
}

/// Run the full suite in order.
pub fn run_all(base_seed: u64, parallel: bool) -> Vec<CriterionResult> {
    vec![
        criterion_formula_oracles(base_seed),
        criterion_ccdf_law(base_seed),
        criterion_tblas_count(base_seed, parallel),
        criterion_rate_concentration(base_seed, parallel),
        criterion_optimizer(base_seed),
        criterion_asymptotics(base_seed),
        criterion_bound_dominance(base_seed),
        criterion_clique_windows(base_seed, parallel),
        criterion_second_moment(base_seed, parallel),
        criterion_brute_sandwich(base_seed, parallel),
        criterion_noise_limited(base_seed, parallel),
        criterion_reproducibility(base_seed),
    ]
}

/// Default base seed for `verify` and the acceptance test target.
pub const DEFAULT_SEED: u64 = 42;

/// Serialize results for the verify report artifact.
pub fn results_json(results: &[CriterionResult]) -> String {
    let items: Vec<serde_json::Value> = results
        .iter()
        .map(|r| {
            serde_json::json!({
                "id": r.id,
                "name": r.name,
                "passed": r.passed,
                "details": r.details,
                "seconds": r.seconds,
            })
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({
        "criteria": items,
        "all_passed": results.iter().all(|r| r.passed),
    }))
    .expect("json serialization cannot fail")
}
