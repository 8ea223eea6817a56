//! Per-experiment trial loops and aggregate reduction.

use rayon::prelude::*;

use crate::bounds::brute_force_optimum;
use crate::dtblas::{dtblas_select, CliqueMode, DtblasParams};
use crate::error::Result;
use crate::graph::clique_number_capped;
use crate::network::{check_feasibility, generate_network, ActivationSet, RateConstraint};
use crate::noise_limited::{nl_select, nl_throughput_window, NoiseLimitedParams};
use crate::optimizer::{log_grid, sweep_operating_points};
use crate::random_graph::{
    clique_window_fixed_p, clique_window_vanishing_p, expected_clique_count, gen_gnp,
    variance_ratio, GnpSpec, WindowRegime,
};
use crate::tblas::{count_window, predicted_scaling, rate_concentration_bound, tblas_select,
    TblasParams};

use super::report::*;
use super::{ExperimentConfig, ExperimentKind, TrialData};

type Aggregates = Vec<(String, f64)>;

pub(super) fn dispatch(config: &ExperimentConfig) -> Result<(TrialData, Aggregates)> {
    match &config.kind {
        ExperimentKind::TblasConc { .. } => run_tblas_conc(config),
        ExperimentKind::RateConc { .. } => run_rate_conc(config),
        ExperimentKind::DtblasWindow { .. } => run_dtblas_window(config),
        ExperimentKind::CliqueWindow { .. } => run_clique_window(config),
        ExperimentKind::SecondMoment { .. } => run_second_moment(config),
        ExperimentKind::NoiseLimited { .. } => run_noise_limited(config),
        ExperimentKind::Sweep { .. } => run_sweep(config),
        ExperimentKind::BruteSandwich { .. } => run_brute_sandwich(config),
    }
}

/// Map trials to rows, in parallel or sequentially; row order and therefore
/// every downstream number is identical either way.
fn map_trials<R, F>(config: &ExperimentConfig, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize, u64) -> Result<R> + Sync,
{
    if config.parallel {
        (0..config.trials)
            .into_par_iter()
            .map(|t| f(t, config.trial_seed(t)))
            .collect()
    } else {
        (0..config.trials).map(|t| f(t, config.trial_seed(t))).collect()
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for x in xs {
        sum += x;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

fn freq(hits: usize, total: usize) -> f64 {
    hits as f64 / total as f64
}

fn sample_se(xs: &[f64]) -> f64 {
    let t = xs.len();
    if t < 2 {
        return 0.0;
    }
    let m = mean(xs.iter().copied());
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (t - 1) as f64;
    (var / t as f64).sqrt()
}

fn run_tblas_conc(config: &ExperimentConfig) -> Result<(TrialData, Aggregates)> {
    let ExperimentKind::TblasConc { n, alpha, sigma_mult } = config.kind else {
        unreachable!()
    };
    let params = TblasParams::from_alpha(n, alpha)?;
    let (expected_k, halfwidth) = count_window(n, params.delta_threshold, sigma_mult);
    let rows = map_trials(config, |trial, seed| {
        let inst = generate_network(n, f64::INFINITY, seed, 0)?;
        let k = tblas_select(&inst, params.delta_threshold).len();
        Ok(TblasConcRow {
            trial,
            seed,
            k,
            hit: (k as f64 - expected_k).abs() <= halfwidth,
        })
    })?;
    let hits = rows.iter().filter(|r| r.hit).count();
    let ks: Vec<f64> = rows.iter().map(|r| r.k as f64).collect();
    let aggregates = vec![
        ("hit_frequency".into(), freq(hits, rows.len())),
        ("expected_k".into(), expected_k),
        ("halfwidth".into(), halfwidth),
        ("mean_k".into(), mean(ks.iter().copied())),
        ("se_k".into(), sample_se(&ks)),
    ];
    Ok((TrialData::TblasConc(rows), aggregates))
}

fn run_rate_conc(config: &ExperimentConfig) -> Result<(TrialData, Aggregates)> {
    let ExperimentKind::RateConc { n, alpha, slack } = config.kind else {
        unreachable!()
    };
    let params = TblasParams::from_alpha(n, alpha)?;
    let rbar = predicted_scaling(alpha)?.rbar;
    let bound = slack * rate_concentration_bound(n, alpha)?;
    let rows = map_trials(config, |trial, seed| {
        let inst = generate_network(n, f64::INFINITY, seed, 0)?;
        let set = tblas_select(&inst, params.delta_threshold);
        let max_dev = set.max_rate_deviation(rbar).unwrap_or(0.0);
        Ok(RateConcRow {
            trial,
            seed,
            k: set.len(),
            min_rate: set.min_rate().unwrap_or(0.0),
            max_rate: set.max_rate().unwrap_or(0.0),
            mean_rate: set.average_rate().unwrap_or(0.0),
            max_dev,
            hit: max_dev <= bound,
        })
    })?;
    let hits = rows.iter().filter(|r| r.hit).count();
    let devs: Vec<f64> = rows.iter().map(|r| r.max_dev).collect();
    let aggregates = vec![
        ("hit_frequency".into(), freq(hits, rows.len())),
        ("bound".into(), bound),
        ("rbar".into(), rbar),
        ("mean_max_dev".into(), mean(devs.iter().copied())),
        ("se_max_dev".into(), sample_se(&devs)),
        (
            "mean_k".into(),
            mean(rows.iter().map(|r| r.k as f64)),
        ),
    ];
    Ok((TrialData::RateConc(rows), aggregates))
}

fn run_dtblas_window(config: &ExperimentConfig) -> Result<(TrialData, Aggregates)> {
    let ExperimentKind::DtblasWindow {
        n,
        alpha_prime,
        delta,
        epsilon,
        cap,
    } = config.kind
    else {
        unreachable!()
    };
    let direct = (1.0 - alpha_prime) * (n as f64).ln();
    let params = DtblasParams::new(direct, delta)?;
    let (lo, hi) = crate::dtblas::predicted_k2_window(n, direct, delta, epsilon)?;
    let rows = map_trials(config, |trial, seed| {
        let inst = generate_network(n, f64::INFINITY, seed, 0)?;
        let r = dtblas_select(&inst, &params, &CliqueMode::Exact { cap })?;
        let k2 = r.active.len() as i64;
        let pairwise_ok = r.active.links.iter().enumerate().all(|(x, &a)| {
            r.active.links[x + 1..]
                .iter()
                .all(|&b| inst.gain(a, b) <= delta && inst.gain(b, a) <= delta)
        });
        Ok(DtblasWindowRow {
            trial,
            seed,
            k1: r.phase1.len(),
            k2: r.active.len(),
            window_lo: lo,
            window_hi: hi,
            hit: lo <= k2 && k2 <= hi,
            pairwise_ok,
            min_rate: r.active.min_rate().unwrap_or(0.0),
        })
    })?;
    let hits = rows.iter().filter(|r| r.hit).count();
    let pairwise = rows.iter().filter(|r| r.pairwise_ok).count();
    let aggregates = vec![
        ("hit_frequency".into(), freq(hits, rows.len())),
        ("pairwise_ok_frequency".into(), freq(pairwise, rows.len())),
        ("window_lo".into(), lo as f64),
        ("window_hi".into(), hi as f64),
        ("mean_k1".into(), mean(rows.iter().map(|r| r.k1 as f64))),
        ("mean_k2".into(), mean(rows.iter().map(|r| r.k2 as f64))),
    ];
    Ok((TrialData::DtblasWindow(rows), aggregates))
}

fn run_clique_window(config: &ExperimentConfig) -> Result<(TrialData, Aggregates)> {
    let ExperimentKind::CliqueWindow { m, p, epsilon, regime } = config.kind else {
        unreachable!()
    };
    let window = match regime {
        WindowRegime::FixedP => clique_window_fixed_p(m, p, epsilon)?,
        WindowRegime::VanishingP => clique_window_vanishing_p(m, p, epsilon)?,
    };
    let rows = map_trials(config, |trial, seed| {
        let g = gen_gnp(&GnpSpec { m, p, seed })?;
        let cl = clique_number_capped(&g, m)?;
        Ok(CliqueWindowRow {
            trial,
            seed,
            clique_number: cl,
            window_lo: window.lower,
            window_hi: window.upper,
            hit: window.contains(cl),
            hit_pm1: window.contains_within(cl, 1),
        })
    })?;
    let hits = rows.iter().filter(|r| r.hit).count();
    let pm1 = rows.iter().filter(|r| r.hit_pm1).count();
    let aggregates = vec![
        ("hit_frequency".into(), freq(hits, rows.len())),
        ("hit_pm1_frequency".into(), freq(pm1, rows.len())),
        ("window_lo".into(), window.lower as f64),
        ("window_hi".into(), window.upper as f64),
        (
            "mean_clique_number".into(),
            mean(rows.iter().map(|r| r.clique_number as f64)),
        ),
    ];
    Ok((TrialData::CliqueWindow(rows), aggregates))
}

fn run_second_moment(config: &ExperimentConfig) -> Result<(TrialData, Aggregates)> {
    let ExperimentKind::SecondMoment { m, p, ref sizes } = config.kind else {
        unreachable!()
    };
    let sizes = sizes.clone();
    let rows = map_trials(config, |trial, seed| {
        let g = gen_gnp(&GnpSpec { m, p, seed })?;
        let counts = sizes
            .iter()
            .map(|&s| crate::random_graph::count_cliques_exhaustive(&g, s))
            .collect::<Result<Vec<u64>>>()?;
        Ok(SecondMomentRow { trial, seed, counts })
    })?;
    let t = rows.len();
    let mut aggregates = Vec::new();
    for (idx, &s) in sizes.iter().enumerate() {
        let ys: Vec<f64> = rows.iter().map(|r| r.counts[idx] as f64).collect();
        let mu_theory = expected_clique_count(m, p, s);
        let y_mean = mean(ys.iter().copied());
        let y_se = sample_se(&ys);
        aggregates.push((format!("mean_y_{s}"), y_mean));
        aggregates.push((format!("se_y_{s}"), y_se));
        aggregates.push((format!("mu_{s}"), mu_theory));

        // Var/Mean^2 with a jackknife standard error.
        let sum1: f64 = ys.iter().sum();
        let sum2: f64 = ys.iter().map(|y| y * y).sum();
        let var = (sum2 - t as f64 * y_mean * y_mean) / (t - 1) as f64;
        let ratio = var / (y_mean * y_mean);
        aggregates.push((format!("ratio_{s}"), ratio));
        aggregates.push((format!("ratio_theory_{s}"), variance_ratio(m, p, s)));
        if t >= 3 {
            let mut jack: Vec<f64> = Vec::with_capacity(t);
            for y in &ys {
                let m_i = (sum1 - y) / (t - 1) as f64;
                let var_i = (sum2 - y * y - (t - 1) as f64 * m_i * m_i) / (t - 2) as f64;
                jack.push(var_i / (m_i * m_i));
            }
            let jbar = mean(jack.iter().copied());
            let se = ((t - 1) as f64 / t as f64
                * jack.iter().map(|r| (r - jbar).powi(2)).sum::<f64>())
            .sqrt();
            aggregates.push((format!("ratio_se_{s}"), se));
        }
    }
    Ok((TrialData::SecondMoment(rows), aggregates))
}

fn run_noise_limited(config: &ExperimentConfig) -> Result<(TrialData, Aggregates)> {
    let ExperimentKind::NoiseLimited {
        n,
        beta,
        rho,
        lambda,
        restarts,
        window_slack,
        k2_tolerance,
    } = config.kind
    else {
        unreachable!()
    };
    let params = NoiseLimitedParams::derive(n, lambda, rho, beta)?;
    let (win_lo, win_hi) = nl_throughput_window(n, params.delta0, rho, beta)?;
    let dev_bound = crate::noise_limited::interference_concentration_bound(n, beta)?;
    let predicted = params.predicted_k2 as i64;
    let params_ref = &params;
    let rows = map_trials(config, move |trial, seed| {
        let inst = generate_network(n, rho, seed, 0)?;
        let r = nl_select(&inst, params_ref, restarts, seed)?;
        let k2 = r.active.len();
        let max_dev = r.active.max_interference_deviation(beta).unwrap_or(0.0);
        let max_interference = r
            .active
            .interference
            .iter()
            .copied()
            .fold(0.0f64, f64::max);
        let qualifying = max_interference <= beta;
        let rates_ok = r.active.rates.iter().all(|&x| x >= lambda);
        let throughput = r.active.throughput();
        // SNR monotonicity on the same instance and active set: doubling rho
        // must strictly raise every rate (empty set passes vacuously).
        let hi_inst = generate_network(n, rho * 2.0, seed, 0)?;
        let hi_set = ActivationSet::annotated(&hi_inst, r.active.links.clone())?;
        let snr_monotone = hi_set
            .rates
            .iter()
            .zip(&r.active.rates)
            .all(|(hi, lo)| hi > lo);
        Ok(NoiseLimitedRow {
            trial,
            seed,
            k1: r.phase1.len(),
            k2,
            max_interference_dev: max_dev,
            dev_bound,
            hit_interference: max_dev <= dev_bound,
            qualifying,
            rates_ok,
            throughput,
            window_lo: win_lo,
            window_hi: win_hi,
            hit_throughput: throughput >= win_lo * (1.0 - window_slack)
                && throughput <= win_hi * (1.0 + window_slack),
            hit_k2: (k2 as i64 - predicted).abs() <= k2_tolerance,
            snr_monotone,
        })
    })?;
    let t = rows.len();
    let qualifying = rows.iter().filter(|r| r.qualifying).count();
    let qualifying_ok = rows.iter().filter(|r| r.qualifying && r.rates_ok).count();
    let aggregates = vec![
        (
            "interference_hit_frequency".into(),
            freq(rows.iter().filter(|r| r.hit_interference).count(), t),
        ),
        (
            "throughput_hit_frequency".into(),
            freq(rows.iter().filter(|r| r.hit_throughput).count(), t),
        ),
        (
            "k2_hit_frequency".into(),
            freq(rows.iter().filter(|r| r.hit_k2).count(), t),
        ),
        ("qualifying_trials".into(), qualifying as f64),
        ("qualifying_rate_ok".into(), qualifying_ok as f64),
        (
            "rate_guarantee_holds".into(),
            if qualifying == qualifying_ok { 1.0 } else { 0.0 },
        ),
        (
            "snr_monotone_frequency".into(),
            freq(rows.iter().filter(|r| r.snr_monotone).count(), t),
        ),
        ("mean_k1".into(), mean(rows.iter().map(|r| r.k1 as f64))),
        ("mean_k2".into(), mean(rows.iter().map(|r| r.k2 as f64))),
        (
            "mean_throughput".into(),
            mean(rows.iter().map(|r| r.throughput)),
        ),
        ("dev_bound".into(), dev_bound),
        ("window_lo".into(), win_lo),
        ("window_hi".into(), win_hi),
        ("delta_design".into(), params.delta),
        ("delta_asymptotic".into(), params.delta_asymptotic),
        ("predicted_k2".into(), predicted as f64),
    ];
    Ok((TrialData::NoiseLimited(rows), aggregates))
}

fn run_sweep(config: &ExperimentConfig) -> Result<(TrialData, Aggregates)> {
    let ExperimentKind::Sweep {
        lambda_min,
        lambda_max,
        points,
        log_spacing,
    } = config.kind
    else {
        unreachable!()
    };
    let grid = if log_spacing {
        log_grid(lambda_min, lambda_max, points)?
    } else {
        let step = (lambda_max - lambda_min) / (points - 1) as f64;
        (0..points).map(|i| lambda_min + step * i as f64).collect()
    };
    let rows = sweep_operating_points(&grid)?;
    let upper_violations = rows
        .iter()
        .filter(|r| !(r.kappa_dtblas < r.kappa_upper))
        .count();
    let dominance_violations = rows
        .iter()
        .filter(|r| !(r.kappa_tblas <= r.kappa_dtblas + 1e-9))
        .count();
    let aggregates = vec![
        ("points".into(), rows.len() as f64),
        ("kappa_upper_violations".into(), upper_violations as f64),
        (
            "tblas_dominance_violations".into(),
            dominance_violations as f64,
        ),
    ];
    Ok((TrialData::Sweep(rows), aggregates))
}

fn run_brute_sandwich(config: &ExperimentConfig) -> Result<(TrialData, Aggregates)> {
    let ExperimentKind::BruteSandwich { n, lambda, size_slack } = config.kind else {
        unreachable!()
    };
    let constraint = RateConstraint::new(lambda)?;
    let alpha = crate::tblas::alpha_for_lambda(lambda)?;
    let tblas_params = TblasParams::from_alpha(n, alpha)?;
    let (dt_params, _) = DtblasParams::for_target_rate(n, lambda)?;
    let rows = map_trials(config, |trial, seed| {
        let inst = generate_network(n, f64::INFINITY, seed, 0)?;
        let tb = tblas_select(&inst, tblas_params.delta_threshold);
        let dt = dtblas_select(&inst, &dt_params, &CliqueMode::exact())?;
        let brute = brute_force_optimum(&inst, &constraint)?;
        let tblas_feasible = check_feasibility(&inst, &tb.links, &constraint)?.feasible;
        let dtblas_feasible = check_feasibility(&inst, &dt.active.links, &constraint)?.feasible;
        let brute_feasible = check_feasibility(&inst, &brute.links, &constraint)?.feasible;
        Ok(BruteSandwichRow {
            trial,
            seed,
            k_tblas: tb.len(),
            k_dtblas: dt.active.len(),
            k_brute: brute.len(),
            tblas_feasible,
            dtblas_feasible,
            brute_feasible,
            dtblas_order_ok: !dtblas_feasible || dt.active.len() <= brute.len(),
            tblas_order_ok: !tblas_feasible || tb.len() <= brute.len(),
            slack_hit: tb.len() as i64 <= dt.active.len() as i64 + size_slack,
        })
    })?;
    let t = rows.len();
    let aggregates = vec![
        (
            "brute_feasible_frequency".into(),
            freq(rows.iter().filter(|r| r.brute_feasible).count(), t),
        ),
        (
            "dtblas_order_violations".into(),
            rows.iter().filter(|r| !r.dtblas_order_ok).count() as f64,
        ),
        (
            "tblas_order_violations".into(),
            rows.iter().filter(|r| !r.tblas_order_ok).count() as f64,
        ),
        (
            "slack_hit_frequency".into(),
            freq(rows.iter().filter(|r| r.slack_hit).count(), t),
        ),
        (
            "tblas_feasible_frequency".into(),
            freq(rows.iter().filter(|r| r.tblas_feasible).count(), t),
        ),
        (
            "dtblas_feasible_frequency".into(),
            freq(rows.iter().filter(|r| r.dtblas_feasible).count(), t),
        ),
        (
            "mean_k_tblas".into(),
            mean(rows.iter().map(|r| r.k_tblas as f64)),
        ),
        (
            "mean_k_dtblas".into(),
            mean(rows.iter().map(|r| r.k_dtblas as f64)),
        ),
        (
            "mean_k_brute".into(),
            mean(rows.iter().map(|r| r.k_brute as f64)),
        ),
    ];
    Ok((TrialData::BruteSandwich(rows), aggregates))
}
