//! linksim: simulate and verify rate-constrained link activation.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 when `verify`
//! finds a failing acceptance criterion.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use linksim::experiment::{run, ExperimentConfig, ExperimentKind};
use linksim::network::generate_network;
use linksim::random_graph::WindowRegime;

#[derive(Parser)]
#[command(name = "linksim", version, about = "Rate-constrained link activation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: GlobalOpts,
}

#[derive(Args, Clone)]
struct GlobalOpts {
    /// Base seed; per-trial seeds are base_seed + trial index.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of Monte Carlo trials.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, default_value = "json", value_parser = ["csv", "json"])]
    format: String,

    /// JSON experiment config file; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Run trials sequentially instead of in parallel.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a network instance as JSON.
    Gen {
        #[arg(long)]
        n: usize,
        /// Transmit SNR; "inf" for the no-noise limit.
        #[arg(long, default_value = "inf")]
        rho: String,
        #[arg(long, default_value_t = 0)]
        stream_id: u64,
        /// Include the gain matrix even for seeded instances.
        #[arg(long)]
        gains: bool,
    },
    /// TBLAS Monte Carlo: count concentration, or rate concentration with
    /// --rate-concentration.
    Tblas {
        #[arg(long)]
        n: Option<usize>,
        /// Threshold parameter alpha; exclusive with --lambda.
        #[arg(long)]
        alpha: Option<f64>,
        /// Demanded rate; sets alpha = 1/(e^lambda - 1).
        #[arg(long)]
        lambda: Option<f64>,
        /// Count-window width in standard deviations.
        #[arg(long)]
        sigma_mult: Option<f64>,
        /// Run the rate-concentration experiment instead of the count one.
        #[arg(long)]
        rate_concentration: bool,
        /// Slack multiplier on the concentration half-width.
        #[arg(long)]
        slack: Option<f64>,
    },
    /// DTBLAS active-count window Monte Carlo (exact clique solver).
    Dtblas {
        #[arg(long)]
        n: Option<usize>,
        /// Demanded rate; derives (delta, alpha') from the optimizer.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        alpha_prime: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Exact-solver vertex cap.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Solve the design problem for one demanded rate.
    Optimize {
        #[arg(long)]
        lambda: f64,
    },
    /// Sweep the design problem over a lambda grid (plot-ready CSV).
    Sweep {
        #[arg(long)]
        lambda_min: Option<f64>,
        #[arg(long)]
        lambda_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Linear spacing instead of logarithmic.
        #[arg(long)]
        linear: bool,
    },
    /// Noise-limited DTBLAS Monte Carlo.
    NoiseLimited {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        window_slack: Option<f64>,
        #[arg(long)]
        k2_tolerance: Option<i64>,
    },
    /// Clique number of G(m,p) against the predicted window.
    CliqueWindow {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_parser = ["fixed", "vanishing"])]
        regime: Option<String>,
    },
    /// Clique-count moments of G(m,p) against the closed forms.
    SecondMoment {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        /// Comma-separated clique sizes.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
    /// TBLAS / DTBLAS / brute-force comparison on small instances.
    BruteSandwich {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        size_slack: Option<i64>,
    },
    /// Run the full acceptance suite; exit code 3 on any failure.
    Verify,
}

fn write_output(global: &GlobalOpts, text: &str) -> anyhow::Result<()> {
    match &global.out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// Load and parse the --config file when present.
fn load_config_file(global: &GlobalOpts) -> anyhow::Result<Option<ExperimentConfig>> {
    match &global.config {
        None => Ok(None),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let parsed: ExperimentConfig = serde_json::from_str(&text).map_err(|e| {
                anyhow::Error::new(linksim::Error::config(
                    path.display().to_string(),
                    e.to_string(),
                ))
            })?;
            Ok(Some(parsed))
        }
    }
}

/// The kind loaded from the config file, if it matches this subcommand.
fn file_kind(
    file: &Option<ExperimentConfig>,
    matches: impl Fn(&ExperimentKind) -> bool,
    subcommand: &str,
) -> anyhow::Result<Option<ExperimentKind>> {
    match file {
        None => Ok(None),
        Some(cfg) if matches(&cfg.kind) => Ok(Some(cfg.kind.clone())),
        Some(_) => Err(anyhow::Error::new(linksim::Error::config(
            "experiment",
            format!("config file experiment does not match the `{subcommand}` subcommand"),
        ))),
    }
}

/// Assemble the final config: file values first, explicit flags on top.
fn assemble(
    global: &GlobalOpts,
    file: Option<ExperimentConfig>,
    kind: ExperimentKind,
) -> ExperimentConfig {
    let mut config = file.unwrap_or(ExperimentConfig {
        kind: kind.clone(),
        trials: 50,
        base_seed: linksim::acceptance::DEFAULT_SEED,
        parallel: true,
    });
    config.kind = kind;
    if let Some(t) = global.trials {
        config.trials = t;
    }
    if let Some(s) = global.seed {
        config.base_seed = s;
    }
    if global.sequential {
        config.parallel = false;
    }
    config
}

fn run_and_emit(global: &GlobalOpts, config: &ExperimentConfig) -> anyhow::Result<()> {
    let report = run(config)?;
    let text = match global.format.as_str() {
        "csv" => report.to_csv(),
        _ => report.to_json(),
    };
    write_output(global, &text)
}

fn resolve_alpha(alpha: Option<f64>, lambda: Option<f64>) -> anyhow::Result<Option<f64>> {
    match (alpha, lambda) {
        (Some(_), Some(_)) => Err(anyhow::Error::new(linksim::Error::config(
            "alpha/lambda",
            "--alpha and --lambda are mutually exclusive",
        ))),
        (Some(a), None) => Ok(Some(a)),
        (None, Some(l)) => Ok(Some(linksim::tblas::alpha_for_lambda(l)?)),
        (None, None) => Ok(None),
    }
}

fn missing(field: &str, subcommand: &str) -> anyhow::Error {
    anyhow::Error::new(linksim::Error::config(
        field,
        format!("required (flag --{field} or a --config file for `{subcommand}`)"),
    ))
}

fn real_main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let global = cli.global;
    let file = load_config_file(&global)?;

    match cli.command {
        Command::Gen {
            n,
            rho,
            stream_id,
            gains,
        } => {
            let rho = if rho == "inf" {
                f64::INFINITY
            } else {
                rho.parse::<f64>().context("--rho must be a number or `inf`")?
            };
            let seed = global.seed.unwrap_or(linksim::acceptance::DEFAULT_SEED);
            let inst = generate_network(n, rho, seed, stream_id)?;
            write_output(&global, &format!("{:#}\n", inst.to_json(gains)))?;
        }
        Command::Tblas {
            n,
            alpha,
            lambda,
            sigma_mult,
            rate_concentration,
            slack,
        } => {
            let alpha_flag = resolve_alpha(alpha, lambda)?;
            let kind = if rate_concentration {
                let base = file_kind(
                    &file,
                    |k| matches!(k, ExperimentKind::RateConc { .. }),
                    "tblas --rate-concentration",
                )?;
                let (mut fn_, mut fa, mut fs) = (None, None, None);
                if let Some(ExperimentKind::RateConc { n, alpha, slack }) = base {
                    (fn_, fa, fs) = (Some(n), Some(alpha), Some(slack));
                }
                ExperimentKind::RateConc {
                    n: n.or(fn_).ok_or_else(|| missing("n", "tblas"))?,
                    alpha: alpha_flag.or(fa).ok_or_else(|| missing("alpha", "tblas"))?,
                    slack: slack.or(fs).unwrap_or(1.5),
                }
            } else {
                let base = file_kind(
                    &file,
                    |k| matches!(k, ExperimentKind::TblasConc { .. }),
                    "tblas",
                )?;
                let (mut fn_, mut fa, mut fm) = (None, None, None);
                if let Some(ExperimentKind::TblasConc { n, alpha, sigma_mult }) = base {
                    (fn_, fa, fm) = (Some(n), Some(alpha), Some(sigma_mult));
                }
                ExperimentKind::TblasConc {
                    n: n.or(fn_).ok_or_else(|| missing("n", "tblas"))?,
                    alpha: alpha_flag.or(fa).ok_or_else(|| missing("alpha", "tblas"))?,
                    sigma_mult: sigma_mult.or(fm).unwrap_or(3.0),
                }
            };
            run_and_emit(&global, &assemble(&global, file, kind))?;
        }
        Command::Dtblas {
            n,
            lambda,
            alpha_prime,
            delta,
            epsilon,
            cap,
        } => {
            let base = file_kind(
                &file,
                |k| matches!(k, ExperimentKind::DtblasWindow { .. }),
                "dtblas",
            )?;
            let (mut fn_, mut fa, mut fd, mut fe, mut fc) = (None, None, None, None, None);
            if let Some(ExperimentKind::DtblasWindow {
                n,
                alpha_prime,
                delta,
                epsilon,
                cap,
            }) = base
            {
                (fn_, fa, fd, fe, fc) = (Some(n), Some(alpha_prime), Some(delta), Some(epsilon), Some(cap));
            }
            let (alpha_prime, delta) = match (alpha_prime, delta, lambda) {
                (a @ Some(_), d @ Some(_), None) => (a, d),
                (None, None, Some(l)) => {
                    let point = linksim::optimizer::optimal_point(l)?;
                    (Some(point.alpha_prime_star), Some(point.delta_star))
                }
                (None, None, None) => (None, None),
                _ => {
                    return Err(anyhow::Error::new(linksim::Error::config(
                        "lambda/alpha_prime/delta",
                        "provide --lambda alone, or --alpha-prime with --delta",
                    )))
                }
            };
            let kind = ExperimentKind::DtblasWindow {
                n: n.or(fn_).ok_or_else(|| missing("n", "dtblas"))?,
                alpha_prime: alpha_prime
                    .or(fa)
                    .ok_or_else(|| missing("alpha-prime", "dtblas"))?,
                delta: delta.or(fd).ok_or_else(|| missing("delta", "dtblas"))?,
                epsilon: epsilon.or(fe).unwrap_or(0.25),
                cap: cap.or(fc).unwrap_or(linksim::graph::EXACT_CLIQUE_CAP_DEFAULT),
            };
            run_and_emit(&global, &assemble(&global, file, kind))?;
        }
        Command::Optimize { lambda } => {
            let point = linksim::optimizer::optimal_point(lambda)?;
            let text = match global.format.as_str() {
                "csv" => {
                    let rows = linksim::optimizer::sweep_operating_points(&[lambda])?;
                    let mut buf = Vec::new();
                    linksim::optimizer::write_sweep_csv(&rows, &mut buf)?;
                    String::from_utf8(buf).expect("csv is utf-8")
                }
                _ => format!("{}\n", serde_json::to_string_pretty(&point)?),
            };
            write_output(&global, &text)?;
        }
        Command::Sweep {
            lambda_min,
            lambda_max,
            points,
            linear,
        } => {
            let base = file_kind(&file, |k| matches!(k, ExperimentKind::Sweep { .. }), "sweep")?;
            let (mut fl, mut fh, mut fp, mut fs) = (None, None, None, None);
            if let Some(ExperimentKind::Sweep {
                lambda_min,
                lambda_max,
                points,
                log_spacing,
            }) = base
            {
                (fl, fh, fp, fs) = (Some(lambda_min), Some(lambda_max), Some(points), Some(log_spacing));
            }
            let kind = ExperimentKind::Sweep {
                lambda_min: lambda_min.or(fl).unwrap_or(0.05),
                lambda_max: lambda_max.or(fh).unwrap_or(20.0),
                points: points.or(fp).unwrap_or(100),
                log_spacing: if linear { false } else { fs.unwrap_or(true) },
            };
            run_and_emit(&global, &assemble(&global, file, kind))?;
        }
        Command::NoiseLimited {
            n,
            beta,
            rho,
            lambda,
            restarts,
            window_slack,
            k2_tolerance,
        } => {
            let base = file_kind(
                &file,
                |k| matches!(k, ExperimentKind::NoiseLimited { .. }),
                "noise-limited",
            )?;
            let (mut fn_, mut fb, mut fr, mut fl, mut fre, mut fw, mut fk) =
                (None, None, None, None, None, None, None);
            if let Some(ExperimentKind::NoiseLimited {
                n,
                beta,
                rho,
                lambda,
                restarts,
                window_slack,
                k2_tolerance,
            }) = base
            {
                (fn_, fb, fr, fl, fre, fw, fk) = (
                    Some(n),
                    Some(beta),
                    Some(rho),
                    Some(lambda),
                    Some(restarts),
                    Some(window_slack),
                    Some(k2_tolerance),
                );
            }
            let kind = ExperimentKind::NoiseLimited {
                n: n.or(fn_).ok_or_else(|| missing("n", "noise-limited"))?,
                beta: beta.or(fb).unwrap_or(1.0),
                rho: rho.or(fr).unwrap_or(10.0),
                lambda: lambda.or(fl).unwrap_or(std::f64::consts::LN_2),
                restarts: restarts.or(fre).unwrap_or(4),
                window_slack: window_slack.or(fw).unwrap_or(0.25),
                k2_tolerance: k2_tolerance.or(fk).unwrap_or(2),
            };
            run_and_emit(&global, &assemble(&global, file, kind))?;
        }
        Command::CliqueWindow { m, p, epsilon, regime } => {
            let base = file_kind(
                &file,
                |k| matches!(k, ExperimentKind::CliqueWindow { .. }),
                "clique-window",
            )?;
            let (mut fm, mut fp, mut fe, mut fr) = (None, None, None, None);
            if let Some(ExperimentKind::CliqueWindow { m, p, epsilon, regime }) = base {
                (fm, fp, fe, fr) = (Some(m), Some(p), Some(epsilon), Some(regime));
            }
            let regime = match regime.as_deref() {
                Some("vanishing") => Some(WindowRegime::VanishingP),
                Some(_) => Some(WindowRegime::FixedP),
                None => None,
            };
            let kind = ExperimentKind::CliqueWindow {
                m: m.or(fm).ok_or_else(|| missing("m", "clique-window"))?,
                p: p.or(fp).ok_or_else(|| missing("p", "clique-window"))?,
                epsilon: epsilon.or(fe).unwrap_or(0.2),
                regime: regime.or(fr).unwrap_or(WindowRegime::FixedP),
            };
            run_and_emit(&global, &assemble(&global, file, kind))?;
        }
        Command::SecondMoment { m, p, sizes } => {
            let base = file_kind(
                &file,
                |k| matches!(k, ExperimentKind::SecondMoment { .. }),
                "second-moment",
            )?;
            let (mut fm, mut fp, mut fs) = (None, None, None);
            if let Some(ExperimentKind::SecondMoment { m, p, sizes }) = base {
                (fm, fp, fs) = (Some(m), Some(p), Some(sizes));
            }
            let kind = ExperimentKind::SecondMoment {
                m: m.or(fm).ok_or_else(|| missing("m", "second-moment"))?,
                p: p.or(fp).ok_or_else(|| missing("p", "second-moment"))?,
                sizes: sizes.or(fs).unwrap_or_else(|| vec![3, 4]),
            };
            run_and_emit(&global, &assemble(&global, file, kind))?;
        }
        Command::BruteSandwich { n, lambda, size_slack } => {
            let base = file_kind(
                &file,
                |k| matches!(k, ExperimentKind::BruteSandwich { .. }),
                "brute-sandwich",
            )?;
            let (mut fn_, mut fl, mut fs) = (None, None, None);
            if let Some(ExperimentKind::BruteSandwich { n, lambda, size_slack }) = base {
                (fn_, fl, fs) = (Some(n), Some(lambda), Some(size_slack));
            }
            let kind = ExperimentKind::BruteSandwich {
                n: n.or(fn_).unwrap_or(12),
                lambda: lambda.or(fl).unwrap_or(std::f64::consts::LN_2),
                size_slack: size_slack.or(fs).unwrap_or(4),
            };
            run_and_emit(&global, &assemble(&global, file, kind))?;
        }
        Command::Verify => {
            let seed = global.seed.unwrap_or(linksim::acceptance::DEFAULT_SEED);
            let results = linksim::acceptance::run_all(seed, !global.sequential);
            let mut all_passed = true;
            for r in &results {
                println!("{}", r.line());
                all_passed &= r.passed;
            }
            if let Some(path) = &global.out {
                std::fs::write(path, linksim::acceptance::results_json(&results))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if !all_passed {
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let is_config = e
                .downcast_ref::<linksim::Error>()
                .map(linksim::Error::is_config_error)
                .unwrap_or(false);
            if is_config {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
