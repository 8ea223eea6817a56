//! Report types and CSV/JSON emission.
//!
//! The "body" of a report is everything except wall-clock time; identical
//! configs produce byte-identical bodies. CSV columns are fixed per
//! experiment type; floats carry 12 significant digits.
//!
//! Rates can be infinite in degenerate corners (a lone active link with
//! rho = inf); serde_json renders non-finite floats as null, so typed JSON
//! round-trips are guaranteed only for finite-valued reports. CSV renders
//! them as inf/-inf/nan.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numeric::fmt_f64;
use crate::optimizer::SweepRow;

use super::ExperimentConfig;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TblasConcRow {
    pub trial: usize,
    pub seed: u64,
    pub k: usize,
    pub hit: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RateConcRow {
    pub trial: usize,
    pub seed: u64,
    pub k: usize,
    pub min_rate: f64,
    pub max_rate: f64,
    pub mean_rate: f64,
    pub max_dev: f64,
    pub hit: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DtblasWindowRow {
    pub trial: usize,
    pub seed: u64,
    pub k1: usize,
    pub k2: usize,
    pub window_lo: i64,
    pub window_hi: i64,
    pub hit: bool,
    pub pairwise_ok: bool,
    pub min_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CliqueWindowRow {
    pub trial: usize,
    pub seed: u64,
    pub clique_number: usize,
    pub window_lo: i64,
    pub window_hi: i64,
    pub hit: bool,
    pub hit_pm1: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SecondMomentRow {
    pub trial: usize,
    pub seed: u64,
    /// s-clique counts aligned with the configured sizes.
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NoiseLimitedRow {
    pub trial: usize,
    pub seed: u64,
    pub k1: usize,
    pub k2: usize,
    pub max_interference_dev: f64,
    pub dev_bound: f64,
    pub hit_interference: bool,
    /// max_i I_i <= beta in this trial.
    pub qualifying: bool,
    /// All active rates >= lambda (checked when qualifying).
    pub rates_ok: bool,
    pub throughput: f64,
    pub window_lo: f64,
    pub window_hi: f64,
    pub hit_throughput: bool,
    pub hit_k2: bool,
    pub snr_monotone: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BruteSandwichRow {
    pub trial: usize,
    pub seed: u64,
    pub k_tblas: usize,
    pub k_dtblas: usize,
    pub k_brute: usize,
    pub tblas_feasible: bool,
    pub dtblas_feasible: bool,
    pub brute_feasible: bool,
    /// k_dtblas <= k_brute whenever the DTBLAS output is feasible.
    pub dtblas_order_ok: bool,
    /// k_tblas <= k_brute whenever the TBLAS output is feasible.
    pub tblas_order_ok: bool,
    /// k_tblas <= k_dtblas + size_slack.
    pub slack_hit: bool,
}

/// Per-experiment trial rows.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", content = "rows", rename_all = "snake_case")]
pub enum TrialData {
    TblasConc(Vec<TblasConcRow>),
    RateConc(Vec<RateConcRow>),
    DtblasWindow(Vec<DtblasWindowRow>),
    CliqueWindow(Vec<CliqueWindowRow>),
    SecondMoment(Vec<SecondMomentRow>),
    NoiseLimited(Vec<NoiseLimitedRow>),
    Sweep(Vec<SweepRow>),
    BruteSandwich(Vec<BruteSandwichRow>),
}

/// Report body: config echo, ordered trial rows, ordered aggregates.
#[derive(Serialize)]
struct Body<'a> {
    config: &'a ExperimentConfig,
    trials: &'a TrialData,
    aggregates: &'a [(String, f64)],
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub trials: TrialData,
    /// (key, value) pairs in a fixed emission order.
    pub aggregates: Vec<(String, f64)>,
    pub wall_clock_secs: f64,
}

fn b(x: bool) -> &'static str {
    if x {
        "1"
    } else {
        "0"
    }
}

impl TrialData {
    pub fn csv_header(&self) -> String {
        match self {
            TrialData::TblasConc(_) => "trial,seed,k,hit".into(),
            TrialData::RateConc(_) => {
                "trial,seed,k,min_rate,max_rate,mean_rate,max_dev,hit".into()
            }
            TrialData::DtblasWindow(_) => {
                "trial,seed,k1,k2,window_lo,window_hi,hit,pairwise_ok,min_rate".into()
            }
            TrialData::CliqueWindow(_) => {
                "trial,seed,clique_number,window_lo,window_hi,hit,hit_pm1".into()
            }
            TrialData::SecondMoment(rows) => {
                let width = rows.first().map_or(0, |r| r.counts.len());
                let mut h = "trial,seed".to_string();
                for i in 0..width {
                    h.push_str(&format!(",count_{i}"));
                }
                h
            }
            TrialData::NoiseLimited(_) => "trial,seed,k1,k2,max_interference_dev,dev_bound,\
                 hit_interference,qualifying,rates_ok,throughput,window_lo,window_hi,\
                 hit_throughput,hit_k2,snr_monotone"
                .into(),
            TrialData::Sweep(_) => crate::optimizer::SWEEP_CSV_HEADER.into(),
            TrialData::BruteSandwich(_) => "trial,seed,k_tblas,k_dtblas,k_brute,tblas_feasible,\
                 dtblas_feasible,brute_feasible,dtblas_order_ok,tblas_order_ok,slack_hit"
                .into(),
        }
    }

    pub fn write_csv_rows<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        match self {
            TrialData::TblasConc(rows) => {
                for r in rows {
                    writeln!(w, "{},{},{},{}", r.trial, r.seed, r.k, b(r.hit))?;
                }
            }
            TrialData::RateConc(rows) => {
                for r in rows {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{},{}",
                        r.trial,
                        r.seed,
                        r.k,
                        fmt_f64(r.min_rate),
                        fmt_f64(r.max_rate),
                        fmt_f64(r.mean_rate),
                        fmt_f64(r.max_dev),
                        b(r.hit)
                    )?;
                }
            }
            TrialData::DtblasWindow(rows) => {
                for r in rows {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{},{},{}",
                        r.trial,
                        r.seed,
                        r.k1,
                        r.k2,
                        r.window_lo,
                        r.window_hi,
                        b(r.hit),
                        b(r.pairwise_ok),
                        fmt_f64(r.min_rate)
                    )?;
                }
            }
            TrialData::CliqueWindow(rows) => {
                for r in rows {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{}",
                        r.trial,
                        r.seed,
                        r.clique_number,
                        r.window_lo,
                        r.window_hi,
                        b(r.hit),
                        b(r.hit_pm1)
                    )?;
                }
            }
            TrialData::SecondMoment(rows) => {
                for r in rows {
                    write!(w, "{},{}", r.trial, r.seed)?;
                    for c in &r.counts {
                        write!(w, ",{c}")?;
                    }
                    writeln!(w)?;
                }
            }
            TrialData::NoiseLimited(rows) => {
                for r in rows {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                        r.trial,
                        r.seed,
                        r.k1,
                        r.k2,
                        fmt_f64(r.max_interference_dev),
                        fmt_f64(r.dev_bound),
                        b(r.hit_interference),
                        b(r.qualifying),
                        b(r.rates_ok),
                        fmt_f64(r.throughput),
                        fmt_f64(r.window_lo),
                        fmt_f64(r.window_hi),
                        b(r.hit_throughput),
                        b(r.hit_k2),
                        b(r.snr_monotone)
                    )?;
                }
            }
            TrialData::Sweep(rows) => {
                let mut buf = Vec::new();
                crate::optimizer::write_sweep_csv(rows, &mut buf)?;
                // drop the duplicate header line; callers emit csv_header()
                let text = String::from_utf8_lossy(&buf);
                for line in text.lines().skip(1) {
                    writeln!(w, "{line}")?;
                }
            }
            TrialData::BruteSandwich(rows) => {
                for r in rows {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{},{},{},{},{}",
                        r.trial,
                        r.seed,
                        r.k_tblas,
                        r.k_dtblas,
                        r.k_brute,
                        b(r.tblas_feasible),
                        b(r.dtblas_feasible),
                        b(r.brute_feasible),
                        b(r.dtblas_order_ok),
                        b(r.tblas_order_ok),
                        b(r.slack_hit)
                    )?;
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match self {
            TrialData::TblasConc(r) => r.len(),
            TrialData::RateConc(r) => r.len(),
            TrialData::DtblasWindow(r) => r.len(),
            TrialData::CliqueWindow(r) => r.len(),
            TrialData::SecondMoment(r) => r.len(),
            TrialData::NoiseLimited(r) => r.len(),
            TrialData::Sweep(r) => r.len(),
            TrialData::BruteSandwich(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmitFormat {
    Csv,
    Json,
}

impl std::str::FromStr for EmitFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(EmitFormat::Csv),
            "json" => Ok(EmitFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

impl ExperimentReport {
    pub fn aggregate(&self, key: &str) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
    }

    /// Deterministic JSON body (wall clock excluded).
    pub fn body_json(&self) -> String {
        serde_json::to_string_pretty(&Body {
            config: &self.config,
            trials: &self.trials,
            aggregates: &self.aggregates,
        })
        .expect("report serialization cannot fail")
    }

    /// Full JSON document including wall clock.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Deterministic CSV body: config comment, header, rows, aggregates.
    pub fn body_csv(&self) -> String {
        let mut out = Vec::new();
        let config =
            serde_json::to_string(&self.config).expect("config serialization cannot fail");
        writeln!(out, "# config {config}").unwrap();
        writeln!(out, "{}", self.trials.csv_header()).unwrap();
        self.trials.write_csv_rows(&mut out).unwrap();
        for (k, v) in &self.aggregates {
            writeln!(out, "# aggregate,{k},{}", fmt_f64(*v)).unwrap();
        }
        String::from_utf8(out).expect("csv body is utf-8")
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.body_csv();
        s.push_str(&format!("# wall_clock_secs={}\n", fmt_f64(self.wall_clock_secs)));
        s
    }

    pub fn render(&self, format: EmitFormat) -> String {
        match format {
            EmitFormat::Csv => self.to_csv(),
            EmitFormat::Json => self.to_json(),
        }
    }

    pub fn emit(&self, path: &Path, format: EmitFormat) -> Result<()> {
        std::fs::write(path, self.render(format))?;
        Ok(())
    }
}
