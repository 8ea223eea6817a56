//! Network instances and the physical-layer formulas everything else uses.
//!
//! A network is n transmitter-receiver pairs in a Rayleigh fading
//! environment: the channel coefficient from transmitter j to receiver i is
//! a unit-mean exponential variate g_ji, drawn i.i.d. For an active set A
//! and a link i in A,
//!
//! ```text
//! sinr_i = g_ii / (1/rho + sum_{j in A, j != i} g_ji)
//! rate_i = ln(1 + sinr_i)              (nats per channel use)
//! ```
//!
//! Rates are dimensionless nats throughout; no time/bandwidth normalization
//! is applied. rho = +infinity is a first-class value (the interference-
//! limited analyses neglect noise) and makes the 1/rho term exactly zero.
//!
//! Gains are *computed, not stored*: each g_ji is a pure function of
//! `(seed, stream_id, j, i)` through a counter-based stream, so instances at
//! n = 10^6 are cheap and regeneration is bit-identical. Small instances
//! keep a dense receiver-major cache (row i holds all g_ji) so the hot
//! SINR loop is a contiguous scan.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::CounterStream;

/// Instances up to this n keep the full gain matrix in memory.
pub const GAIN_CACHE_LIMIT: usize = 1024;

#[derive(Debug, Clone)]
enum GainStorage {
    /// Gains computed on demand from the counter stream.
    Lazy(CounterStream),
    /// Dense receiver-major matrix: rows[i * n + j] = g_ji.
    Cached { rows: Vec<f64>, explicit: bool },
}

/// One random network draw: the ground truth every strategy operates on.
#[derive(Debug, Clone)]
pub struct NetworkInstance {
    n: usize,
    rho: f64,
    seed: u64,
    stream_id: u64,
    gains: GainStorage,
}

impl NetworkInstance {
    /// Number of links.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Transmit SNR rho = P/eta; `f64::INFINITY` means no noise.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Channel coefficient from transmitter `j` to receiver `i` (zero-based).
    #[inline]
    pub fn gain(&self, j: usize, i: usize) -> f64 {
        debug_assert!(j < self.n && i < self.n);
        match &self.gains {
            GainStorage::Lazy(stream) => stream.exponential(CounterStream::cell(j, i)),
            GainStorage::Cached { rows, .. } => rows[i * self.n + j],
        }
    }

    /// Direct coefficient g_ii of link `i`.
    #[inline]
    pub fn direct(&self, i: usize) -> f64 {
        self.gain(i, i)
    }

    /// Build an instance from an explicit receiver-major gain matrix.
    ///
    /// Intended for hand-crafted instances; the seed fields are zero and the
    /// matrix is carried verbatim through export.
    pub fn from_gains(n: usize, rho: f64, rows: Vec<f64>) -> Result<Self> {
        validate_n_rho(n, rho)?;
        if rows.len() != n * n {
            return Err(Error::invalid(format!(
                "gain matrix has {} entries, expected n^2 = {}",
                rows.len(),
                n * n
            )));
        }
        if !rows.iter().all(|g| g.is_finite() && *g > 0.0) {
            return Err(Error::invalid(
                "all gains must be strictly positive and finite",
            ));
        }
        Ok(NetworkInstance {
            n,
            rho,
            seed: 0,
            stream_id: 0,
            gains: GainStorage::Cached {
                rows,
                explicit: true,
            },
        })
    }

    /// Export as JSON. Gains are included when requested or when the
    /// instance was built from an explicit matrix. Link indices in the file
    /// format follow the receiver-major row layout (row i = receiver i).
    pub fn to_json(&self, include_gains: bool) -> serde_json::Value {
        let explicit = matches!(self.gains, GainStorage::Cached { explicit: true, .. });
        let mut doc = serde_json::json!({
            "n": self.n,
            "rho": rho_to_json(self.rho),
            "seed": self.seed,
            "stream_id": self.stream_id,
        });
        if include_gains || explicit {
            let rows: Vec<f64> = (0..self.n)
                .flat_map(|i| (0..self.n).map(move |j| self.gain(j, i)))
                .collect();
            doc["gains"] = serde_json::json!(rows);
        }
        doc
    }

    /// Import from the JSON document written by [`Self::to_json`]. A `gains` array
    /// takes precedence; otherwise the matrix is regenerated from the seed.
    pub fn from_json(doc: &serde_json::Value) -> Result<Self> {
        let n = doc["n"]
            .as_u64()
            .ok_or_else(|| Error::config("n", "missing or not an integer"))? as usize;
        let rho = rho_from_json(&doc["rho"])?;
        let seed = doc["seed"].as_u64().unwrap_or(0);
        let stream_id = doc["stream_id"].as_u64().unwrap_or(0);
        match doc.get("gains") {
            Some(serde_json::Value::Array(xs)) => {
                let rows: Vec<f64> = xs
                    .iter()
                    .map(|v| {
                        v.as_f64()
                            .ok_or_else(|| Error::config("gains", "non-numeric entry"))
                    })
                    .collect::<Result<_>>()?;
                let mut inst = NetworkInstance::from_gains(n, rho, rows)?;
                inst.seed = seed;
                inst.stream_id = stream_id;
                Ok(inst)
            }
            _ => generate_network(n, rho, seed, stream_id),
        }
    }
}

fn validate_n_rho(n: usize, rho: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(rho > 0.0) {
        return Err(Error::invalid(format!("rho must be positive, got {rho}")));
    }
    Ok(())
}

fn rho_to_json(rho: f64) -> serde_json::Value {
    if rho.is_infinite() {
        serde_json::json!("inf")
    } else {
        serde_json::json!(rho)
    }
}

fn rho_from_json(v: &serde_json::Value) -> Result<f64> {
    match v {
        serde_json::Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        serde_json::Value::Number(x) => x
            .as_f64()
            .ok_or_else(|| Error::config("rho", "not representable as f64")),
        _ => Err(Error::config("rho", "expected a number or \"inf\"")),
    }
}

/// Draw a network instance: n^2 i.i.d. unit-mean exponential gains, fully
/// determined by `(seed, stream_id)`. Gain (j, i) depends only on
/// `(seed, stream_id, j, i)`, never on n.
pub fn generate_network(n: usize, rho: f64, seed: u64, stream_id: u64) -> Result<NetworkInstance> {
    validate_n_rho(n, rho)?;
    let stream = CounterStream::new(seed, stream_id);
    let gains = if n <= GAIN_CACHE_LIMIT {
        let mut rows = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                rows[i * n + j] = stream.exponential(CounterStream::cell(j, i));
            }
        }
        GainStorage::Cached {
            rows,
            explicit: false,
        }
    } else {
        GainStorage::Lazy(stream)
    };
    Ok(NetworkInstance {
        n,
        rho,
        seed,
        stream_id,
        gains,
    })
}

/// Demanded per-link rate lambda and the SINR it requires.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RateConstraint {
    pub lambda: f64,
    pub gamma0: f64,
}

impl RateConstraint {
    /// gamma0 = e^lambda - 1, so that lambda = ln(1 + gamma0).
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::invalid(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(RateConstraint {
            lambda,
            gamma0: lambda.exp_m1(),
        })
    }
}

/// SINR of link `i` under active set `active` (strictly increasing indices).
pub fn sinr(inst: &NetworkInstance, active: &[usize], i: usize) -> Result<f64> {
    if !active.contains(&i) {
        return Err(Error::invalid(format!("link {i} is not in the active set")));
    }
    if let Some(&bad) = active.iter().find(|&&j| j >= inst.n()) {
        return Err(Error::invalid(format!(
            "active link {bad} out of range for n = {}",
            inst.n()
        )));
    }
    Ok(sinr_unchecked(inst, active, i))
}

#[inline]
fn interference_at(inst: &NetworkInstance, active: &[usize], i: usize) -> f64 {
    active
        .iter()
        .filter(|&&j| j != i)
        .map(|&j| inst.gain(j, i))
        .sum()
}

#[inline]
pub(crate) fn sinr_unchecked(inst: &NetworkInstance, active: &[usize], i: usize) -> f64 {
    inst.direct(i) / (inst.rho().recip() + interference_at(inst, active, i))
}

/// Shannon rate ln(1 + sinr_i) in nats per channel use.
pub fn rate(inst: &NetworkInstance, active: &[usize], i: usize) -> Result<f64> {
    Ok(sinr(inst, active, i)?.ln_1p())
}

/// Sum of rates over the active set. The empty set has throughput 0.
pub fn throughput(inst: &NetworkInstance, active: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for &i in active {
        total += rate(inst, active, i)?;
    }
    Ok(total)
}

/// Throughput divided by the number of active links; errors on the empty set.
pub fn average_rate(inst: &NetworkInstance, active: &[usize]) -> Result<f64> {
    if active.is_empty() {
        return Err(Error::EmptySet("average rate"));
    }
    Ok(throughput(inst, active)? / active.len() as f64)
}

/// An activation set with per-link SINR, rate and interference annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationSet {
    /// Strictly increasing link indices (zero-based in memory; file formats
    /// and reports are one-based).
    pub links: Vec<usize>,
    pub sinr: Vec<f64>,
    pub rates: Vec<f64>,
    pub interference: Vec<f64>,
}

impl ActivationSet {
    pub fn empty() -> Self {
        ActivationSet {
            links: Vec::new(),
            sinr: Vec::new(),
            rates: Vec::new(),
            interference: Vec::new(),
        }
    }

    /// A set carrying links only, with no per-link annotations. Annotating
    /// costs O(k^2) gain evaluations, which is prohibitive for the huge
    /// phase-1 survivor sets at n = 10^6; rate statistics are meaningful
    /// only for annotated sets.
    pub fn unannotated(inst: &NetworkInstance, links: Vec<usize>) -> Result<Self> {
        if links.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("links must be strictly increasing"));
        }
        if let Some(&bad) = links.iter().find(|&&i| i >= inst.n()) {
            return Err(Error::invalid(format!(
                "link {bad} out of range for n = {}",
                inst.n()
            )));
        }
        Ok(ActivationSet {
            links,
            sinr: Vec::new(),
            rates: Vec::new(),
            interference: Vec::new(),
        })
    }

    /// True when per-link annotations are present (vacuously for the empty set).
    pub fn is_annotated(&self) -> bool {
        self.rates.len() == self.links.len()
    }

    /// Annotate a sorted set of links with SINR/rate/interference under
    /// itself as the active set.
    pub fn annotated(inst: &NetworkInstance, links: Vec<usize>) -> Result<Self> {
        if links.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("links must be strictly increasing"));
        }
        if let Some(&bad) = links.iter().find(|&&i| i >= inst.n()) {
            return Err(Error::invalid(format!(
                "link {bad} out of range for n = {}",
                inst.n()
            )));
        }
        let inv_rho = inst.rho().recip();
        let mut sinr = Vec::with_capacity(links.len());
        let mut rates = Vec::with_capacity(links.len());
        let mut interference = Vec::with_capacity(links.len());
        for &i in &links {
            let int_i = interference_at(inst, &links, i);
            let g = inst.direct(i) / (inv_rho + int_i);
            interference.push(int_i);
            sinr.push(g);
            rates.push(g.ln_1p());
        }
        Ok(ActivationSet {
            links,
            sinr,
            rates,
            interference,
        })
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn contains(&self, link: usize) -> bool {
        self.links.binary_search(&link).is_ok()
    }

    pub fn throughput(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn average_rate(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptySet("average rate"));
        }
        Ok(self.throughput() / self.len() as f64)
    }

    pub fn min_rate(&self) -> Option<f64> {
        self.rates.iter().copied().reduce(f64::min)
    }

    pub fn max_rate(&self) -> Option<f64> {
        self.rates.iter().copied().reduce(f64::max)
    }

    /// max_i |r_i - rbar| over the annotated links (None if empty).
    pub fn max_rate_deviation(&self, rbar: f64) -> Option<f64> {
        self.rates
            .iter()
            .map(|r| (r - rbar).abs())
            .reduce(f64::max)
    }

    /// max_i |I_i - beta| over the annotated links (None if empty).
    pub fn max_interference_deviation(&self, beta: f64) -> Option<f64> {
        self.interference
            .iter()
            .map(|x| (x - beta).abs())
            .reduce(f64::max)
    }
}

/// Per-link slack report from a feasibility check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// (link, r_i - lambda) for every active link.
    pub slacks: Vec<(usize, f64)>,
}

/// True iff every active link supports the demanded rate. Vacuously true on
/// the empty set.
pub fn check_feasibility(
    inst: &NetworkInstance,
    active: &[usize],
    constraint: &RateConstraint,
) -> Result<FeasibilityReport> {
    let mut slacks = Vec::with_capacity(active.len());
    let mut feasible = true;
    for &i in active {
        let r = rate(inst, active, i)?;
        let slack = r - constraint.lambda;
        feasible &= slack >= 0.0;
        slacks.push((i, slack));
    }
    Ok(FeasibilityReport { feasible, slacks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic_and_positive() {
        let a = generate_network(1, 10.0, 37, 0).unwrap();
        let b = generate_network(1, 10.0, 37, 0).unwrap();
        assert_eq!(a.gain(0, 0).to_bits(), b.gain(0, 0).to_bits());
        assert!(a.gain(0, 0) > 0.0);
    }

    #[test]
    fn lazy_and_cached_agree() {
        // Same seed above and below the cache limit: shared prefix of the
        // matrix must be bit-identical.
        let small = generate_network(8, 10.0, 5, 1).unwrap();
        let large = generate_network(GAIN_CACHE_LIMIT + 1, 10.0, 5, 1).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert_eq!(small.gain(j, i).to_bits(), large.gain(j, i).to_bits());
            }
        }
    }

    #[test]
    fn stream_separation() {
        let a = generate_network(2, 10.0, 11, 0).unwrap();
        let b = generate_network(2, 10.0, 11, 1).unwrap();
        let differs = (0..2).any(|i| (0..2).any(|j| a.gain(j, i) != b.gain(j, i)));
        assert!(differs);
    }

    #[test]
    fn gain_sample_moments() {
        // n = 100 gives 10^4 draws: mean within 1 +- 0.05, variance within 1 +- 0.1.
        let inst = generate_network(100, 10.0, 123, 0).unwrap();
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for i in 0..100 {
            for j in 0..100 {
                let g = inst.gain(j, i);
                sum += g;
                sumsq += g * g;
            }
        }
        let m = sum / 1e4;
        let var = sumsq / 1e4 - m * m;
        assert!((m - 1.0).abs() < 0.05, "mean {m}");
        assert!((var - 1.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn invalid_arguments_are_rejected() {
        assert!(generate_network(0, 1.0, 0, 0).is_err());
        assert!(generate_network(4, 0.0, 0, 0).is_err());
        assert!(generate_network(4, -2.0, 0, 0).is_err());
    }

    #[test]
    fn sinr_singleton_no_interference() {
        // g_ii = 2, rho = 10: gamma = 2 / 0.1 = 20.
        let inst = NetworkInstance::from_gains(1, 10.0, vec![2.0]).unwrap();
        assert_eq!(sinr(&inst, &[0], 0).unwrap(), 20.0);
    }

    #[test]
    fn sinr_infinite_rho_drops_noise() {
        // receiver-major rows: row 0 = [g_00, g_10], row 1 = [g_01, g_11]
        let rows = vec![2.0, 1.0, 0.7, 3.0];
        let inst = NetworkInstance::from_gains(2, f64::INFINITY, rows).unwrap();
        // gamma_0 = g_00 / g_10 = 2 / 1 = 2 exactly
        assert_eq!(sinr(&inst, &[0, 1], 0).unwrap(), 2.0);
        assert!((rate(&inst, &[0, 1], 0).unwrap() - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn sinr_three_link_hand_case() {
        // active {0,1,2}, rho=5, g_00=3, g_10=0.5, g_20=0.3 -> 3/(0.2+0.8) = 3.
        let mut rows = vec![1.0; 9];
        rows[0] = 3.0; // g_00
        rows[1] = 0.5; // g_10
        rows[2] = 0.3; // g_20
        let inst = NetworkInstance::from_gains(3, 5.0, rows).unwrap();
        let got = sinr(&inst, &[0, 1, 2], 0).unwrap();
        assert!((got - 3.0).abs() < 1e-15, "{got}");
    }

    #[test]
    fn sinr_requires_membership() {
        let inst = generate_network(4, 10.0, 1, 0).unwrap();
        assert!(sinr(&inst, &[0, 1], 3).is_err());
    }

    #[test]
    fn rate_identities() {
        // gamma = e - 1 gives rate exactly 1.
        let inst = NetworkInstance::from_gains(1, 1.0, vec![std::f64::consts::E - 1.0]).unwrap();
        assert!((rate(&inst, &[0], 0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn throughput_and_average() {
        let inst = generate_network(6, 10.0, 9, 0).unwrap();
        let active = vec![0, 2, 5];
        let t = throughput(&inst, &active).unwrap();
        let expect: f64 = active
            .iter()
            .map(|&i| rate(&inst, &active, i).unwrap())
            .sum();
        assert_eq!(t, expect);
        assert!((average_rate(&inst, &active).unwrap() - t / 3.0).abs() < 1e-15);
        assert_eq!(throughput(&inst, &[]).unwrap(), 0.0);
        assert!(average_rate(&inst, &[]).is_err());
    }

    #[test]
    fn sinr_monotone_in_active_set() {
        // Adding links never helps: seeded sweep over instances.
        for seed in 0..20 {
            let inst = generate_network(8, 10.0, seed, 0).unwrap();
            let small = vec![1, 4];
            let big = vec![1, 3, 4, 6];
            for &i in &small {
                let a = sinr(&inst, &small, i).unwrap();
                let b = sinr(&inst, &big, i).unwrap();
                assert!(b <= a);
            }
        }
    }

    #[test]
    fn finite_rho_dominance() {
        for seed in 0..20 {
            let inf = generate_network(6, f64::INFINITY, seed, 0).unwrap();
            let fin = generate_network(6, 3.0, seed, 0).unwrap();
            let active = vec![0, 2, 3];
            for &i in &active {
                assert!(sinr(&inf, &active, i).unwrap() >= sinr(&fin, &active, i).unwrap());
            }
        }
    }

    #[test]
    fn annotation_matches_ops() {
        let inst = generate_network(10, 7.0, 4, 2).unwrap();
        let set = ActivationSet::annotated(&inst, vec![1, 3, 8]).unwrap();
        for (idx, &i) in set.links.iter().enumerate() {
            assert_eq!(set.sinr[idx], sinr(&inst, &set.links, i).unwrap());
            assert_eq!(set.rates[idx], set.sinr[idx].ln_1p());
            let exp_int: f64 = set
                .links
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| inst.gain(j, i))
                .sum();
            assert_eq!(set.interference[idx], exp_int);
        }
        assert_eq!(
            set.throughput(),
            throughput(&inst, &[1, 3, 8]).unwrap()
        );
    }

    #[test]
    fn feasibility_vacuous_and_singleton() {
        let c = RateConstraint::new(0.5).unwrap();
        let inst = NetworkInstance::from_gains(1, 10.0, vec![100.0]).unwrap();
        assert!(check_feasibility(&inst, &[], &c).unwrap().feasible);
        assert!(check_feasibility(&inst, &[0], &c).unwrap().feasible);
    }

    #[test]
    fn gamma0_identity() {
        let c = RateConstraint::new(2f64.ln()).unwrap();
        assert!((c.gamma0 - 1.0).abs() < 1e-15);
        assert!(RateConstraint::new(0.0).is_err());
    }

    #[test]
    fn json_round_trip_seeded_and_explicit() {
        let inst = generate_network(5, 10.0, 77, 3).unwrap();
        let doc = inst.to_json(false);
        let back = NetworkInstance::from_json(&doc).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(inst.gain(j, i).to_bits(), back.gain(j, i).to_bits());
            }
        }

        let crafted = NetworkInstance::from_gains(2, f64::INFINITY, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let doc = crafted.to_json(false); // explicit gains are always exported
        let back = NetworkInstance::from_json(&doc).unwrap();
        assert!(back.rho().is_infinite());
        assert_eq!(back.gain(1, 0), 2.0);
    }
}
