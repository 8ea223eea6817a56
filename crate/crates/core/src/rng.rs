//! Counter-based deterministic random streams.
//!
//! Every random quantity in this crate is a pure function of a `(seed,
//! stream_id, counter)` triple, so any value can be regenerated in O(1)
//! without materializing the stream. Channel matrices at n = 10^6 would
//! occupy terabytes stored densely; random access is what makes the large-n
//! experiments feasible.

/// SplitMix64 finalizer. Full-avalanche 64-bit mixing.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Map 64 random bits to a double in the open interval (0, 1).
///
/// Uses the top 52 bits plus a half-step offset; both the addition and the
/// power-of-two scaling are exact in f64, so the result lies in
/// [2^-53, 1 - 2^-53] and `-ln(u)` is always finite.
#[inline]
pub fn unit_open(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0) // 2^-52
}

const SEED_TAG: u64 = 0x243F_6A88_85A3_08D3; // pi fractional bits
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// A keyed counter stream: `value(c)` depends only on `(seed, stream_id, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterStream {
    base: u64,
}

impl CounterStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let base = mix64(mix64(seed ^ SEED_TAG).wrapping_add(stream_id.wrapping_mul(GOLDEN)));
        CounterStream { base }
    }

    #[inline]
    pub fn bits(&self, counter: u64) -> u64 {
        mix64(self.base ^ counter)
    }

    #[inline]
    pub fn uniform(&self, counter: u64) -> f64 {
        unit_open(self.bits(counter))
    }

    /// Unit-mean exponential variate at `counter`, via inverse CDF.
    #[inline]
    pub fn exponential(&self, counter: u64) -> f64 {
        -self.uniform(counter).ln()
    }

    /// Counter encoding for a matrix cell (j, i), both zero-based and < 2^32.
    #[inline]
    pub fn cell(j: usize, i: usize) -> u64 {
        debug_assert!(j < (1 << 32) && i < (1 << 32));
        ((j as u64) << 32) | i as u64
    }
}

/// Small sequential PRNG for shuffles and restart orders (SplitMix64).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        unit_open(self.next_u64())
    }

    /// Uniform index in `0..n` (n > 0), via 128-bit multiply-shift.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.index(i + 1);
            xs.swap(i, j);
        }
    }
}
