//! Numerical helpers: stable log-expressions, log-space binomials, bisection.

use crate::error::{Error, Result};

/// ln(1 - e^{-d}) for d > 0, stable across the whole range.
///
/// Switches between `ln_1p(-e^{-d})` and `ln(-expm1(-d))` at d = ln 2,
/// the usual log1mexp split.
#[inline]
pub fn ln_one_minus_exp_neg(d: f64) -> f64 {
    debug_assert!(d > 0.0);
    if d > std::f64::consts::LN_2 {
        (-(-d).exp()).ln_1p()
    } else {
        (-(-d).exp_m1()).ln()
    }
}

/// ln C(m, s), computed as an O(min(s, m-s)) sum of logs.
///
/// Exact semantics for out-of-range arguments: s > m gives -inf (the
/// coefficient is zero), matching the termwise-zero convention used by the
/// hypergeometric sums.
pub fn ln_choose(m: u64, s: u64) -> f64 {
    if s > m {
        return f64::NEG_INFINITY;
    }
    let s = s.min(m - s);
    (1..=s)
        .map(|t| ((m - s + t) as f64 / t as f64).ln())
        .sum()
}

/// Bracketed bisection for a continuous f with f(lo) and f(hi) of opposite
/// sign. Runs a fixed number of halvings (enough to exhaust f64 resolution)
/// and stops early once |f(mid)| < f_tol.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, f_tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoConvergence {
            expansions: 0,
            detail: format!("no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}"),
        });
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval exhausted at f64 resolution
        }
        let fm = f(mid);
        if fm.abs() < f_tol {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Expand a bracket geometrically around `seed` until f changes sign, then
/// bisect. `factor` > 1 controls the expansion rate.
pub fn bisect_from_seed<F: Fn(f64) -> f64 + Copy>(
    f: F,
    seed: f64,
    factor: f64,
    max_expansions: usize,
    f_tol: f64,
) -> Result<f64> {
    let mut lo = seed / factor;
    let mut hi = seed * factor;
    let mut k = 0;
    while f(lo).signum() == f(hi).signum() {
        k += 1;
        if k > max_expansions {
            return Err(Error::NoConvergence {
                expansions: max_expansions,
                detail: format!(
                    "no sign change after expanding to [{lo:e}, {hi:e}] from seed {seed:e}: f(lo)={:e}, f(hi)={:e}",
                    f(lo),
                    f(hi)
                ),
            });
        }
        lo /= factor;
        hi *= factor;
    }
    bisect(f, lo, hi, f_tol)
}

/// Render a float with 12 significant digits, the CSV column format.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.11e}")
    }
}
