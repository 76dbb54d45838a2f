//! Enumeration of sums of four fourth powers (all parts ≥ 1), gap
//! statistics, the empty-interval counters K′ and K_γ, and the greedy
//! four-step approximation.
//!
//! The representable set is realized by sweeping ordered triples
//! x₁ ≥ x₂ ≥ x₃ and marking x₁⁴+x₂⁴+x₃⁴+x₄⁴ for x₄ ∈ [1, x₃] into a bitmap.
//! When the range does not fit the memory budget the sweep runs in windows,
//! re-scanning triples per window with pruning; both modes produce the same
//! stream. Marking uses atomic OR, so the result is independent of
//! scheduling and thread count.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{fourth_root, pow4};
use crate::error::{Error, Result};

/// Memory/window knobs for enumeration. The window is automatically shrunk
/// to the memory budget; a budget below one 64-bit word is an error.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationConfig {
    /// Upper bound for the live bitmap, in bytes.
    pub memory_budget_bytes: u64,
    /// Preferred window width in integers (= bits of bitmap).
    pub window_bits: u64,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig {
            memory_budget_bytes: 1 << 31, // 2 GiB
            window_bits: 1 << 30,
        }
    }
}

impl EnumerationConfig {
    fn effective_window(&self) -> Result<u128> {
        let by_budget = self.memory_budget_bytes.saturating_mul(8);
        let w = self.window_bits.min(by_budget);
        if w < 64 {
            return Err(Error::BudgetExceeded {
                what: "enumeration bitmap window".into(),
                needed: 64,
                budget: by_budget as u128,
            });
        }
        Ok(w as u128)
    }
}

/// Ordered stream of distinct integers ≤ limit expressible as
/// x₁⁴+x₂⁴+x₃⁴+x₄⁴ with all xᵢ ≥ 1. Limits below 4 give an empty stream.
pub struct RepresentableStream {
    limit: u128,
    window: u128,
    next_lo: u128,
    buf: std::vec::IntoIter<u128>,
}

impl RepresentableStream {
    fn refill(&mut self) -> bool {
        while self.next_lo <= self.limit {
            let hi = self
                .next_lo
                .saturating_add(self.window)
                .min(self.limit + 1);
            let v = scan_window(self.next_lo, hi);
            self.next_lo = hi;
            if !v.is_empty() {
                self.buf = v.into_iter();
                return true;
            }
        }
        false
    }
}

impl Iterator for RepresentableStream {
    type Item = u128;
    fn next(&mut self) -> Option<u128> {
        loop {
            if let Some(v) = self.buf.next() {
                return Some(v);
            }
            if !self.refill() {
                return None;
            }
        }
    }
}

/// All representable integers in [lo, hi), ascending.
fn scan_window(lo: u128, hi_excl: u128) -> Vec<u128> {
    debug_assert!(hi_excl > lo);
    let max_v = hi_excl - 1;
    if max_v < 4 {
        return Vec::new();
    }
    let nbits = (hi_excl - lo) as usize;
    let words: Vec<AtomicU64> = (0..nbits.div_ceil(64)).map(|_| AtomicU64::new(0)).collect();
    let x1_max = fourth_root(max_v - 3);
    (1..=x1_max).into_par_iter().for_each(|x1| {
        let p1 = pow4(x1);
        if 4 * p1 < lo {
            return; // even x1 at all four slots stays below the window
        }
        for x2 in 1..=x1 {
            let s2 = p1 + pow4(x2);
            if s2 + 2 > max_v {
                break;
            }
            if s2 + 2 * pow4(x2) < lo {
                continue;
            }
            for x3 in 1..=x2 {
                let s3 = s2 + pow4(x3);
                if s3 + 1 > max_v {
                    break;
                }
                let x4_hi = fourth_root(max_v - s3).min(x3);
                if x4_hi == 0 {
                    continue;
                }
                let x4_lo = if s3 + 1 >= lo {
                    1
                } else {
                    ceil_fourth_root(lo - s3)
                };
                for x4 in x4_lo..=x4_hi {
                    let bit = (s3 + pow4(x4) - lo) as usize;
                    words[bit / 64].fetch_or(1u64 << (bit % 64), Ordering::Relaxed);
                }
            }
        }
    });
    let mut out = Vec::new();
    for (wi, w) in words.iter().enumerate() {
        let mut bits = w.load(Ordering::Relaxed);
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            out.push(lo + (wi * 64 + b) as u128);
            bits &= bits - 1;
        }
    }
    out
}

/// Smallest x ≥ 1 with x⁴ ≥ d (d ≥ 1).
fn ceil_fourth_root(d: u128) -> u64 {
    let r = fourth_root(d);
    if pow4(r) == d {
        r
    } else {
        r + 1
    }
}

/// Stream with default memory configuration.
pub fn enumerate_representable(limit: u128) -> Result<RepresentableStream> {
    enumerate_representable_with(limit, EnumerationConfig::default())
}

pub fn enumerate_representable_with(
    limit: u128,
    config: EnumerationConfig,
) -> Result<RepresentableStream> {
    let window = config.effective_window()?;
    Ok(RepresentableStream {
        limit,
        window,
        next_lo: if limit < 4 { limit + 1 } else { 4 },
        buf: Vec::new().into_iter(),
    })
}

/// Gap statistics of the representable set up to `limit`.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    /// Enumeration limit.
    pub limit: u128,
    /// Number of distinct representable integers ≤ limit.
    pub count: u64,
    /// Largest difference between consecutive representable integers
    /// (0 when fewer than two exist).
    pub max_gap: u128,
    /// The representable integer at the right end of the first maximal gap.
    pub max_gap_location: u128,
    /// Gap size → frequency over consecutive pairs.
    pub histogram: BTreeMap<u128, u64>,
    /// Smallest and largest representable integers ≤ limit (0, 0 if none).
    pub first: u128,
    pub last: u128,
}

pub fn gap_statistics(limit: u128) -> Result<GapReport> {
    gap_statistics_with(limit, EnumerationConfig::default())
}

pub fn gap_statistics_with(limit: u128, config: EnumerationConfig) -> Result<GapReport> {
    let mut count = 0u64;
    let mut first = 0u128;
    let mut last = 0u128;
    let mut prev: Option<u128> = None;
    let mut max_gap = 0u128;
    let mut max_gap_location = 0u128;
    let mut histogram = BTreeMap::new();
    for n in enumerate_representable_with(limit, config)? {
        count += 1;
        if prev.is_none() {
            first = n;
        }
        if let Some(p) = prev {
            let gap = n - p;
            *histogram.entry(gap).or_insert(0u64) += 1;
            if gap > max_gap {
                max_gap = gap;
                max_gap_location = n;
            }
        }
        prev = Some(n);
        last = n;
    }
    Ok(GapReport {
        limit,
        count,
        max_gap,
        max_gap_location,
        histogram,
        first,
        last,
    })
}

/// K′(N, Y): the number of n ∈ (N/2, N] such that the interval (n−Y, n]
/// contains no representable integer. Membership is the real-number test
/// m > n − Y, m ≤ n. Requires N ≥ 8.
pub fn count_empty_intervals(n: u128, y: f64) -> Result<u64> {
    if n < 8 {
        return Err(Error::Precondition(format!(
            "empty-interval counting needs N >= 8, got {n}"
        )));
    }
    if !(y > 0.0) {
        return Err(Error::InvalidInput(format!("Y must be positive, got {y}")));
    }
    let reps: Vec<u128> = enumerate_representable(n)?.collect();
    let mut empty = 0u64;
    let mut idx = 0usize; // reps consumed so far (all ≤ current m)
    let lo = n / 2; // count m in (N/2, N], integer m starts at ⌊N/2⌋+1
    let mut prev_rep: Option<u128> = None;
    for m in 1..=n {
        while idx < reps.len() && reps[idx] <= m {
            prev_rep = Some(reps[idx]);
            idx += 1;
        }
        if m <= lo {
            continue;
        }
        let is_empty = match prev_rep {
            None => true,
            Some(r) => ((m - r) as f64) >= y,
        };
        if is_empty {
            empty += 1;
        }
    }
    Ok(empty)
}

/// K_γ(N): the number of n ≤ N such that (n − n^γ, n] contains no
/// representable integer.
pub fn count_empty_intervals_gamma(n: u128, gamma: f64) -> Result<u64> {
    if n < 1 {
        return Err(Error::Precondition("K_gamma needs N >= 1".into()));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidInput(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let reps: Vec<u128> = enumerate_representable(n)?.collect();
    let mut empty = 0u64;
    let mut idx = 0usize;
    let mut prev_rep: Option<u128> = None;
    for m in 1..=n {
        while idx < reps.len() && reps[idx] <= m {
            prev_rep = Some(reps[idx]);
            idx += 1;
        }
        let y = (m as f64).powf(gamma);
        let is_empty = match prev_rep {
            None => true,
            Some(r) => ((m - r) as f64) >= y,
        };
        if is_empty {
            empty += 1;
        }
    }
    Ok(empty)
}

/// Greedy four-step approximation of n by fourth powers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GreedyResult {
    pub n: u128,
    /// x₁ ≥ x₂ ≥ x₃ ≥ x₄ (zeros appear when a running remainder hits 0).
    pub x: [u64; 4],
    /// n − Σxᵢ⁴.
    pub remainder: u128,
}

/// Four greedy steps: xᵢ = ⌊rᵢ^{1/4}⌋ on the running remainder.
pub fn greedy_approx(n: u128) -> Result<GreedyResult> {
    if n == 0 {
        return Err(Error::Precondition("greedy approximation needs n >= 1".into()));
    }
    let mut rem = n;
    let mut x = [0u64; 4];
    for xi in &mut x {
        let r = fourth_root(rem);
        *xi = r;
        rem -= pow4(r);
    }
    Ok(GreedyResult { n, x, remainder: rem })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representables_to_100() {
        let v: Vec<u128> = enumerate_representable(100).unwrap().collect();
        assert_eq!(v, vec![4, 19, 34, 49, 64, 84, 99]);
        let v: Vec<u128> = enumerate_representable(4).unwrap().collect();
        assert_eq!(v, vec![4]);
        let v: Vec<u128> = enumerate_representable(3).unwrap().collect();
        assert!(v.is_empty());
    }

    #[test]
    fn windowed_equals_full_bitmap() {
        let full: Vec<u128> = enumerate_representable(20000).unwrap().collect();
        for window_bits in [64u64, 100, 1 << 10, 1 << 14] {
            let cfg = EnumerationConfig {
                window_bits,
                ..EnumerationConfig::default()
            };
            let windowed: Vec<u128> =
                enumerate_representable_with(20000, cfg).unwrap().collect();
            assert_eq!(full, windowed, "window_bits = {window_bits}");
        }
    }

    #[test]
    fn brute_force_oracle_small() {
        // independent quadruple loop, no triple ordering tricks
        let limit = 3000u128;
        let mut set = std::collections::BTreeSet::new();
        for a in 1u64..=8 {
            for b in 1u64..=8 {
                for c in 1u64..=8 {
                    for d in 1u64..=8 {
                        let s = pow4(a) + pow4(b) + pow4(c) + pow4(d);
                        if s <= limit {
                            set.insert(s);
                        }
                    }
                }
            }
        }
        let v: Vec<u128> = enumerate_representable(limit).unwrap().collect();
        assert_eq!(v, set.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn budget_too_small_is_error() {
        let cfg = EnumerationConfig {
            memory_budget_bytes: 4,
            window_bits: 1 << 30,
        };
        assert!(matches!(
            enumerate_representable_with(100, cfg),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn gaps_to_100() {
        let g = gap_statistics(100).unwrap();
        assert_eq!(g.count, 7);
        assert_eq!(g.max_gap, 20);
        assert_eq!(g.max_gap_location, 84);
        assert_eq!(g.first, 4);
        assert_eq!(g.last, 99);
        let mut want = BTreeMap::new();
        want.insert(15u128, 5u64);
        want.insert(20u128, 1u64);
        assert_eq!(g.histogram, want);
    }

    #[test]
    fn gaps_degenerate() {
        let g = gap_statistics(4).unwrap();
        assert_eq!((g.count, g.max_gap), (1, 0));
        assert_eq!(g.first, 4);
        assert_eq!(g.last, 4);
    }

    #[test]
    fn histogram_mass_identity() {
        // Σ gap·freq + first = last
        for limit in [100u128, 5000, 1_000_000] {
            let g = gap_statistics(limit).unwrap();
            let mass: u128 = g.histogram.iter().map(|(gap, freq)| gap * *freq as u128).sum();
            assert_eq!(mass + g.first, g.last, "limit {limit}");
            assert!(g.last <= limit);
        }
    }

    #[test]
    fn kprime_frozen_values() {
        assert_eq!(count_empty_intervals(100, 1.0).unwrap(), 47);
        assert_eq!(count_empty_intervals(8, 8.0).unwrap(), 0);
        assert_eq!(count_empty_intervals(100, 50.0).unwrap(), 0);
        assert_eq!(count_empty_intervals(1000, 5.0).unwrap(), 382);
        assert_eq!(count_empty_intervals(1000, 20.0).unwrap(), 114);
        assert!(count_empty_intervals(7, 1.0).is_err());
    }

    #[test]
    fn kprime_monotone_in_y() {
        let mut prev = u64::MAX;
        for y in [1.0f64, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
            let k = count_empty_intervals(500, y).unwrap();
            assert!(k <= prev, "K'(500, {y}) = {k} > {prev}");
            prev = k;
        }
    }

    #[test]
    fn kgamma_frozen_values() {
        assert_eq!(count_empty_intervals_gamma(4, 0.5).unwrap(), 3);
        assert_eq!(count_empty_intervals_gamma(100, 1.0).unwrap(), 3);
        assert_eq!(count_empty_intervals_gamma(1000, 0.3).unwrap(), 701);
        assert_eq!(count_empty_intervals_gamma(1000, 0.5).unwrap(), 270);
    }

    #[test]
    fn kgamma_dyadic_block_bound() {
        // K_γ(N) ≤ N₀ + Σ_blocks K′(M, M^γ′) with (M/2)^γ ≥ M^γ′ for all
        // blocks M = N, N/2, …, 2N₀. Here N = 2048, γ = 0.35, γ′ = 0.3,
        // N₀ = 128: M^0.05 ≥ 2^0.35 holds from M = 256 up.
        let n = 2048u128;
        let (gamma, gamma_p) = (0.35f64, 0.3f64);
        let n0 = 128u128;
        let k = count_empty_intervals_gamma(n, gamma).unwrap();
        assert_eq!(k, 1145);
        let mut bound = n0 as u64;
        let mut m = n;
        while m > n0 {
            assert!((m as f64 / 2.0).powf(gamma) >= (m as f64).powf(gamma_p));
            bound += count_empty_intervals(m, (m as f64).powf(gamma_p)).unwrap();
            m /= 2;
        }
        assert_eq!(bound, 1382);
        assert!(k <= bound);
    }

    #[test]
    fn greedy_frozen_values() {
        let g = greedy_approx(1_000_000).unwrap();
        assert_eq!(g.x, [31, 16, 10, 5]);
        assert_eq!(g.remainder, 318);
        let g = greedy_approx(4).unwrap();
        assert_eq!(g.x, [1, 1, 1, 1]);
        assert_eq!(g.remainder, 0);
        let g = greedy_approx(2).unwrap();
        assert_eq!(g.x, [1, 1, 0, 0]);
        assert_eq!(g.remainder, 0);
        let g = greedy_approx(81).unwrap();
        assert_eq!(g.x, [3, 0, 0, 0]);
        assert_eq!(g.remainder, 0);
        assert!(greedy_approx(0).is_err());
    }

    #[test]
    fn greedy_chain_and_reconstruction() {
        for n in (1u128..2000).chain([10_000, 123_456_789, u64::MAX as u128]) {
            let g = greedy_approx(n).unwrap();
            let total: u128 = g.x.iter().map(|&x| pow4(x)).sum();
            assert_eq!(total + g.remainder, n);
            // monotone parts
            assert!(g.x[0] >= g.x[1] && g.x[1] >= g.x[2] && g.x[2] >= g.x[3]);
            // step residual bound: after removing x1^4, what is left is
            // below (x1+1)^4 - x1^4
            let r1 = n - pow4(g.x[0]);
            assert!(r1 < pow4(g.x[0] + 1) - pow4(g.x[0]));
        }
    }

    #[test]
    fn greedy_remainder_envelope() {
        // remainder ≤ C·n^{81/256} with C ≤ 256, over a log-spaced sample
        let mut worst = 0.0f64;
        let mut worst_n = 0u128;
        for i in 0..10_000u32 {
            let exp = 3.0 + 7.0 * i as f64 / 9_999.0;
            let n = 10f64.powf(exp).round() as u128;
            let g = greedy_approx(n).unwrap();
            let c = g.remainder as f64 / (n as f64).powf(81.0 / 256.0);
            if c > worst {
                worst = c;
                worst_n = n;
            }
        }
        assert!(worst <= 256.0, "C = {worst} at n = {worst_n}");
    }
}
