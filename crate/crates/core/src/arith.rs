//! Integer fourth powers and exact floor fourth roots.

/// x⁴ as u128. Panics in debug if x⁴ would overflow (x ≥ 2³²).
pub fn pow4(x: u64) -> u128 {
    let s = (x as u128) * (x as u128);
    s * s
}

/// x⁴ if it fits in u128.
pub fn pow4_checked(x: u64) -> Option<u128> {
    let s = (x as u128).checked_mul(x as u128)?;
    s.checked_mul(s)
}

/// ⌊n^{1/4}⌋, exact: a float seed corrected by a short Newton-style walk so
/// that the invariant r⁴ ≤ n < (r+1)⁴ holds for every n.
pub fn fourth_root(n: u128) -> u64 {
    if n == 0 {
        return 0;
    }
    // seed: double-precision root, then correct. The seed is within a few
    // ulps of the answer even when n doesn't fit in a double exactly.
    let mut r = (n as f64).powf(0.25) as u64;
    if r > 0 {
        r -= r.min(2);
    }
    while pow4_checked(r + 1).map_or(false, |p| p <= n) {
        r += 1;
    }
    while pow4(r) > n {
        r -= 1;
    }
    r
}

/// Is n a perfect fourth power? Returns the root if so.
pub fn exact_fourth_root(n: u128) -> Option<u64> {
    let r = fourth_root(n);
    (pow4(r) == n).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_small() {
        let mut r = 0u64;
        for n in 0..=1_000_000u128 {
            if pow4_checked(r + 1) == Some(n) {
                r += 1;
            }
            assert_eq!(fourth_root(n), r, "n = {n}");
        }
    }

    #[test]
    fn boundary_values() {
        assert_eq!(fourth_root(u128::MAX), (1u64 << 32) - 1);
        let r = (1u64 << 32) - 1;
        assert_eq!(fourth_root(pow4(r)), r);
        assert_eq!(fourth_root(pow4(r) - 1), r - 1);
        assert_eq!(fourth_root(1), 1);
        assert_eq!(fourth_root(15), 1);
        assert_eq!(fourth_root(16), 2);
    }

    #[test]
    fn random_values_satisfy_invariant() {
        // splitmix64 stream, fixed seed
        let mut s = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            s = s.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = s;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^ (z >> 31)
        };
        for _ in 0..20_000 {
            let n = ((next() as u128) << 64) | next() as u128;
            let r = fourth_root(n);
            assert!(pow4(r) <= n);
            assert!(pow4_checked(r + 1).map_or(true, |p| p > n));
        }
    }
}
