//! Integer sizes derived from real exponents, and id-range partitions.

use std::ops::Range;

use crate::graph::NodeId;

/// `ceil(n^r)`, snapping to the nearest integer when float error would
/// otherwise push an exact power over it (`1024^0.4` is 16, not 17).
pub fn ceil_pow(n: u64, r: f64) -> u64 {
    if n <= 1 {
        return n;
    }
    ceil_snap((n as f64).powf(r))
}

/// `ceil(x)` for `x >= 0`, treating values within float error of an integer as that integer.
pub fn ceil_snap(x: f64) -> u64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as u64
    } else {
        x.ceil() as u64
    }
}

/// Smallest `s` with `s^p >= n`.
pub fn iroot_ceil(n: u64, p: u32) -> u64 {
    if n <= 1 {
        return n;
    }
    let mut s = (n as f64).powf(1.0 / p as f64).floor().max(1.0) as u64;
    while s > 1 && pow_at_least(s - 1, p, n) {
        s -= 1;
    }
    while !pow_at_least(s, p, n) {
        s += 1;
    }
    s
}

fn pow_at_least(s: u64, p: u32, n: u64) -> bool {
    (s as u128).checked_pow(p).is_none_or(|v| v >= n as u128)
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Splits `0..n` into `parts` contiguous ranges whose sizes differ by at most one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalancedRanges {
    n: u64,
    parts: u64,
}

impl BalancedRanges {
    pub fn new(n: u64, parts: u64) -> Self {
        assert!(parts >= 1, "need at least one part");
        BalancedRanges {
            n,
            parts: parts.min(n.max(1)),
        }
    }

    pub fn count(&self) -> u64 {
        self.parts
    }

    pub fn max_size(&self) -> u64 {
        self.n.div_ceil(self.parts)
    }

    fn start(&self, i: u64) -> u64 {
        let (q, r) = (self.n / self.parts, self.n % self.parts);
        i * q + i.min(r)
    }

    pub fn range(&self, i: u64) -> Range<NodeId> {
        self.start(i) as NodeId..self.start(i + 1) as NodeId
    }

    pub fn part_of(&self, v: NodeId) -> u64 {
        let (q, r) = (self.n / self.parts, self.n % self.parts);
        let v = v as u64;
        let big = r * (q + 1);
        if v < big {
            v / (q + 1)
        } else {
            r + (v - big) / q
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_powers_do_not_round_up() {
        assert_eq!(ceil_pow(1024, 0.4), 16);
        assert_eq!(ceil_pow(1024, 0.2), 4);
        assert_eq!(ceil_pow(4096, 1.0 / 3.0), 16);
        assert_eq!(ceil_pow(4096, 2.0 / 3.0), 256);
        assert_eq!(ceil_pow(1000, 0.5), 32);
        assert_eq!(ceil_pow(1, 0.5), 1);
    }

    #[test]
    fn integer_roots() {
        assert_eq!(iroot_ceil(16, 2), 4);
        assert_eq!(iroot_ceil(17, 2), 5);
        assert_eq!(iroot_ceil(8, 3), 2);
        assert_eq!(iroot_ceil(17, 4), 3);
        assert_eq!(iroot_ceil(1 << 16, 16), 2);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(4, 3), 4);
        assert_eq!(binomial(3, 5), 0);
    }

    proptest! {
        #[test]
        fn balanced_ranges_tile(n in 1u64..5000, parts in 1u64..200) {
            let r = BalancedRanges::new(n, parts);
            let mut next = 0;
            let (mut lo, mut hi) = (u64::MAX, 0);
            for i in 0..r.count() {
                let range = r.range(i);
                prop_assert_eq!(range.start as u64, next);
                next = range.end as u64;
                let len = range.len() as u64;
                lo = lo.min(len);
                hi = hi.max(len);
                for v in range {
                    prop_assert_eq!(r.part_of(v), i);
                }
            }
            prop_assert_eq!(next, n);
            prop_assert!(hi - lo <= 1);
            prop_assert_eq!(hi, r.max_size());
        }

        #[test]
        fn iroot_is_minimal(n in 1u64..1_000_000, p in 2u32..7) {
            let s = iroot_ceil(n, p);
            prop_assert!((s as u128).pow(p) >= n as u128);
            prop_assert!(s == 1 || ((s - 1) as u128).pow(p) < n as u128);
        }
    }
}
