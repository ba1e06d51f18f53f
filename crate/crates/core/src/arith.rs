//! Integer helpers shared by the combinators: factorials, 2-adic valuation,
//! the diagonal pairing function and a small deterministic hash.

use crate::Nat;

/// `k!` for `k <= 20`; larger factorials overflow a `u64`.
const FACTORIALS: [u64; 21] = {
    let mut table = [1u64; 21];
    let mut k = 1;
    while k < 21 {
        table[k] = table[k - 1] * k as u64;
        k += 1;
    }
    table
};

/// `k!`, or `None` when it does not fit in a `u64`.
pub fn factorial(k: Nat) -> Option<Nat> {
    FACTORIALS.get(usize::try_from(k).ok()?).copied()
}

/// Largest `m` with `m! <= n`. Requires `n >= 1`.
pub fn largest_factorial_index(n: Nat) -> Nat {
    debug_assert!(n >= 1);
    let mut m = 1;
    while m + 1 < FACTORIALS.len() as Nat && FACTORIALS[(m + 1) as usize] <= n {
        m += 1;
    }
    m
}

/// `Some(k)` when `n = k!` with `k >= 2` (the factorial targets `2, 6, 24, ...`).
pub fn factorial_target_index(n: Nat) -> Option<Nat> {
    FACTORIALS[2..]
        .iter()
        .position(|&f| f == n)
        .map(|i| i as Nat + 2)
}

/// Number of factorial targets `k!` (`k >= 2`) strictly below `n`.
pub fn factorial_targets_below(n: Nat) -> Nat {
    FACTORIALS[2..].iter().take_while(|&&f| f < n).count() as Nat
}

/// Position of a non-factorial `m` among the non-factorials in increasing order.
pub fn non_factorial_rank(m: Nat) -> Nat {
    m - factorial_targets_below(m)
}

/// The `r`-th non-factorial (0-indexed), i.e. the `r`-th element of the
/// complement of `{k! : k >= 2}`.
pub fn non_factorial_select(r: Nat) -> Nat {
    let mut m = r;
    loop {
        if factorial_target_index(m).is_none() && non_factorial_rank(m) == r {
            return m;
        }
        m += 1;
    }
}

/// 2-adic valuation of a positive integer.
pub fn valuation2(n: Nat) -> Nat {
    debug_assert!(n > 0);
    n.trailing_zeros() as Nat
}

/// `base^exp`, or `None` on overflow.
pub fn checked_pow(base: Nat, exp: Nat) -> Option<Nat> {
    base.checked_pow(u32::try_from(exp).ok()?)
}

/// Cantor pairing `<x, y> = (x + y)(x + y + 1)/2 + y`.
///
/// This is the coding used for oracle strings: bit `<x, y>` of a graph string
/// is set exactly when the encoded function maps `x` to `y`.
pub fn pair(x: Nat, y: Nat) -> Option<Nat> {
    let s = x.checked_add(y)?;
    let tri = (s as u128 * (s as u128 + 1)) / 2;
    u64::try_from(tri + y as u128).ok()
}

/// Inverse of [`pair`].
pub fn unpair(p: Nat) -> (Nat, Nat) {
    // Largest s with s(s+1)/2 <= p.
    let s = ((8 * p as u128 + 1).isqrt() - 1) / 2;
    let y = p as u128 - s * (s + 1) / 2;
    ((s - y) as Nat, y as Nat)
}

/// SplitMix64 finaliser; a fixed, seedable hash for pseudo-random sets.
pub fn mix64(seed: u64, n: u64) -> u64 {
    let mut z = seed ^ n.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_table() {
        assert_eq!(factorial(0), Some(1));
        assert_eq!(factorial(5), Some(120));
        assert_eq!(factorial(20), Some(2_432_902_008_176_640_000));
        assert_eq!(factorial(21), None);
    }

    #[test]
    fn largest_factorial() {
        assert_eq!(largest_factorial_index(1), 1);
        assert_eq!(largest_factorial_index(5), 2);
        assert_eq!(largest_factorial_index(6), 3);
        assert_eq!(largest_factorial_index(5039), 6);
        assert_eq!(largest_factorial_index(5040), 7);
        assert_eq!(largest_factorial_index(u64::MAX), 20);
    }

    #[test]
    fn non_factorial_ranks() {
        // non-factorials: 0 1 3 4 5 7 8 ...
        let firsts: std::vec::Vec<_> = (0..7).map(non_factorial_select).collect();
        assert_eq!(firsts, [0, 1, 3, 4, 5, 7, 8]);
        for r in 0..200 {
            assert_eq!(non_factorial_rank(non_factorial_select(r)), r);
        }
        assert_eq!(factorial_target_index(24), Some(4));
        assert_eq!(factorial_target_index(1), None);
    }

    #[test]
    fn pairing_round_trip() {
        for p in 0..2000 {
            let (x, y) = unpair(p);
            assert_eq!(pair(x, y), Some(p));
        }
        assert_eq!(pair(0, 0), Some(0));
        assert_eq!(pair(1, 0), Some(1));
        assert_eq!(pair(0, 1), Some(2));
        assert_eq!(pair(10, 0), Some(55));
    }
}
