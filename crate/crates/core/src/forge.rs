//! Stage-by-stage builders: thinning an enumerable set, upgrading injective
//! and almost-injective functions, patching ranges, and the factorial swap.
//!
//! Every builder works on a window `[0, N)` and keeps an explicit used-set;
//! the result carries the realized table so callers can check it directly.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::arith::checked_pow;
use crate::set_calculus::{complement, FuncExpr, FuncSpec, PermSpec, SetExpr, SetSpec, Verdict};
use crate::{Budget, Nat};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ForgeError {
    #[error("f({input}) did not resolve within budget")]
    Undefined { input: Nat },
    #[error("f({first}) = f({second}) = {value}")]
    Collision { first: Nat, second: Nat, value: Nat },
    #[error("{value} is in H but not in the range of f")]
    NotInRange { value: Nat },
    #[error("membership of {value} in {set} did not resolve within budget")]
    Unresolved { set: &'static str, value: Nat },
    #[error("the construction needs a range spec for f")]
    MissingRange,
    #[error("H has no unused element below {searched_below}; {needed} more were needed")]
    HExhausted { needed: usize, searched_below: Nat },
    #[error("{side} has only {found} elements where {needed} are needed to match the window")]
    Insufficient { side: &'static str, needed: Nat, found: Nat },
}

/// Window, per-point budget, and how far "least unused element" searches may go.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ForgeOptions {
    pub window: Nat,
    pub budget: Budget,
    pub search_limit: Nat,
}

impl ForgeOptions {
    pub fn new(window: Nat) -> Self {
        ForgeOptions { window, budget: crate::DEFAULT_BUDGET, search_limit: window.saturating_mul(64).max(1 << 16) }
    }
}

/// Thinned subset `h_0 < h_1 < ...` of an enumerable set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThinSubset {
    pub values: Vec<Nat>,
    pub set: SetSpec,
    /// Fewer than the requested number of elements were found.
    pub partial: bool,
}

/// `h_0 = c_0`, `h_{n+1}` = the enumerated `c_j` of least index with
/// `c_j > h_n + 2^n`. The enumeration covers values below `limit`, each
/// checked with `horizon` steps.
pub fn thin_ce_subset(c: &SetSpec, count: usize, horizon: Budget, limit: Nat) -> ThinSubset {
    let mut source = c.enumerate(horizon, limit);
    let mut seen: Vec<Nat> = Vec::new();
    let mut values: Vec<Nat> = Vec::new();
    'outer: while values.len() < count {
        let threshold = match values.last() {
            None => None,
            Some(&h) => match checked_pow(2, values.len() as Nat - 1).and_then(|p| h.checked_add(p)) {
                Some(t) => Some(t),
                None => break,
            },
        };
        let qualifies = |v: Nat| threshold.is_none_or(|t| v > t);
        if let Some(&v) = seen.iter().find(|&&v| qualifies(v)) {
            values.push(v);
            continue;
        }
        loop {
            let Some(v) = source.next() else { break 'outer };
            seen.push(v);
            if qualifies(v) {
                values.push(v);
                continue 'outer;
            }
        }
    }
    let partial = values.len() < count;
    let set = SetSpec::new(format!("thin({})", c.name()), SetExpr::finite(values.iter().copied()));
    ThinSubset { values, set, partial }
}

/// A permutation realized on a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForgedPerm {
    pub perm: PermSpec,
    /// `π(n)` for `n < N`; `None` where the value does not fit in 64 bits.
    pub forward: Vec<Option<Nat>>,
    /// Every `m` below this bound has a realized preimage.
    pub covered_below: Nat,
}

/// A function realized on a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForgedFunc {
    pub func: FuncSpec,
    pub table: Vec<Nat>,
    /// Inputs where the construction did not copy `f`.
    pub replaced: Vec<Nat>,
}

fn resolve(set: &SetSpec, which: &'static str, v: Nat, budget: Budget) -> Result<bool, ForgeError> {
    set.membership(v, budget).as_bool().ok_or(ForgeError::Unresolved { set: which, value: v })
}

fn total_table(f: &FuncSpec, opts: &ForgeOptions) -> Result<Vec<Nat>, ForgeError> {
    (0..opts.window).map(|n| f.value(n, opts.budget).ok_or(ForgeError::Undefined { input: n })).collect()
}

fn check_injective(table: &[Nat]) -> Result<(), ForgeError> {
    let mut first: BTreeMap<Nat, Nat> = BTreeMap::new();
    for (n, &v) in table.iter().enumerate() {
        if let Some(&m) = first.get(&v) {
            return Err(ForgeError::Collision { first: m, second: n as Nat, value: v });
        }
        first.insert(v, n as Nat);
    }
    Ok(())
}

fn least_unmatched(inverse: &BTreeMap<Nat, Nat>) -> Nat {
    let mut m = 0;
    while inverse.contains_key(&m) {
        m += 1;
    }
    m
}

fn table_perm(name: &str, forward: &[Nat]) -> (PermSpec, BTreeMap<Nat, Nat>) {
    let inverse: BTreeMap<Nat, Nat> = forward.iter().enumerate().map(|(n, &v)| (v, n as Nat)).collect();
    let perm = PermSpec::new(
        name,
        FuncSpec::new(name, FuncExpr::table(forward.iter().map(|&v| Some(v)))),
        FuncSpec::new(format!("{name}^-1"), FuncExpr::Sparse(Arc::new(inverse.clone()))),
    );
    (perm, inverse)
}

/// Turn a total injective `f` into a permutation that agrees with `f` off `H`.
///
/// `π(n) = f(n)` when `f(n) ∉ H`; otherwise `π(n)` is the least element of
/// `H ∪ complement(range f)` not used by `π` on `[0, n)`.
pub fn injective_to_permutation(f: &FuncSpec, h: &SetSpec, opts: &ForgeOptions) -> Result<ForgedPerm, ForgeError> {
    let range = f.range().ok_or(ForgeError::MissingRange)?;
    let table = total_table(f, opts)?;
    check_injective(&table)?;
    for m in 0..opts.window {
        if resolve(h, "H", m, opts.budget)? && !resolve(range, "range", m, opts.budget)? {
            return Err(ForgeError::NotInRange { value: m });
        }
    }
    let pool = crate::set_calculus::union(h, &complement(range));
    let mut used = BTreeSet::new();
    let mut cursor = 0;
    let mut forward = Vec::with_capacity(table.len());
    for &v in &table {
        let value = if resolve(h, "H", v, opts.budget)? {
            loop {
                if cursor >= opts.search_limit {
                    return Err(ForgeError::HExhausted { needed: table.len() - forward.len(), searched_below: cursor });
                }
                if !used.contains(&cursor) && resolve(&pool, "pool", cursor, opts.budget)? {
                    break cursor;
                }
                cursor += 1;
            }
        } else {
            v
        };
        used.insert(value);
        forward.push(value);
    }
    let (perm, inverse) = table_perm(&format!("perm({},{})", f.name(), h.name()), &forward);
    Ok(ForgedPerm { perm, forward: forward.into_iter().map(Some).collect(), covered_below: least_unmatched(&inverse) })
}

/// Turn a total `f` into an injection: `g(n) = f(n)` when that value is not
/// yet used by `g`, otherwise the least unused element of `H`.
pub fn star_injective_to_injective(f: &FuncSpec, h: &SetSpec, opts: &ForgeOptions) -> Result<ForgedFunc, ForgeError> {
    let table = total_table(f, opts)?;
    let mut used = BTreeSet::new();
    let mut cursor = 0;
    let mut out = Vec::with_capacity(table.len());
    let mut replaced = Vec::new();
    for (n, &v) in table.iter().enumerate() {
        let value = if used.contains(&v) {
            replaced.push(n as Nat);
            loop {
                if cursor >= opts.search_limit {
                    return Err(ForgeError::HExhausted { needed: table.len() - out.len(), searched_below: cursor });
                }
                if !used.contains(&cursor) && resolve(h, "H", cursor, opts.budget)? {
                    break cursor;
                }
                cursor += 1;
            }
        } else {
            v
        };
        used.insert(value);
        out.push(value);
    }
    let func = FuncSpec::new(format!("inj({},{})", f.name(), h.name()), FuncExpr::table(out.iter().map(|&v| Some(v))));
    Ok(ForgedFunc { func, table: out, replaced })
}

/// `g(n) = f(n)` when `f(n) ∈ H`, else `0`.
pub fn range_patch(f: &FuncSpec, h: &SetSpec, opts: &ForgeOptions) -> Result<ForgedFunc, ForgeError> {
    let table = total_table(f, opts)?;
    let mut out = Vec::with_capacity(table.len());
    let mut replaced = Vec::new();
    for (n, &v) in table.iter().enumerate() {
        if resolve(h, "H", v, opts.budget)? {
            out.push(v);
        } else {
            replaced.push(n as Nat);
            out.push(0);
        }
    }
    let func = FuncSpec::new(format!("patch({},{})", f.name(), h.name()), FuncExpr::table(out.iter().map(|&v| Some(v))));
    Ok(ForgedFunc { func, table: out, replaced })
}

/// The order-preserving swap of `S` onto the non-factorials and of its
/// complement onto `{k! : k >= 2}`, with its inverse certified on the window.
pub fn factorial_swap(s: &SetSpec, opts: &ForgeOptions) -> Result<ForgedPerm, ForgeError> {
    let perm = PermSpec::factorial_swap(s);
    let mut inverse = BTreeMap::new();
    for m in 0..opts.window {
        match perm.inverse().value(m, opts.budget) {
            Some(x) => {
                inverse.insert(m, x);
            }
            None => return Err(insufficient(s, m, opts)),
        }
    }
    let forward = (0..opts.window).map(|n| perm.forward().value(n, opts.budget)).collect();
    Ok(ForgedPerm { perm, forward, covered_below: opts.window })
}

fn insufficient(s: &SetSpec, m: Nat, opts: &ForgeOptions) -> ForgeError {
    let count = |set: &SetSpec| {
        (0..opts.search_limit).filter(|&k| set.membership(k, opts.budget) == Verdict::In).count() as Nat
    };
    match crate::arith::factorial_target_index(m) {
        Some(k) => ForgeError::Insufficient { side: "complement of S", needed: k - 1, found: count(&complement(s)) },
        None => ForgeError::Insufficient {
            side: "S",
            needed: crate::arith::non_factorial_rank(m) + 1,
            found: count(s),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set_calculus::Eval;

    fn powers_from_4() -> SetSpec {
        SetSpec::new("pow2", SetExpr::Powers { base: 2, from: 2 })
    }

    #[test]
    fn thin_traces() {
        let t = thin_ce_subset(&SetSpec::evens(), 5, 1000, 1000);
        assert_eq!(t.values, [0, 2, 6, 12, 22]);
        let t = thin_ce_subset(&SetSpec::omega(), 5, 1000, 1000);
        assert_eq!(t.values, [0, 2, 5, 10, 19]);
        assert!(!t.partial);
        let t = thin_ce_subset(&SetSpec::finite([1, 2, 3]), 3, 1000, 1000);
        assert_eq!((t.values.as_slice(), t.partial), ([1, 3].as_slice(), true));
    }

    #[test]
    fn permutation_trace() {
        let f = FuncSpec::new("double", FuncExpr::Affine { mul: 2, add: 0 });
        let p = injective_to_permutation(&f, &powers_from_4(), &ForgeOptions::new(5)).unwrap();
        assert_eq!(p.forward, [Some(0), Some(2), Some(1), Some(6), Some(3)]);
        let id = injective_to_permutation(&FuncSpec::identity(), &SetSpec::empty(), &ForgeOptions::new(30)).unwrap();
        assert!(id.forward.iter().enumerate().all(|(n, v)| *v == Some(n as Nat)));
        assert_eq!(id.covered_below, 30);
    }

    #[test]
    fn permutation_rejects_bad_input() {
        let half = FuncSpec::new("half", FuncExpr::FloorDiv(2)).with_range(SetSpec::omega());
        assert_eq!(
            injective_to_permutation(&half, &SetSpec::empty(), &ForgeOptions::new(4)),
            Err(ForgeError::Collision { first: 0, second: 1, value: 0 })
        );
        let f = FuncSpec::new("double", FuncExpr::Affine { mul: 2, add: 0 });
        assert_eq!(
            injective_to_permutation(&f, &SetSpec::finite([3]), &ForgeOptions::new(8)),
            Err(ForgeError::NotInRange { value: 3 })
        );
    }

    #[test]
    fn injection_trace() {
        let f = FuncSpec::new(
            "merge01",
            FuncExpr::Patch { base: Arc::new(FuncExpr::Identity), points: [(1, Some(0))].into_iter().collect() },
        );
        let g = star_injective_to_injective(&f, &powers_from_4(), &ForgeOptions::new(5)).unwrap();
        assert_eq!(g.table, [0, 4, 2, 3, 8]);
        assert_eq!(g.replaced, [1, 4]);
        let g = star_injective_to_injective(&f, &SetSpec::finite([9]), &ForgeOptions::new(20));
        assert!(matches!(g, Err(ForgeError::HExhausted { .. })));
    }

    #[test]
    fn range_patch_trace() {
        let g = range_patch(&FuncSpec::identity(), &SetSpec::evens(), &ForgeOptions::new(6)).unwrap();
        assert_eq!(g.func.evaluate(5, 10), Ok(Eval::Defined(0)));
        assert_eq!(g.func.evaluate(4, 10), Ok(Eval::Defined(4)));
    }

    #[test]
    fn swap_windows() {
        let p = factorial_swap(&SetSpec::evens(), &ForgeOptions::new(5)).unwrap();
        assert_eq!(p.forward, [Some(0), Some(2), Some(1), Some(6), Some(3)]);
        let p = factorial_swap(&SetSpec::non_factorials(), &ForgeOptions::new(720)).unwrap();
        assert!(p.forward.iter().enumerate().all(|(n, v)| *v == Some(n as Nat)));
        let e = factorial_swap(&SetSpec::finite([0, 1]), &ForgeOptions { search_limit: 100, ..ForgeOptions::new(10) });
        assert_eq!(e, Err(ForgeError::Insufficient { side: "S", needed: 3, found: 2 }));
    }
}
