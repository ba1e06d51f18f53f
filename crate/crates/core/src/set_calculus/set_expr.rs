use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::func_expr::{FuncExpr, Value};
use super::{Gap, SetKind, Verdict};
use crate::arith::{self, factorial, factorial_target_index, largest_factorial_index};
use crate::budget::{Halt, Meter};
use crate::{Delay, Nat};

/// Membership procedure for a subset of ω, built from a fixed registry of
/// combinators.
///
/// Each node charges one step per visit plus whatever scanning it does, and a
/// [`SetExpr::Delayed`] node charges extra steps at chosen points. Answers are
/// three-valued: `Unknown` means the budget ran out, or the set is only
/// semi-decided at that point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SetExpr {
    Empty,
    All,
    /// `{n : n mod modulus ∈ residues}`. Residues are sorted, deduplicated and
    /// below the modulus.
    Periodic { modulus: Nat, residues: Vec<Nat> },
    /// `[start, end)`, unbounded above when `end` is `None`.
    Interval { start: Nat, end: Option<Nat> },
    /// Explicit finite set, sorted and deduplicated.
    Finite(Arc<[Nat]>),
    /// `{k! : k >= from}` as a set of values.
    Factorials { from: Nat },
    /// `{base^k : k >= from}`, `base >= 2`.
    Powers { base: Nat, from: Nat },
    /// `{n >= 1 : 2^e | n, 2^(e+1) ∤ n}`.
    Ruler(Nat),
    /// Each `n` is a member when `mix64(seed, n) mod denominator < numerator`.
    Random { seed: u64, numerator: u64, denominator: u64 },
    /// `{(n+2)! : n ∈ X}`.
    FactorialCode(Arc<SetExpr>),
    /// `{(n+2)! : n ∈ C} ∪ ⋃_j [(2j)!, (2j+1)!)`.
    Oscillator(Arc<SetExpr>),
    Union(Arc<SetExpr>, Arc<SetExpr>),
    Intersection(Arc<SetExpr>, Arc<SetExpr>),
    Complement(Arc<SetExpr>),
    /// `{2n : n ∈ A} ∪ {2n+1 : n ∈ B}`.
    Join(Arc<SetExpr>, Arc<SetExpr>),
    /// `{n : f(n) ∈ S}`. With `f` a permutation's inverse this is the image of `S`.
    Preimage { func: Arc<FuncExpr>, set: Arc<SetExpr> },
    /// Semi-decided view of a set: members are confirmed, non-members never are.
    Enumerable(Arc<SetExpr>),
    /// Overrides membership at finitely many points.
    Patch { base: Arc<SetExpr>, points: BTreeMap<Nat, bool> },
    /// Image of `base` under the gap shifts: each gap moves everything at or
    /// above its start up by its width. Gaps must be strictly separated.
    Shifted { base: Arc<SetExpr>, gaps: Vec<Gap> },
    /// `⋃ {[u_e, u_e + m_e] : e ∈ selector}` over the listed gaps.
    GapFill { gaps: Vec<Gap>, selector: Arc<SetExpr> },
    /// `inner` below `below`; undetermined from `below` on.
    Window { inner: Arc<SetExpr>, below: Nat },
    Delayed { inner: Arc<SetExpr>, delays: BTreeMap<Nat, Delay> },
}

/// Outcome of asking for the `r`-th element (0-indexed) of a set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Selected {
    At(Nat),
    /// The set has at most `r` elements.
    Missing,
    /// The element exists but does not fit in a `u64`.
    TooLarge,
    /// Some membership on the way was `Unknown`.
    Unresolved,
}

impl SetExpr {
    pub fn evens() -> Self {
        SetExpr::Periodic { modulus: 2, residues: alloc::vec![0] }
    }

    pub fn odds() -> Self {
        SetExpr::Periodic { modulus: 2, residues: alloc::vec![1] }
    }

    pub fn finite(values: impl IntoIterator<Item = Nat>) -> Self {
        let mut v: Vec<Nat> = values.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        SetExpr::Finite(v.into())
    }

    pub fn periodic(modulus: Nat, residues: impl IntoIterator<Item = Nat>) -> Self {
        let modulus = modulus.max(1);
        let mut r: Vec<Nat> = residues.into_iter().map(|x| x % modulus).collect();
        r.sort_unstable();
        r.dedup();
        SetExpr::Periodic { modulus, residues: r }
    }

    pub fn union(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::Union(Arc::new(a), Arc::new(b))
    }

    pub fn intersection(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::Intersection(Arc::new(a), Arc::new(b))
    }

    pub fn complement(a: SetExpr) -> Self {
        SetExpr::Complement(Arc::new(a))
    }

    pub fn join(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::Join(Arc::new(a), Arc::new(b))
    }

    pub fn preimage(func: FuncExpr, set: SetExpr) -> Self {
        SetExpr::Preimage { func: Arc::new(func), set: Arc::new(set) }
    }

    pub fn delayed(inner: SetExpr, delays: BTreeMap<Nat, Delay>) -> Self {
        SetExpr::Delayed { inner: Arc::new(inner), delays }
    }

    /// Weakest kind the structure supports.
    pub fn kind(&self) -> SetKind {
        use SetExpr::*;
        match self {
            Empty | All | Periodic { .. } | Interval { .. } | Finite(_) | Factorials { .. }
            | Powers { .. } | Ruler(_) | Random { .. } => SetKind::Decidable,
            FactorialCode(x) | Oscillator(x) | Window { inner: x, .. } | Delayed { inner: x, .. }
            | Patch { base: x, .. } | Shifted { base: x, .. } => x.kind(),
            GapFill { selector, .. } => selector.kind(),
            Union(a, b) | Intersection(a, b) | Join(a, b) => a.kind().max(b.kind()),
            Complement(x) => match x.kind() {
                SetKind::Decidable => SetKind::Decidable,
                _ => SetKind::OracleBacked,
            },
            Preimage { func, set } => {
                if func.claims().total {
                    set.kind()
                } else {
                    set.kind().max(SetKind::Enumerable)
                }
            }
            Enumerable(x) => x.kind().max(SetKind::Enumerable),
        }
    }

    /// Structural infinitude, when the combinator makes it evident.
    pub fn known_infinite(&self) -> Option<bool> {
        use SetExpr::*;
        match self {
            Empty | Finite(_) => Some(false),
            All | Factorials { .. } | Powers { .. } | Ruler(_) | Oscillator(_) => Some(true),
            Periodic { residues, .. } => Some(!residues.is_empty()),
            Interval { end, .. } => Some(end.is_none()),
            Random { numerator, denominator, .. } => {
                if *numerator == 0 {
                    Some(false)
                } else if numerator >= denominator {
                    Some(true)
                } else {
                    None
                }
            }
            FactorialCode(x) | Enumerable(x) | Patch { base: x, .. } | Shifted { base: x, .. }
            | Delayed { inner: x, .. } => x.known_infinite(),
            Union(a, b) | Join(a, b) => match (a.known_infinite(), b.known_infinite()) {
                (Some(true), _) | (_, Some(true)) => Some(true),
                (Some(false), Some(false)) => Some(false),
                _ => None,
            },
            Intersection(a, b) => match (a.known_infinite(), b.known_infinite()) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                _ => None,
            },
            Complement(x) => match x.known_infinite() {
                Some(false) => Some(true),
                _ => match **x {
                    All => Some(false),
                    _ => None,
                },
            },
            Preimage { .. } | GapFill { .. } | Window { .. } => None,
        }
    }

    pub(crate) fn decide(&self, n: Nat, meter: &mut Meter) -> Result<Verdict, Halt> {
        use SetExpr::*;
        meter.tick()?;
        let v = match self {
            Empty => Verdict::Out,
            All => Verdict::In,
            Periodic { modulus, residues } => {
                Verdict::from_bool(residues.binary_search(&(n % modulus)).is_ok())
            }
            Interval { start, end } => {
                Verdict::from_bool(n >= *start && end.is_none_or(|e| n < e))
            }
            Finite(values) => Verdict::from_bool(values.binary_search(&n).is_ok()),
            Factorials { from } => Verdict::from_bool(is_factorial_from(n, *from)),
            Powers { base, from } => Verdict::from_bool(power_exponent(n, *base).is_some_and(|k| k >= *from)),
            Ruler(e) => Verdict::from_bool(n > 0 && arith::valuation2(n) == *e),
            Random { seed, numerator, denominator } => {
                Verdict::from_bool(arith::mix64(*seed, n) % (*denominator).max(1) < *numerator)
            }
            FactorialCode(x) => match factorial_target_index(n) {
                Some(k) => x.decide(k - 2, meter)?,
                None => Verdict::Out,
            },
            Oscillator(c) => {
                if n >= 1 && largest_factorial_index(n).is_multiple_of(2) {
                    // n ∈ [m!, (m+1)!) with m even and m >= 2.
                    Verdict::In
                } else {
                    match factorial_target_index(n) {
                        Some(k) => c.decide(k - 2, meter)?,
                        None => Verdict::Out,
                    }
                }
            }
            Union(a, b) => match a.decide(n, meter)? {
                Verdict::In => Verdict::In,
                va => va.or(b.decide(n, meter)?),
            },
            Intersection(a, b) => match a.decide(n, meter)? {
                Verdict::Out => Verdict::Out,
                va => va.and(b.decide(n, meter)?),
            },
            Complement(x) => x.decide(n, meter)?.negate(),
            Join(a, b) => {
                if n.is_multiple_of(2) {
                    a.decide(n / 2, meter)?
                } else {
                    b.decide(n / 2, meter)?
                }
            }
            Preimage { func, set } => match func.eval_value(n, meter) {
                Ok(Value::Defined(v)) => set.decide(v, meter)?,
                Ok(Value::RankOf { set: x, rank: _ }) => set.decide_rank_of(&x),
                Ok(Value::Undefined) | Err(Halt::Overflow) => Verdict::Unknown,
                Err(Halt::Exhausted) => return Err(Halt::Exhausted),
            },
            Enumerable(x) => match x.decide(n, meter)? {
                Verdict::In => Verdict::In,
                _ => Verdict::Unknown,
            },
            Patch { base, points } => match points.get(&n) {
                Some(&b) => Verdict::from_bool(b),
                None => base.decide(n, meter)?,
            },
            Shifted { base, gaps } => match unshift(n, gaps) {
                Some(m) => base.decide(m, meter)?,
                None => Verdict::Out,
            },
            GapFill { gaps, selector } => {
                let mut verdict = Verdict::Out;
                for (e, gap) in gaps.iter().enumerate() {
                    if n >= gap.start && n <= gap.start + gap.width {
                        verdict = verdict.or(selector.decide(e as Nat, meter)?);
                    }
                }
                verdict
            }
            Window { inner, below } => {
                if n >= *below {
                    Verdict::Unknown
                } else {
                    inner.decide(n, meter)?
                }
            }
            Delayed { inner, delays } => {
                if let Some(d) = delays.get(&n) {
                    meter.delay(*d)?;
                }
                inner.decide(n, meter)?
            }
        };
        Ok(v)
    }

    /// Membership of the `rank`-th element of `x`, which is known to exist but
    /// is too large to write down.
    fn decide_rank_of(&self, x: &SetExpr) -> Verdict {
        use SetExpr::*;
        if self == x {
            return Verdict::In;
        }
        match self {
            Complement(inner) if **inner == *x => Verdict::Out,
            Union(a, b) => a.decide_rank_of(x).or(b.decide_rank_of(x)),
            Intersection(a, b) => a.decide_rank_of(x).and(b.decide_rank_of(x)),
            Enumerable(inner) => match inner.decide_rank_of(x) {
                Verdict::In => Verdict::In,
                _ => Verdict::Unknown,
            },
            Patch { base, .. } | Delayed { inner: base, .. } => base.decide_rank_of(x),
            All => Verdict::In,
            Empty => Verdict::Out,
            _ => Verdict::Unknown,
        }
    }

    /// `|S ∩ [0, n)|`, `None` if a membership below `n` is unresolved.
    pub(crate) fn count_below(&self, n: Nat, meter: &mut Meter) -> Result<Option<Nat>, Halt> {
        use SetExpr::*;
        let closed = match self {
            Empty => Some(0),
            All => Some(n),
            Periodic { modulus, residues } => {
                let full = n / modulus * residues.len() as Nat;
                let rem = n % modulus;
                Some(full + residues.iter().take_while(|&&r| r < rem).count() as Nat)
            }
            Interval { start, end } => {
                let hi = end.map_or(n, |e| e.min(n));
                Some(hi.saturating_sub(*start))
            }
            Finite(values) => Some(values.partition_point(|&v| v < n) as Nat),
            Factorials { from } => Some(distinct_factorials_below(n, *from)),
            Powers { base, from } => {
                let mut count = 0;
                let mut k = *from;
                while arith::checked_pow(*base, k).is_some_and(|p| p < n) {
                    count += 1;
                    k += 1;
                }
                Some(count)
            }
            Ruler(e) => {
                let top = n.saturating_sub(1);
                let low = arith::checked_pow(2, *e).map_or(0, |p| top / p);
                let high = arith::checked_pow(2, *e + 1).map_or(0, |p| top / p);
                Some(low - high)
            }
            _ => None,
        };
        if let Some(c) = closed {
            meter.tick()?;
            return Ok(Some(c));
        }
        let mut count = 0;
        for k in 0..n {
            match self.decide(k, meter)? {
                Verdict::In => count += 1,
                Verdict::Out => {}
                Verdict::Unknown => return Ok(None),
            }
        }
        Ok(Some(count))
    }

    /// The `r`-th element in increasing order.
    pub(crate) fn select(&self, r: Nat, meter: &mut Meter) -> Result<Selected, Halt> {
        use SetExpr::*;
        let closed = match self {
            Empty => Some(Selected::Missing),
            All => Some(Selected::At(r)),
            Periodic { modulus, residues } => Some(if residues.is_empty() {
                Selected::Missing
            } else {
                let len = residues.len() as Nat;
                (r / len)
                    .checked_mul(*modulus)
                    .and_then(|b| b.checked_add(residues[(r % len) as usize]))
                    .map_or(Selected::TooLarge, Selected::At)
            }),
            Interval { start, end } => Some(match start.checked_add(r) {
                Some(v) if end.is_none_or(|e| v < e) => Selected::At(v),
                Some(_) => Selected::Missing,
                None => Selected::TooLarge,
            }),
            Finite(values) => Some(values.get(r as usize).map_or(Selected::Missing, |&v| Selected::At(v))),
            Factorials { from } => {
                // 0! = 1! = 1 is a single value.
                let k = if *from <= 1 {
                    if r == 0 { Some(1) } else { r.checked_add(1) }
                } else {
                    from.checked_add(r)
                };
                Some(k.and_then(factorial).map_or(Selected::TooLarge, Selected::At))
            }
            Powers { base, from } => Some(
                from.checked_add(r)
                    .and_then(|k| arith::checked_pow(*base, k))
                    .map_or(Selected::TooLarge, Selected::At),
            ),
            Ruler(e) => Some(
                arith::checked_pow(2, *e)
                    .and_then(|p| r.checked_mul(2)?.checked_add(1)?.checked_mul(p))
                    .map_or(Selected::TooLarge, Selected::At),
            ),
            _ => None,
        };
        if let Some(s) = closed {
            meter.tick()?;
            return Ok(s);
        }
        scan_select(r, meter, |k, m| self.decide(k, m))
    }
}

/// Generic `r`-th element search by scanning upward from 0.
pub(crate) fn scan_select(
    r: Nat,
    meter: &mut Meter,
    mut decide: impl FnMut(Nat, &mut Meter) -> Result<Verdict, Halt>,
) -> Result<Selected, Halt> {
    let mut seen = 0;
    let mut k: Nat = 0;
    loop {
        match decide(k, meter)? {
            Verdict::In => {
                if seen == r {
                    return Ok(Selected::At(k));
                }
                seen += 1;
            }
            Verdict::Out => {}
            Verdict::Unknown => return Ok(Selected::Unresolved),
        }
        k = match k.checked_add(1) {
            Some(next) => next,
            None => return Ok(Selected::TooLarge),
        };
    }
}

fn is_factorial_from(n: Nat, from: Nat) -> bool {
    if n == 1 {
        return from <= 1;
    }
    factorial_target_index(n).is_some_and(|k| k >= from)
}

fn distinct_factorials_below(n: Nat, from: Nat) -> Nat {
    let mut count = 0;
    if from <= 1 && n > 1 {
        count += 1;
    }
    let mut k = from.max(2);
    while factorial(k).is_some_and(|f| f < n) {
        count += 1;
        k += 1;
    }
    count
}

fn power_exponent(n: Nat, base: Nat) -> Option<Nat> {
    if base < 2 || n == 0 {
        return None;
    }
    let mut k = 0;
    let mut x = n;
    while x.is_multiple_of(base) {
        x /= base;
        k += 1;
    }
    (x == 1).then_some(k)
}

/// Undo the gap shifts: the pre-image of `n`, or `None` when `n` sits inside a
/// gap.
pub(crate) fn unshift(mut n: Nat, gaps: &[Gap]) -> Option<Nat> {
    for gap in gaps.iter().rev() {
        if n >= gap.start + gap.width {
            n -= gap.width;
        } else if n >= gap.start {
            return None;
        }
    }
    Some(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_BUDGET;

    fn member(s: &SetExpr, n: Nat) -> Verdict {
        s.decide(n, &mut Meter::new(DEFAULT_BUDGET)).unwrap_or(Verdict::Unknown)
    }

    fn brute_count(s: &SetExpr, n: Nat) -> Nat {
        (0..n).filter(|&k| member(s, k) == Verdict::In).count() as Nat
    }

    fn brute_select(s: &SetExpr, r: Nat) -> Option<Nat> {
        (0..100_000).filter(|&k| member(s, k) == Verdict::In).nth(r as usize)
    }

    #[test]
    fn closed_forms_match_scans() {
        let sets = [
            SetExpr::Empty,
            SetExpr::All,
            SetExpr::evens(),
            SetExpr::periodic(7, [1, 3, 6]),
            SetExpr::Interval { start: 4, end: Some(30) },
            SetExpr::finite([3, 9, 27, 81]),
            SetExpr::Factorials { from: 0 },
            SetExpr::Factorials { from: 2 },
            SetExpr::Factorials { from: 4 },
            SetExpr::Powers { base: 2, from: 2 },
            SetExpr::Powers { base: 3, from: 0 },
            SetExpr::Ruler(0),
            SetExpr::Ruler(3),
        ];
        for s in &sets {
            for n in [0, 1, 2, 5, 17, 64, 100, 1000] {
                let mut m = Meter::new(DEFAULT_BUDGET);
                assert_eq!(s.count_below(n, &mut m).unwrap(), Some(brute_count(s, n)), "{s:?} n={n}");
            }
            for r in 0..6 {
                let mut m = Meter::new(DEFAULT_BUDGET);
                let got = match s.select(r, &mut m).unwrap() {
                    Selected::At(v) => Some(v),
                    _ => None,
                };
                match brute_select(s, r) {
                    Some(v) => assert_eq!(got, Some(v), "{s:?} r={r}"),
                    None => assert!(got.is_none_or(|v| v >= 100_000), "{s:?} r={r}"),
                }
            }
        }
    }

    #[test]
    fn oscillator_small_window() {
        let w = SetExpr::Oscillator(Arc::new(SetExpr::Empty));
        let members: Vec<Nat> = (0..30).filter(|&k| member(&w, k) == Verdict::In).collect();
        assert_eq!(members, [2, 3, 4, 5, 24, 25, 26, 27, 28, 29]);
        let w = SetExpr::Oscillator(Arc::new(SetExpr::All));
        assert_eq!(member(&w, 6), Verdict::In);
        assert_eq!(member(&w, 7), Verdict::Out);
    }

    #[test]
    fn shift_inverse() {
        let gaps = [Gap { start: 1, width: 2 }, Gap { start: 5, width: 3 }];
        // 0 stays, 1.. shift by 2; then >= 5 shifts by 3.
        assert_eq!(unshift(0, &gaps), Some(0));
        assert_eq!(unshift(1, &gaps), None);
        assert_eq!(unshift(3, &gaps), Some(1));
        assert_eq!(unshift(4, &gaps), Some(2));
        assert_eq!(unshift(6, &gaps), None);
        assert_eq!(unshift(8, &gaps), Some(3));
    }

    #[test]
    fn kinds_propagate() {
        let ce = SetExpr::Enumerable(Arc::new(SetExpr::evens()));
        assert_eq!(ce.kind(), SetKind::Enumerable);
        assert_eq!(SetExpr::complement(ce.clone()).kind(), SetKind::OracleBacked);
        assert_eq!(SetExpr::union(ce, SetExpr::All).kind(), SetKind::Enumerable);
        assert_eq!(SetExpr::complement(SetExpr::odds()).kind(), SetKind::Decidable);
    }
}
