use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::set_expr::{scan_select, Selected, SetExpr};
use super::{Claims, Verdict};
use crate::arith::{self, factorial, factorial_target_index, non_factorial_rank, non_factorial_select};
use crate::budget::{Halt, Meter};
use crate::{Delay, Nat};

/// Partial function on ω built from the combinator registry.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FuncExpr {
    Identity,
    Constant(Nat),
    /// `mul * n + add`.
    Affine { mul: Nat, add: Nat },
    /// `n - k`, undefined below `k`.
    Subtract(Nat),
    /// `n xor k`, an involution.
    Xor(Nat),
    /// Reverses each block `[qb, (q+1)b)`, an involution.
    BlockReverse(Nat),
    /// `⌊n / d⌋`.
    FloorDiv(Nat),
    Factorial,
    /// `0 ↦ 0`, otherwise the 2-adic valuation.
    Valuation,
    /// `2^f(n)`.
    PowerCode(Arc<FuncExpr>),
    /// `outer(inner(n))`.
    Compose { outer: Arc<FuncExpr>, inner: Arc<FuncExpr> },
    /// Characteristic function of a set.
    Indicator(Arc<SetExpr>),
    /// `n ↦` the `n`-th element of the set.
    Principal(Arc<SetExpr>),
    /// Order-preserving matching of `set` onto the non-factorials and of its
    /// complement onto `{k! : k >= 2}`, or the inverse of that matching.
    FactorialSwap { set: Arc<SetExpr>, inverse: bool },
    /// Dense table; entries past the end are undefined.
    Table(Arc<[Option<Nat>]>),
    Sparse(Arc<BTreeMap<Nat, Nat>>),
    /// Overrides finitely many points; `None` makes a point undefined.
    Patch { base: Arc<FuncExpr>, points: BTreeMap<Nat, Option<Nat>> },
    /// `n ↦ inner(n + Σ_{i<=n} widths[i])`; undefined once `n` runs past the list.
    GapShift { widths: Arc<[Nat]>, inner: Arc<FuncExpr> },
    Delayed { inner: Arc<FuncExpr>, delays: BTreeMap<Nat, Delay> },
}

/// Result of one evaluation before it is flattened for callers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Value {
    Defined(Nat),
    Undefined,
    /// The `rank`-th element of `set`, known to exist but beyond `u64`.
    RankOf { set: Arc<SetExpr>, rank: Nat },
}

impl FuncExpr {
    pub fn compose(outer: FuncExpr, inner: FuncExpr) -> Self {
        FuncExpr::Compose { outer: Arc::new(outer), inner: Arc::new(inner) }
    }

    pub fn table(values: impl IntoIterator<Item = Option<Nat>>) -> Self {
        FuncExpr::Table(values.into_iter().collect::<Vec<_>>().into())
    }

    pub fn delayed(inner: FuncExpr, delays: BTreeMap<Nat, Delay>) -> Self {
        FuncExpr::Delayed { inner: Arc::new(inner), delays }
    }

    /// Evaluate, collapsing undefined and unrepresentable values into `None`
    /// and `Halt::Overflow` respectively.
    pub(crate) fn eval(&self, n: Nat, meter: &mut Meter) -> Result<Option<Nat>, Halt> {
        match self.eval_value(n, meter)? {
            Value::Defined(v) => Ok(Some(v)),
            Value::Undefined => Ok(None),
            Value::RankOf { .. } => Err(Halt::Overflow),
        }
    }

    pub(crate) fn eval_value(&self, n: Nat, meter: &mut Meter) -> Result<Value, Halt> {
        use FuncExpr::*;
        meter.tick()?;
        let defined = |v: Option<Nat>| v.map_or(Err(Halt::Overflow), |v| Ok(Value::Defined(v)));
        match self {
            Identity => Ok(Value::Defined(n)),
            Constant(c) => Ok(Value::Defined(*c)),
            Affine { mul, add } => defined(mul.checked_mul(n).and_then(|x| x.checked_add(*add))),
            Subtract(k) => Ok(n.checked_sub(*k).map_or(Value::Undefined, Value::Defined)),
            Xor(k) => Ok(Value::Defined(n ^ k)),
            BlockReverse(b) => {
                let b = (*b).max(1);
                let (q, r) = (n / b, n % b);
                // The last block may be cut off by u64::MAX; leave it fixed there.
                match q.checked_mul(b).and_then(|base| base.checked_add(b - 1)) {
                    Some(top) => Ok(Value::Defined(top - r)),
                    None => Ok(Value::Defined(n)),
                }
            }
            FloorDiv(d) => Ok(Value::Defined(n / (*d).max(1))),
            Factorial => defined(factorial(n)),
            Valuation => Ok(Value::Defined(if n == 0 { 0 } else { arith::valuation2(n) })),
            PowerCode(f) => match f.eval(n, meter)? {
                Some(v) => defined(arith::checked_pow(2, v)),
                None => Ok(Value::Undefined),
            },
            Compose { outer, inner } => match inner.eval(n, meter)? {
                Some(v) => outer.eval_value(v, meter),
                None => Ok(Value::Undefined),
            },
            Indicator(s) => Ok(match s.decide(n, meter)? {
                Verdict::In => Value::Defined(1),
                Verdict::Out => Value::Defined(0),
                Verdict::Unknown => Value::Undefined,
            }),
            Principal(s) => match s.select(n, meter)? {
                Selected::At(v) => Ok(Value::Defined(v)),
                Selected::TooLarge => Ok(Value::RankOf { set: s.clone(), rank: n }),
                Selected::Missing | Selected::Unresolved => Ok(Value::Undefined),
            },
            FactorialSwap { set, inverse: false } => swap_forward(set, n, meter),
            FactorialSwap { set, inverse: true } => swap_inverse(set, n, meter),
            Table(t) => Ok(usize::try_from(n)
                .ok()
                .and_then(|i| t.get(i).copied().flatten())
                .map_or(Value::Undefined, Value::Defined)),
            Sparse(m) => Ok(m.get(&n).map_or(Value::Undefined, |&v| Value::Defined(v))),
            Patch { base, points } => match points.get(&n) {
                Some(v) => Ok(v.map_or(Value::Undefined, Value::Defined)),
                None => base.eval_value(n, meter),
            },
            GapShift { widths, inner } => {
                let Some(prefix) = usize::try_from(n).ok().and_then(|i| widths.get(..=i)) else {
                    return Ok(Value::Undefined);
                };
                let shift = prefix.iter().try_fold(0u64, |acc, &w| acc.checked_add(w));
                match shift.and_then(|s| n.checked_add(s)) {
                    Some(x) => inner.eval_value(x, meter),
                    None => Err(Halt::Overflow),
                }
            }
            Delayed { inner, delays } => {
                if let Some(d) = delays.get(&n) {
                    meter.delay(*d)?;
                }
                inner.eval_value(n, meter)
            }
        }
    }

    /// Properties that follow from the structure alone.
    pub fn claims(&self) -> Claims {
        use FuncExpr::*;
        let all = Claims { total: true, injective: true, star_injective: true, range_decidable: true, expanding: false };
        match self {
            Identity => Claims { expanding: true, ..all },
            Constant(_) => Claims { injective: false, ..all },
            Affine { mul: 0, .. } => Claims { injective: false, ..all },
            Affine { .. } => Claims { expanding: true, ..all },
            Subtract(0) => Claims { expanding: true, ..all },
            Subtract(_) => Claims { total: false, ..all },
            Xor(_) | BlockReverse(_) => all,
            FloorDiv(d) if *d <= 1 => Claims { expanding: true, ..all },
            FloorDiv(_) | Valuation => Claims { injective: false, star_injective: false, ..all },
            // Only 0! = 1! collides.
            Factorial => Claims { injective: false, expanding: true, ..all },
            PowerCode(f) => {
                let c = f.claims();
                // Collisions of 2^f sit inside the powers of two, a density-zero set.
                Claims { total: c.total, injective: c.injective, star_injective: true, range_decidable: c.range_decidable && c.injective, expanding: true }
            }
            Compose { outer, inner } => {
                let (o, i) = (outer.claims(), inner.claims());
                Claims {
                    total: o.total && i.total,
                    injective: o.injective && i.injective,
                    star_injective: o.injective && i.injective,
                    range_decidable: false,
                    expanding: o.expanding && i.expanding,
                }
            }
            Indicator(s) => Claims {
                total: s.kind() == super::SetKind::Decidable,
                injective: false,
                star_injective: true,
                range_decidable: true,
                expanding: false,
            },
            Principal(s) => Claims {
                total: s.known_infinite() == Some(true) && s.kind() == super::SetKind::Decidable,
                injective: true,
                star_injective: true,
                range_decidable: s.kind() == super::SetKind::Decidable,
                expanding: true,
            },
            FactorialSwap { set, .. } => Claims { total: set.kind() == super::SetKind::Decidable, ..all },
            Table(t) => {
                let defined: Vec<Nat> = t.iter().flatten().copied().collect();
                let injective = all_distinct(defined.iter().copied());
                Claims {
                    total: false,
                    injective,
                    star_injective: true,
                    range_decidable: true,
                    expanding: t.iter().enumerate().all(|(i, v)| v.is_none_or(|v| v >= i as Nat)),
                }
            }
            Sparse(m) => Claims {
                total: false,
                injective: all_distinct(m.values().copied()),
                star_injective: true,
                range_decidable: true,
                expanding: m.iter().all(|(&k, &v)| v >= k),
            },
            Patch { base, points } => {
                let b = base.claims();
                Claims {
                    total: b.total && points.values().all(Option::is_some),
                    injective: false,
                    star_injective: b.star_injective,
                    range_decidable: false,
                    expanding: b.expanding && points.iter().all(|(&k, v)| v.is_none_or(|v| v >= k)),
                }
            }
            GapShift { inner, .. } => Claims { total: false, range_decidable: false, ..inner.claims() },
            Delayed { inner, delays } => {
                let c = inner.claims();
                Claims { total: c.total && !delays.values().any(|d| *d == Delay::Never), ..c }
            }
        }
    }

    /// Range as a set expression, when the structure gives one.
    pub fn range(&self) -> Option<SetExpr> {
        use FuncExpr::*;
        Some(match self {
            Identity | Xor(_) | BlockReverse(_) | FloorDiv(_) | Valuation => SetExpr::All,
            Subtract(_) => SetExpr::All,
            Constant(c) => SetExpr::finite([*c]),
            Affine { mul: 0, add } => SetExpr::finite([*add]),
            Affine { mul, add } => SetExpr::intersection(
                SetExpr::Interval { start: *add, end: None },
                SetExpr::periodic(*mul, [*add % *mul]),
            ),
            Factorial => SetExpr::Factorials { from: 0 },
            PowerCode(f) => match **f {
                Identity => SetExpr::Powers { base: 2, from: 0 },
                _ => return None,
            },
            Indicator(_) => SetExpr::finite([0, 1]),
            Principal(s) => (**s).clone(),
            FactorialSwap { set, inverse: true } => (**set).clone(),
            FactorialSwap { inverse: false, .. } => SetExpr::All,
            Table(t) => SetExpr::finite(t.iter().flatten().copied()),
            Sparse(m) => SetExpr::finite(m.values().copied()),
            _ => return None,
        })
    }

    /// Inverse for the built-in bijections.
    pub fn inverse(&self) -> Option<FuncExpr> {
        use FuncExpr::*;
        match self {
            Identity | Xor(_) | BlockReverse(_) => Some(self.clone()),
            Affine { mul: 1, add: 0 } | Subtract(0) | FloorDiv(1) => Some(Identity),
            FactorialSwap { set, inverse } => Some(FactorialSwap { set: set.clone(), inverse: !inverse }),
            _ => None,
        }
    }
}

fn all_distinct(values: impl Iterator<Item = Nat>) -> bool {
    let mut seen = alloc::collections::BTreeSet::new();
    values.into_iter().all(|v| seen.insert(v))
}

fn swap_forward(set: &Arc<SetExpr>, n: Nat, meter: &mut Meter) -> Result<Value, Halt> {
    let member = set.decide(n, meter)?;
    if member == Verdict::Unknown {
        return Ok(Value::Undefined);
    }
    let Some(below) = set.count_below(n, meter)? else {
        return Ok(Value::Undefined);
    };
    if member == Verdict::In {
        Ok(Value::Defined(non_factorial_select(below)))
    } else {
        let rank = n - below;
        match rank.checked_add(2).and_then(factorial) {
            Some(v) => Ok(Value::Defined(v)),
            None => Err(Halt::Overflow),
        }
    }
}

fn swap_inverse(set: &Arc<SetExpr>, m: Nat, meter: &mut Meter) -> Result<Value, Halt> {
    let selected = match factorial_target_index(m) {
        Some(k) => scan_select(k - 2, meter, |x, meter| Ok(set.decide(x, meter)?.negate()))?,
        None => {
            let rank = non_factorial_rank(m);
            match set.select(rank, meter)? {
                Selected::TooLarge => return Ok(Value::RankOf { set: set.clone(), rank }),
                other => other,
            }
        }
    };
    Ok(match selected {
        Selected::At(v) => Value::Defined(v),
        _ => Value::Undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_BUDGET;

    fn ev(f: &FuncExpr, n: Nat) -> Option<Nat> {
        f.eval(n, &mut Meter::new(DEFAULT_BUDGET)).ok().flatten()
    }

    #[test]
    fn swap_on_evens_matches_trace() {
        let pi = FuncExpr::FactorialSwap { set: Arc::new(SetExpr::evens()), inverse: false };
        let got: Vec<_> = (0..5).map(|n| ev(&pi, n)).collect();
        assert_eq!(got, [Some(0), Some(2), Some(1), Some(6), Some(3)]);
        let inv = pi.inverse().unwrap();
        for n in 0..30 {
            assert_eq!(ev(&inv, ev(&pi, n).unwrap()), Some(n));
        }
    }

    #[test]
    fn swap_of_non_factorials_is_identity() {
        let s = SetExpr::complement(SetExpr::Factorials { from: 2 });
        let pi = FuncExpr::FactorialSwap { set: Arc::new(s), inverse: false };
        for n in 0..800 {
            assert_eq!(ev(&pi, n), Some(n));
        }
    }

    #[test]
    fn involutions() {
        for f in [FuncExpr::Xor(5), FuncExpr::BlockReverse(7)] {
            for n in 0..100 {
                assert_eq!(ev(&f, ev(&f, n).unwrap()), Some(n));
            }
        }
        assert_eq!(ev(&FuncExpr::BlockReverse(3), u64::MAX), Some(u64::MAX));
    }

    #[test]
    fn gap_shift_sums_widths_through_n() {
        let g = FuncExpr::GapShift { widths: [2, 3].into(), inner: Arc::new(FuncExpr::Identity) };
        assert_eq!(ev(&g, 0), Some(2));
        assert_eq!(ev(&g, 1), Some(6));
        assert_eq!(ev(&g, 2), None);
    }

    #[test]
    fn power_code_overflow_is_a_halt() {
        let g = FuncExpr::PowerCode(Arc::new(FuncExpr::Identity));
        assert_eq!(ev(&g, 3), Some(8));
        assert_eq!(g.eval(64, &mut Meter::new(100)), Err(Halt::Overflow));
    }

    #[test]
    fn never_delay_diverges() {
        let f = FuncExpr::delayed(FuncExpr::Identity, [(3, Delay::Never)].into_iter().collect());
        assert_eq!(f.eval(3, &mut Meter::new(u64::MAX - 1)), Err(Halt::Exhausted));
        assert_eq!(ev(&f, 4), Some(4));
    }
}
