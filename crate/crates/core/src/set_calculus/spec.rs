use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{Claims, Enumeration, FuncExpr, SetExpr, SetKind, Verdict};
use crate::budget::{Halt, Meter};
use crate::{Budget, Nat};

/// Conditions attached to a spec when an operation could not keep its kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpecWarning {
    /// Complement of a merely enumerable set: membership of the complement
    /// needs an oracle, and `Out` answers of the original are never produced.
    ComplementOfEnumerable,
}

/// A named subset of ω with a kind tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetSpec {
    name: String,
    kind: SetKind,
    expr: Arc<SetExpr>,
    warnings: Vec<SpecWarning>,
}

impl SetSpec {
    /// Wrap an expression; the kind is inferred from its structure.
    pub fn new(name: impl Into<String>, expr: SetExpr) -> Self {
        let kind = expr.kind();
        SetSpec { name: name.into(), kind, expr: Arc::new(expr), warnings: Vec::new() }
    }

    /// Override the kind tag. Tags weaker than the structure allows are kept;
    /// stronger ones are ignored.
    pub fn with_kind(mut self, kind: SetKind) -> Self {
        self.kind = self.kind.max(kind);
        self
    }

    pub(crate) fn with_warnings(mut self, warnings: impl IntoIterator<Item = SpecWarning>) -> Self {
        for w in warnings {
            if !self.warnings.contains(&w) {
                self.warnings.push(w);
            }
        }
        self
    }

    pub fn empty() -> Self {
        SetSpec::new("empty", SetExpr::Empty)
    }

    pub fn omega() -> Self {
        SetSpec::new("omega", SetExpr::All)
    }

    pub fn evens() -> Self {
        SetSpec::new("evens", SetExpr::evens())
    }

    pub fn odds() -> Self {
        SetSpec::new("odds", SetExpr::odds())
    }

    /// `{k! : k >= 2}`.
    pub fn factorials() -> Self {
        SetSpec::new("factorials", SetExpr::Factorials { from: 2 })
    }

    pub fn non_factorials() -> Self {
        SetSpec::new("non_factorials", SetExpr::complement(SetExpr::Factorials { from: 2 }))
    }

    pub fn finite(values: impl IntoIterator<Item = Nat>) -> Self {
        SetSpec::new("finite", SetExpr::finite(values))
    }

    /// Pseudo-random set with membership probability `numerator / denominator`.
    pub fn random(seed: u64, numerator: u64, denominator: u64) -> Self {
        SetSpec::new(
            format!("random({seed},{numerator}/{denominator})"),
            SetExpr::Random { seed, numerator, denominator: denominator.max(1) },
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn expr(&self) -> &SetExpr {
        &self.expr
    }

    pub(crate) fn expr_arc(&self) -> &Arc<SetExpr> {
        &self.expr
    }

    pub fn warnings(&self) -> &[SpecWarning] {
        &self.warnings
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Membership of `n` within `budget` steps.
    pub fn membership(&self, n: Nat, budget: Budget) -> Verdict {
        self.expr.decide(n, &mut Meter::new(budget)).unwrap_or(Verdict::Unknown)
    }

    /// Dovetailed enumeration of the values below `limit`; see [`Enumeration`].
    pub fn enumerate(&self, horizon: Budget, limit: Nat) -> Enumeration {
        Enumeration::new(self.expr.clone(), horizon, limit)
    }

    /// Structural infinitude when evident from the combinators.
    pub fn known_infinite(&self) -> Option<bool> {
        self.expr.known_infinite()
    }
}

/// Outcome of evaluating a function at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Eval {
    Defined(Nat),
    /// Undefined, or not converged within the budget.
    Diverged,
}

impl Eval {
    pub fn defined(self) -> Option<Nat> {
        match self {
            Eval::Defined(v) => Some(v),
            Eval::Diverged => None,
        }
    }
}

/// A value did not fit in the 64-bit naturals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("value at input {input} exceeds the 64-bit natural range")]
pub struct RangeError {
    pub input: Nat,
}

/// A named partial function with claims and an optional range spec.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuncSpec {
    name: String,
    expr: Arc<FuncExpr>,
    claims: Claims,
    range: Option<SetSpec>,
}

impl FuncSpec {
    /// Wrap an expression; claims and range are inferred from its structure.
    pub fn new(name: impl Into<String>, expr: FuncExpr) -> Self {
        let claims = expr.claims();
        let range = expr.range().map(|r| SetSpec::new("range", r));
        FuncSpec { name: name.into(), expr: Arc::new(expr), claims, range }
    }

    pub fn identity() -> Self {
        FuncSpec::new("identity", FuncExpr::Identity)
    }

    pub fn with_claims(mut self, claims: Claims) -> Self {
        self.claims = claims;
        self
    }

    pub fn with_range(mut self, range: SetSpec) -> Self {
        self.range = Some(range);
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn expr(&self) -> &FuncExpr {
        &self.expr
    }

    pub(crate) fn expr_arc(&self) -> &Arc<FuncExpr> {
        &self.expr
    }

    pub fn claims(&self) -> Claims {
        self.claims
    }

    pub fn range(&self) -> Option<&SetSpec> {
        self.range.as_ref()
    }

    /// Evaluate at `n` within `budget` steps.
    pub fn evaluate(&self, n: Nat, budget: Budget) -> Result<Eval, RangeError> {
        match self.expr.eval(n, &mut Meter::new(budget)) {
            Ok(Some(v)) => Ok(Eval::Defined(v)),
            Ok(None) | Err(Halt::Exhausted) => Ok(Eval::Diverged),
            Err(Halt::Overflow) => Err(RangeError { input: n }),
        }
    }

    /// `evaluate` with range errors read as divergence.
    pub(crate) fn value(&self, n: Nat, budget: Budget) -> Option<Nat> {
        self.evaluate(n, budget).ok().and_then(Eval::defined)
    }
}

/// A permutation given by forward and inverse functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermSpec {
    name: String,
    forward: FuncSpec,
    inverse: FuncSpec,
    oracle_backed: bool,
}

/// A failure of the permutation contract on a window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PermViolation {
    #[error("forward({input}) = {value} but inverse({value}) = {back:?}")]
    ForwardRoundTrip { input: Nat, value: Nat, back: Option<Nat> },
    #[error("inverse({input}) = {value} but forward({value}) = {back:?}")]
    InverseRoundTrip { input: Nat, value: Nat, back: Option<Nat> },
    #[error("no preimage of {value} resolved within budget")]
    Unresolved { value: Nat },
}

impl PermSpec {
    /// Pair a forward and an inverse. Nothing is checked here; see
    /// [`PermSpec::check_window`].
    pub fn new(name: impl Into<String>, forward: FuncSpec, inverse: FuncSpec) -> Self {
        let oracle_backed = [forward.expr(), inverse.expr()].iter().any(|f| mentions_oracle(f));
        PermSpec { name: name.into(), forward, inverse, oracle_backed }
    }

    /// A built-in bijection whose inverse is known structurally.
    pub fn from_forward(name: impl Into<String>, forward: FuncExpr) -> Option<Self> {
        let inverse = forward.inverse()?;
        let name = name.into();
        Some(PermSpec::new(
            name.clone(),
            FuncSpec::new(name.clone(), forward),
            FuncSpec::new(format!("{name}^-1"), inverse),
        ))
    }

    pub fn identity() -> Self {
        PermSpec::from_forward("identity", FuncExpr::Identity).expect("identity is a bijection")
    }

    /// Order-preserving swap of `set` onto the non-factorials and its
    /// complement onto `{k! : k >= 2}`.
    pub fn factorial_swap(set: &SetSpec) -> Self {
        PermSpec::from_forward(
            format!("factorial_swap({})", set.name()),
            FuncExpr::FactorialSwap { set: set.expr_arc().clone(), inverse: false },
        )
        .expect("factorial swap has a structural inverse")
    }

    /// Mark as depending on an oracle-backed set.
    pub fn with_oracle_backed(mut self, flag: bool) -> Self {
        self.oracle_backed = flag;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn forward(&self) -> &FuncSpec {
        &self.forward
    }

    pub fn inverse(&self) -> &FuncSpec {
        &self.inverse
    }

    pub fn is_oracle_backed(&self) -> bool {
        self.oracle_backed
    }

    /// `π(S)`, decided through the inverse.
    pub fn image(&self, set: &SetSpec) -> SetSpec {
        SetSpec::new(
            format!("{}({})", self.name, set.name()),
            SetExpr::Preimage { func: self.inverse.expr_arc().clone(), set: set.expr_arc().clone() },
        )
        .with_warnings(set.warnings().iter().copied())
    }

    /// Round trips on `[0, n)` in both directions, and a resolved preimage for
    /// every value below `n`.
    pub fn check_window(&self, n: Nat, budget: Budget) -> Result<(), PermViolation> {
        for x in 0..n {
            if let Some(v) = self.forward.value(x, budget) {
                let back = self.inverse.value(v, budget);
                if back != Some(x) {
                    return Err(PermViolation::ForwardRoundTrip { input: x, value: v, back });
                }
            }
            match self.inverse.value(x, budget) {
                Some(v) => {
                    let back = self.forward.value(v, budget);
                    if back != Some(x) {
                        return Err(PermViolation::InverseRoundTrip { input: x, value: v, back });
                    }
                }
                None => return Err(PermViolation::Unresolved { value: x }),
            }
        }
        Ok(())
    }
}

fn mentions_oracle(f: &FuncExpr) -> bool {
    use FuncExpr::*;
    match f {
        Indicator(s) | Principal(s) | FactorialSwap { set: s, .. } => s.kind() == SetKind::OracleBacked,
        PowerCode(g) | Patch { base: g, .. } | GapShift { inner: g, .. } | Delayed { inner: g, .. } => {
            mentions_oracle(g)
        }
        Compose { outer, inner } => mentions_oracle(outer) || mentions_oracle(inner),
        _ => false,
    }
}

/// Either kind of function a report can be run against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mapping {
    Func(FuncSpec),
    Perm(PermSpec),
}

impl Mapping {
    pub fn name(&self) -> &str {
        match self {
            Mapping::Func(f) => f.name(),
            Mapping::Perm(p) => p.name(),
        }
    }

    /// The forward function.
    pub fn forward(&self) -> &FuncSpec {
        match self {
            Mapping::Func(f) => f,
            Mapping::Perm(p) => p.forward(),
        }
    }
}

impl From<FuncSpec> for Mapping {
    fn from(f: FuncSpec) -> Self {
        Mapping::Func(f)
    }
}

impl From<PermSpec> for Mapping {
    fn from(p: PermSpec) -> Self {
        Mapping::Perm(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Delay, DEFAULT_BUDGET};

    #[test]
    fn membership_examples() {
        assert_eq!(SetSpec::evens().membership(4, 1), Verdict::In);
        assert_eq!(SetSpec::evens().membership(7, 1), Verdict::Out);
        let slow = SetSpec::new(
            "slow",
            SetExpr::Enumerable(Arc::new(SetExpr::delayed(
                SetExpr::All,
                [(5, Delay::Steps(100))].into_iter().collect(),
            ))),
        );
        assert_eq!(slow.kind(), SetKind::Enumerable);
        assert_eq!(slow.membership(5, 10), Verdict::Unknown);
        assert_eq!(slow.membership(5, 200), Verdict::In);
    }

    #[test]
    fn registry_perms_pass_window_checks() {
        let perms = [
            PermSpec::identity(),
            PermSpec::from_forward("xor5", FuncExpr::Xor(5)).unwrap(),
            PermSpec::from_forward("rev4", FuncExpr::BlockReverse(4)).unwrap(),
            PermSpec::factorial_swap(&SetSpec::evens()),
            PermSpec::factorial_swap(&SetSpec::non_factorials()),
        ];
        for p in &perms {
            assert_eq!(p.check_window(800, DEFAULT_BUDGET), Ok(()), "{}", p.name());
        }
    }

    #[test]
    fn successor_is_not_a_permutation() {
        let p = PermSpec::new(
            "succ",
            FuncSpec::new("succ", FuncExpr::Affine { mul: 1, add: 1 }),
            FuncSpec::new("pred", FuncExpr::Subtract(1)),
        );
        assert_eq!(p.check_window(4, DEFAULT_BUDGET), Err(PermViolation::Unresolved { value: 0 }));
    }

    #[test]
    fn image_of_factorials_under_swap_is_non_factorials() {
        let pi = PermSpec::factorial_swap(&SetSpec::factorials());
        let img = pi.image(&SetSpec::factorials());
        let nf = SetSpec::non_factorials();
        for m in 0..5040 {
            assert_eq!(img.membership(m, DEFAULT_BUDGET), nf.membership(m, DEFAULT_BUDGET), "m={m}");
        }
    }

    #[test]
    fn range_error_is_explicit() {
        let g = FuncSpec::new("pow", FuncExpr::PowerCode(Arc::new(FuncExpr::Identity)));
        assert_eq!(g.evaluate(64, DEFAULT_BUDGET), Err(RangeError { input: 64 }));
        assert_eq!(g.evaluate(3, DEFAULT_BUDGET), Ok(Eval::Defined(8)));
    }
}
