//! Subsets of ω and partial functions on ω as step-budgeted combinator trees,
//! with the closure operations used by the constructions.
//!
//! A [`SetSpec`] answers membership with a three-valued [`Verdict`]; a
//! [`FuncSpec`] answers `Defined(v)` or `Diverged`. Both are driven by an
//! abstract step budget, and an answer obtained at one budget is reproduced at
//! every larger one.

mod enumerate;
mod func_expr;
mod ops;
mod set_expr;
mod spec;

pub use enumerate::Enumeration;
pub use func_expr::FuncExpr;
pub use ops::{
    complement, image_prefix, intersection, join, prefix, star_injectivity_report, union, ImagePrefix,
    Prefix, StarInjectivityReport,
};
pub use set_expr::SetExpr;
pub use spec::{Eval, FuncSpec, Mapping, PermSpec, PermViolation, RangeError, SetSpec, SpecWarning};

pub(crate) use set_expr::Selected;

use crate::Nat;

/// Three-valued membership answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    In,
    Out,
    /// Not resolved within the budget.
    Unknown,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::In
        } else {
            Verdict::Out
        }
    }

    pub fn is_resolved(self) -> bool {
        self != Verdict::Unknown
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Verdict::In => Some(true),
            Verdict::Out => Some(false),
            Verdict::Unknown => None,
        }
    }

    pub fn negate(self) -> Self {
        match self {
            Verdict::In => Verdict::Out,
            Verdict::Out => Verdict::In,
            Verdict::Unknown => Verdict::Unknown,
        }
    }

    /// Kleene disjunction.
    pub fn or(self, other: Self) -> Self {
        match (self, other) {
            (Verdict::In, _) | (_, Verdict::In) => Verdict::In,
            (Verdict::Out, Verdict::Out) => Verdict::Out,
            _ => Verdict::Unknown,
        }
    }

    /// Kleene conjunction.
    pub fn and(self, other: Self) -> Self {
        self.negate().or(other.negate()).negate()
    }
}

/// How membership is available, ordered from strongest to weakest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SetKind {
    Decidable,
    Enumerable,
    OracleBacked,
}

/// A gap `[start, start + width]` opened by shifting everything at or above
/// `start` up by `width`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gap {
    pub start: Nat,
    pub width: Nat,
}

/// Asserted properties of a function. Constructions re-check what they rely on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Claims {
    pub total: bool,
    pub injective: bool,
    pub star_injective: bool,
    pub range_decidable: bool,
    /// `f(n) >= n` wherever defined.
    pub expanding: bool,
}
