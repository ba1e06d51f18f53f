//! Coded sets: factorial coding with its refusing description, the
//! oscillating set, ruler sets, and power coding of functions.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::arith::factorial;
use crate::describe::{DescExpr, Description, Mode};
use crate::density::DensityProfile;
use crate::set_calculus::{FuncExpr, FuncSpec, SetExpr, SetSpec};
use crate::{ratio, Budget, Density, Nat};

/// `A = {(n+2)! : n ∈ X}` and the effective-dense description that refuses
/// on every `k!` with `k >= 2` and answers 0 elsewhere.
///
/// The shift by two keeps the coding injective (`0! = 1!`).
pub fn factorial_code(x: &SetSpec) -> (SetSpec, Description) {
    let a = SetSpec::new(format!("factorial_code({})", x.name()), SetExpr::FactorialCode(Arc::new(x.expr().clone())))
        .with_kind(x.kind());
    let d = Description::new(
        format!("boxes({})", a.name()),
        Mode::EffectiveDense,
        DescExpr::BoxOn {
            boxes: Arc::new(SetExpr::Factorials { from: 2 }),
            otherwise: Arc::new(DescExpr::Constant(crate::describe::Answer::Zero)),
        },
    );
    (a, d)
}

/// `{(n+2)! : n ∈ C} ∪ ⋃_j [(2j)!, (2j+1)!)`.
pub fn oscillator(c: &SetSpec) -> SetSpec {
    SetSpec::new(format!("oscillator({})", c.name()), SetExpr::Oscillator(Arc::new(c.expr().clone()))).with_kind(c.kind())
}

/// `{n : 2^e | n, 2^(e+1) ∤ n}`.
pub fn ruler_set(e: Nat) -> SetSpec {
    SetSpec::new(format!("ruler({e})"), SetExpr::Ruler(e))
}

/// `0 ↦ 0`, `n ↦ ν₂(n)`.
pub fn ruler_collapse() -> FuncSpec {
    FuncSpec::new("ruler_collapse", FuncExpr::Valuation)
}

/// `n ↦ 2^f(n)`; values past 64 bits are range errors.
pub fn power_code(f: &FuncSpec) -> FuncSpec {
    FuncSpec::new(format!("power_code({})", f.name()), FuncExpr::PowerCode(Arc::new(f.expr().clone())))
}

/// Direction of an oscillator bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    /// `ρ_{(2j+1)!}(W) >= 1 - 1/(2j+1)`.
    Lower,
    /// `ρ_{(2j+2)!}(W) <= 1/(2j+2)`.
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundCheck {
    pub j: Nat,
    pub kind: Bound,
    pub checkpoint: Nat,
    pub count: Nat,
    pub unresolved: Nat,
    pub value: Density,
    pub bound: Density,
    pub holds: bool,
}

/// Both oscillator bounds for every `j` with `(2j+2)! <= limit`. A check with
/// unresolved points does not hold.
pub fn oscillator_bounds(w: &SetSpec, limit: Nat, budget: Budget) -> Vec<BoundCheck> {
    let mut checkpoints = Vec::new();
    let mut j = 0;
    while let (Some(high), Some(low)) = (factorial(2 * j + 1), factorial(2 * j + 2)) {
        if low > limit {
            break;
        }
        checkpoints.push((j, Bound::Lower, high));
        checkpoints.push((j, Bound::Upper, low));
        j += 1;
    }
    let points: Vec<Nat> = checkpoints.iter().map(|c| c.2).collect();
    let profile = DensityProfile::tally(&points, |k| w.membership(k, budget));
    checkpoints
        .iter()
        .enumerate()
        .map(|(i, &(j, kind, checkpoint))| {
            let value = profile.values[i];
            let (bound, ok) = match kind {
                Bound::Lower => {
                    let b = ratio(1, 1) - ratio(1, 2 * j + 1);
                    (b, value >= b)
                }
                Bound::Upper => {
                    let b = ratio(1, 2 * j + 2);
                    (b, value <= b)
                }
            };
            BoundCheck {
                j,
                kind,
                checkpoint,
                count: profile.counts[i],
                unresolved: profile.unresolved[i],
                value,
                bound,
                holds: ok && profile.unresolved[i] == 0,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::describe::{evaluate_description, Answer};
    use crate::set_calculus::{star_injectivity_report, Eval, Verdict};
    use crate::DEFAULT_BUDGET;

    #[test]
    fn factorial_code_examples() {
        let (a, d) = factorial_code(&SetSpec::empty());
        assert!((0..100).all(|n| a.membership(n, DEFAULT_BUDGET) == Verdict::Out));
        assert_eq!(d.answer(3, DEFAULT_BUDGET), Answer::Zero);
        let (a, d) = factorial_code(&SetSpec::finite([0]));
        assert_eq!(a.membership(2, DEFAULT_BUDGET), Verdict::In);
        assert_eq!(a.membership(6, DEFAULT_BUDGET), Verdict::Out);
        assert_eq!(d.answer(2, DEFAULT_BUDGET), Answer::Box);
        assert_eq!(d.answer(3, DEFAULT_BUDGET), Answer::Zero);
        let r = evaluate_description(&d, &a, 24, DEFAULT_BUDGET);
        assert_eq!(r.errors, [2, 6]);
        assert_eq!(r.error_profile.value_at(24), Some(ratio(2, 24)));
        assert!(r.is_valid());
    }

    #[test]
    fn oscillator_examples() {
        let w = oscillator(&SetSpec::omega());
        let p = crate::density::partial_density(&w, 24, DEFAULT_BUDGET).unwrap();
        assert!(p.value <= ratio(1, 4));
        // W ∩ [0,24) = [2,6) ∪ {6} with C = ω.
        assert_eq!(p.count, 5);
        for c in [SetSpec::empty(), SetSpec::omega()] {
            let w = oscillator(&c);
            assert!(crate::density::partial_density(&w, 6, DEFAULT_BUDGET).unwrap().value >= ratio(2, 3));
            assert!(oscillator_bounds(&w, 40320, DEFAULT_BUDGET).iter().all(|b| b.holds));
        }
    }

    #[test]
    fn ruler_examples() {
        let f = ruler_collapse();
        assert_eq!(f.evaluate(0, 10), Ok(Eval::Defined(0)));
        assert_eq!(f.evaluate(12, 10), Ok(Eval::Defined(2)));
        assert_eq!(ruler_set(1).membership(6, 10), Verdict::In);
        assert_eq!(ruler_set(2).membership(6, 10), Verdict::Out);
    }

    #[test]
    fn power_code_examples() {
        assert_eq!(power_code(&FuncSpec::identity()).evaluate(3, 10), Ok(Eval::Defined(8)));
        let g = power_code(&ruler_collapse());
        assert_eq!(g.evaluate(12, 10), Ok(Eval::Defined(4)));
        let r = star_injectivity_report(&g, 64, DEFAULT_BUDGET, ratio(1, 10));
        assert!(r.collisions.iter().all(|v| v.is_power_of_two()));
        assert!(!r.collisions.is_empty());
    }
}
