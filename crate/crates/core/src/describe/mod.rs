//! Candidate descriptions of a set and their evaluation under the generic,
//! coarse, dense and effective-dense readings.
//!
//! A [`Description`] answers `0`, `1`, `□` (an explicit refusal) or diverges.
//! [`evaluate_description`] splits a window into error, agreement and
//! unresolved points according to the mode and records mode violations.
//! [`intrinsic_report`] pushes the error set through a family of permutations.

pub mod oracle;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::budget::{Halt, Meter};
use crate::density::{smallness_report, DensityProfile, SmallnessOptions, SmallnessVerdict, Witness};
use crate::set_calculus::{FuncExpr, Mapping, PermSpec, SetExpr, SetSpec, Verdict};
use crate::{Budget, Nat};

/// One answer of a description.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Answer {
    Zero,
    One,
    /// Explicit refusal.
    Box,
    Diverged,
}

impl Answer {
    fn bit(self) -> Option<bool> {
        match self {
            Answer::Zero => Some(false),
            Answer::One => Some(true),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Partial, never wrong where it answers.
    Generic,
    /// Total, possibly wrong.
    Coarse,
    /// Partial and possibly wrong.
    Dense,
    /// Total, never wrong, refuses with `□`.
    EffectiveDense,
}

/// Combinators for descriptions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DescExpr {
    /// Characteristic function of a set; unresolved points diverge.
    Indicator(Arc<SetExpr>),
    Constant(Answer),
    /// `□` on `boxes`, `otherwise` elsewhere.
    BoxOn { boxes: Arc<SetExpr>, otherwise: Arc<DescExpr> },
    /// Diverges on `set`, `otherwise` elsewhere.
    DivergeOn { set: Arc<SetExpr>, otherwise: Arc<DescExpr> },
    /// `0 ↦ 0`, `1 ↦ 1`, larger values `↦ □`.
    FromFunc(Arc<FuncExpr>),
    /// `inner` run with a fixed budget; divergence there becomes `0`.
    Total { inner: Arc<DescExpr>, resolution: Budget },
    Patch { base: Arc<DescExpr>, points: BTreeMap<Nat, Answer> },
}

impl DescExpr {
    fn answer(&self, n: Nat, meter: &mut Meter) -> Result<Answer, Halt> {
        use DescExpr::*;
        meter.tick()?;
        Ok(match self {
            Indicator(s) => match s.decide(n, meter)? {
                Verdict::In => Answer::One,
                Verdict::Out => Answer::Zero,
                Verdict::Unknown => Answer::Diverged,
            },
            Constant(a) => *a,
            BoxOn { boxes, otherwise } => match boxes.decide(n, meter)? {
                Verdict::In => Answer::Box,
                Verdict::Out => otherwise.answer(n, meter)?,
                Verdict::Unknown => Answer::Diverged,
            },
            DivergeOn { set, otherwise } => match set.decide(n, meter)? {
                Verdict::Out => otherwise.answer(n, meter)?,
                _ => Answer::Diverged,
            },
            FromFunc(f) => match f.eval(n, meter) {
                Ok(Some(0)) => Answer::Zero,
                Ok(Some(1)) => Answer::One,
                Ok(Some(_)) => Answer::Box,
                Ok(None) | Err(Halt::Overflow) => Answer::Diverged,
                Err(Halt::Exhausted) => return Err(Halt::Exhausted),
            },
            Total { inner, resolution } => {
                match inner.answer(n, &mut Meter::new(*resolution)).unwrap_or(Answer::Diverged) {
                    Answer::Diverged => Answer::Zero,
                    a => a,
                }
            }
            Patch { base, points } => match points.get(&n) {
                Some(a) => *a,
                None => base.answer(n, meter)?,
            },
        })
    }

    /// The error set against `truth`, when the structure determines it.
    fn structural_errors(&self, truth: &SetExpr) -> Option<SetExpr> {
        use DescExpr::*;
        match self {
            Indicator(s) if **s == *truth => Some(SetExpr::Empty),
            Constant(Answer::Zero) => Some(truth.clone()),
            Constant(Answer::One) => Some(SetExpr::complement(truth.clone())),
            Constant(_) => Some(SetExpr::All),
            BoxOn { boxes, otherwise } => Some(simplify_union((**boxes).clone(), otherwise.structural_errors(truth)?)),
            DivergeOn { set, otherwise } => Some(simplify_union((**set).clone(), otherwise.structural_errors(truth)?)),
            _ => None,
        }
    }
}

fn simplify_union(a: SetExpr, b: SetExpr) -> SetExpr {
    match (a, b) {
        (SetExpr::Empty, x) | (x, SetExpr::Empty) => x,
        (a, b) => SetExpr::union(a, b),
    }
}

/// A named description with its mode tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Description {
    name: String,
    mode: Mode,
    expr: Arc<DescExpr>,
}

impl Description {
    pub fn new(name: impl Into<String>, mode: Mode, expr: DescExpr) -> Self {
        Description { name: name.into(), mode, expr: Arc::new(expr) }
    }

    /// The characteristic function of `set`, exact wherever it resolves.
    pub fn characteristic(set: &SetSpec, mode: Mode) -> Self {
        Description::new(
            alloc::format!("chi({})", set.name()),
            mode,
            DescExpr::Indicator(Arc::new(set.expr().clone())),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn expr(&self) -> &DescExpr {
        &self.expr
    }

    pub fn answer(&self, n: Nat, budget: Budget) -> Answer {
        self.expr.answer(n, &mut Meter::new(budget)).unwrap_or(Answer::Diverged)
    }
}

/// Total version of a description: its answer where it converges within
/// `budget`, `0` elsewhere. The result is tagged coarse.
pub fn combine_total(d: &Description, budget: Budget) -> Description {
    Description {
        name: alloc::format!("total({})", d.name),
        mode: Mode::Coarse,
        expr: Arc::new(DescExpr::Total { inner: d.expr.clone(), resolution: budget }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// A wrong 0/1 answer in a mode that promises correctness.
    WrongAnswer,
    /// Divergence in a mode that promises totality.
    Diverged,
    /// `□` in a mode that has no refusals.
    UnexpectedBox,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub n: Nat,
    pub kind: ViolationKind,
}

/// Outcome of evaluating a description against a set on `[0, window)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalReport {
    pub window: Nat,
    pub mode: Mode,
    pub errors: Vec<Nat>,
    pub agreements: Vec<Nat>,
    /// Points where the set itself did not resolve.
    pub unresolved: Vec<Nat>,
    /// Density of points answered with 0 or 1.
    pub domain_profile: DensityProfile,
    pub agreement_profile: DensityProfile,
    pub error_profile: DensityProfile,
    pub violations: Vec<Violation>,
}

impl EvalReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// The first violation, if any.
    pub fn witness(&self) -> Option<Violation> {
        self.violations.first().copied()
    }
}

/// Evaluate on `[0, window)` with profiles at every `n` in `1..=window`.
pub fn evaluate_description(d: &Description, set: &SetSpec, window: Nat, budget: Budget) -> EvalReport {
    let checkpoints: Vec<Nat> = (1..=window).collect();
    evaluate_description_on(d, set, &checkpoints, budget)
}

/// Evaluate on `[0, last checkpoint)` with profiles at the given checkpoints.
pub fn evaluate_description_on(d: &Description, set: &SetSpec, checkpoints: &[Nat], budget: Budget) -> EvalReport {
    let window = checkpoints.last().copied().unwrap_or(0);
    let mut report = EvalReport {
        window,
        mode: d.mode,
        errors: Vec::new(),
        agreements: Vec::new(),
        unresolved: Vec::new(),
        domain_profile: DensityProfile::default(),
        agreement_profile: DensityProfile::default(),
        error_profile: DensityProfile::default(),
        violations: Vec::new(),
    };
    let mut answered = Vec::new();
    for n in 0..window {
        let answer = d.answer(n, budget);
        if answer.bit().is_some() {
            answered.push(n);
        }
        let Some(truth) = set.membership(n, budget).as_bool() else {
            report.unresolved.push(n);
            continue;
        };
        let (error, violation) = classify(d.mode, answer, truth);
        if error {
            report.errors.push(n);
        } else {
            report.agreements.push(n);
        }
        if let Some(kind) = violation {
            report.violations.push(Violation { n, kind });
        }
    }
    report.domain_profile = DensityProfile::from_sorted_values(checkpoints, &answered);
    report.agreement_profile = DensityProfile::from_sorted_values(checkpoints, &report.agreements);
    report.error_profile = DensityProfile::from_sorted_values(checkpoints, &report.errors);
    report
}

/// Whether a point is an error, and which promise of the mode it breaks.
fn classify(mode: Mode, answer: Answer, truth: bool) -> (bool, Option<ViolationKind>) {
    use ViolationKind::*;
    match (answer.bit(), answer) {
        (Some(b), _) => {
            let wrong = b != truth;
            let hard = wrong && matches!(mode, Mode::Generic | Mode::EffectiveDense);
            (wrong, hard.then_some(WrongAnswer))
        }
        (None, Answer::Box) => (true, (mode != Mode::EffectiveDense).then_some(UnexpectedBox)),
        (None, _) => (true, matches!(mode, Mode::Coarse | Mode::EffectiveDense).then_some(Diverged)),
    }
}

/// Error set of a description under a permutation family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntrinsicRow {
    pub name: String,
    pub profile: DensityProfile,
    pub max_tail: Option<Witness>,
    pub verdict: SmallnessVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntrinsicReport {
    pub eval: EvalReport,
    /// The error set used for the images: structural when the description's
    /// shape determines it and that matches the window, otherwise the window's
    /// explicit error list.
    pub error_set: SetSpec,
    pub structural: bool,
    pub rows: Vec<IntrinsicRow>,
}

pub fn intrinsic_report(
    set: &SetSpec,
    d: &Description,
    perms: &[PermSpec],
    opts: &SmallnessOptions,
) -> IntrinsicReport {
    let eval = evaluate_description(d, set, opts.window, opts.budget);
    let explicit = SetExpr::Window { inner: Arc::new(SetExpr::finite(eval.errors.iter().copied())), below: opts.window };
    let structural = d.expr.structural_errors(set.expr()).filter(|e| {
        let spec = SetSpec::new("errors", e.clone());
        let on_window: Vec<Nat> = (0..opts.window).filter(|&n| spec.membership(n, opts.budget) == Verdict::In).collect();
        eval.unresolved.is_empty() && on_window == eval.errors
    });
    let is_structural = structural.is_some();
    let error_set = SetSpec::new(alloc::format!("errors({})", d.name()), structural.unwrap_or(explicit));
    let family: Vec<Mapping> = perms.iter().cloned().map(Mapping::Perm).collect();
    let smallness = smallness_report(&error_set, &family, opts);
    let rows = smallness
        .rows
        .into_iter()
        .map(|r| IntrinsicRow { name: r.name, profile: r.profile, max_tail: r.max_tail, verdict: r.verdict })
        .chain(smallness.excluded.into_iter().map(|name| IntrinsicRow {
            name: name.to_string(),
            profile: DensityProfile::default(),
            max_tail: None,
            verdict: SmallnessVerdict::Inconclusive,
        }))
        .collect();
    IntrinsicReport { eval, error_set, structural: is_structural, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ratio, DEFAULT_BUDGET};

    fn partition_holds(r: &EvalReport) -> bool {
        let mut all: Vec<Nat> = r.errors.iter().chain(&r.agreements).chain(&r.unresolved).copied().collect();
        all.sort_unstable();
        all == (0..r.window).collect::<Vec<_>>()
    }

    #[test]
    fn exact_description_has_no_errors() {
        for mode in [Mode::Generic, Mode::Coarse, Mode::Dense, Mode::EffectiveDense] {
            let d = Description::characteristic(&SetSpec::evens(), mode);
            let r = evaluate_description(&d, &SetSpec::evens(), 50, DEFAULT_BUDGET);
            assert!(r.errors.is_empty() && r.is_valid());
            assert!(r.agreement_profile.values.iter().all(|v| *v == ratio(1, 1)));
            assert!(partition_holds(&r));
        }
    }

    #[test]
    fn constant_one_on_evens_in_coarse_mode() {
        let d = Description::new("one", Mode::Coarse, DescExpr::Constant(Answer::One));
        let r = evaluate_description(&d, &SetSpec::evens(), 10, DEFAULT_BUDGET);
        assert_eq!(r.errors, [1, 3, 5, 7, 9]);
        assert_eq!(r.agreement_profile.value_at(10), Some(ratio(1, 2)));
        assert!(r.is_valid());
    }

    #[test]
    fn violations_by_mode() {
        let wrong = Description::new("one", Mode::Generic, DescExpr::Constant(Answer::One));
        let r = evaluate_description(&wrong, &SetSpec::evens(), 4, DEFAULT_BUDGET);
        assert_eq!(r.witness(), Some(Violation { n: 1, kind: ViolationKind::WrongAnswer }));
        let div = Description::new("never", Mode::Coarse, DescExpr::Constant(Answer::Diverged));
        let r = evaluate_description(&div, &SetSpec::evens(), 4, DEFAULT_BUDGET);
        assert_eq!(r.witness(), Some(Violation { n: 0, kind: ViolationKind::Diverged }));
        let dense = Description::new("never", Mode::Dense, DescExpr::Constant(Answer::Diverged));
        assert!(evaluate_description(&dense, &SetSpec::evens(), 4, DEFAULT_BUDGET).is_valid());
    }

    #[test]
    fn combine_total_fills_divergence_with_zero() {
        let partial = Description::new(
            "partial",
            Mode::Generic,
            DescExpr::DivergeOn {
                set: Arc::new(SetExpr::Factorials { from: 2 }),
                otherwise: Arc::new(DescExpr::Indicator(Arc::new(SetExpr::evens()))),
            },
        );
        let total = combine_total(&partial, DEFAULT_BUDGET);
        let r = evaluate_description(&total, &SetSpec::evens(), 200, DEFAULT_BUDGET);
        // Only even factorials are missed: 2, 6, 24, 120.
        assert_eq!(r.errors, [2, 6, 24, 120]);
        let evens_no_fact = SetSpec::new(
            "evens_no_fact",
            SetExpr::intersection(SetExpr::evens(), SetExpr::complement(SetExpr::Factorials { from: 2 })),
        );
        let r = evaluate_description(&total, &evens_no_fact, 200, DEFAULT_BUDGET);
        assert!(r.errors.is_empty());
    }
}
