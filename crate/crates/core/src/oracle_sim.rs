//! Budgeted replays of halting-problem-assisted constructions: the jump
//! strategy that builds a set whose images are sparse under a finite family,
//! and the diagonal flip on designated elements.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::budget::{Halt, Meter};
use crate::set_calculus::{FuncExpr, Mapping, PermViolation, SetExpr, SetSpec, Verdict};
use crate::{Budget, Nat};

/// Limits for [`jump_strategy`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JumpOptions {
    pub stages: usize,
    /// Step budget for each single evaluation or membership query.
    pub budget: Budget,
    /// Candidates and preimages are searched below this bound.
    pub search_limit: Nat,
    /// Window on which family members are checked before the run.
    pub admission_window: Nat,
}

impl JumpOptions {
    pub fn new(stages: usize) -> Self {
        JumpOptions { stages, budget: 1 << 12, search_limit: 1 << 20, admission_window: 256 }
    }
}

/// Why a family member was left out of the run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rejection {
    /// A permutation failed its round-trip check.
    NotPermutation(PermViolation),
    /// A function sent two inputs to one value.
    NotInjective { first: Nat, second: Nat, value: Nat },
}

/// Status of family member `e` at one stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suitability {
    Suitable,
    /// Only members with index below the stage number are considered.
    NotYetEligible,
    Rejected,
    /// Some input in `[0, k]` did not converge within budget.
    DomainUnresolved { input: Nat },
    /// No preimage of `value` was found within budget.
    RangeUnresolved { value: Nat },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageRecord {
    /// Stages count from 1.
    pub stage: usize,
    pub chosen: Nat,
    pub suitability: Vec<Suitability>,
    pub restraint: Nat,
    pub budget_spent: u64,
}

/// Why the run stopped before the requested number of stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JumpHalt {
    /// Fewer target sets than stages.
    NoTarget { stage: usize },
    /// The target set showed no element above the restraint within budget.
    TargetExhausted { stage: usize, restraint: Nat },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageLog {
    pub rejected: Vec<(usize, Rejection)>,
    pub stages: Vec<StageRecord>,
    pub halted: Option<JumpHalt>,
}

impl StageLog {
    pub fn picks(&self) -> Vec<Nat> {
        self.stages.iter().map(|s| s.chosen).collect()
    }

    /// `k_{s+1} > r_s > k_s` and non-decreasing restraints.
    pub fn is_monotone(&self) -> bool {
        self.stages.iter().all(|s| s.restraint > s.chosen)
            && self.stages.windows(2).all(|w| w[1].chosen > w[0].restraint && w[1].restraint >= w[0].restraint)
    }

    /// Some suitability check ran out of budget, so the run is weaker than the
    /// unbounded construction.
    pub fn under_approximated(&self) -> bool {
        self.stages.iter().flat_map(|s| &s.suitability).any(|v| {
            matches!(v, Suitability::DomainUnresolved { .. } | Suitability::RangeUnresolved { .. })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JumpRun {
    pub set: SetSpec,
    pub log: StageLog,
}

/// One member of the family, evaluated with per-query budgets.
struct Member<'a> {
    mapping: &'a Mapping,
    budget: Budget,
    search_limit: Nat,
}

impl Member<'_> {
    fn forward(&self, x: Nat, spent: &mut u64) -> Outcome {
        run_outcome(self.mapping.forward().expr(), x, self.budget, spent)
    }

    /// Preimages of every value in `[0, top]`, or the first value without one.
    fn preimages(&self, top: Nat, spent: &mut u64) -> Result<Vec<Nat>, Nat> {
        match self.mapping {
            Mapping::Perm(p) => (0..=top).map(|i| run(p.inverse().expr(), i, self.budget, spent).ok_or(i)).collect(),
            Mapping::Func(f) => {
                let mut found: BTreeMap<Nat, Nat> = BTreeMap::new();
                let mut x = 0;
                while (found.len() as Nat) <= top && x < self.search_limit {
                    if let Some(v) = run(f.expr(), x, self.budget, spent) {
                        if v <= top {
                            found.entry(v).or_insert(x);
                        }
                    }
                    x += 1;
                }
                (0..=top).map(|i| found.get(&i).copied().ok_or(i)).collect()
            }
        }
    }
}

/// A single evaluation: a value, a value too large for 64 bits, or nothing
/// within budget.
enum Outcome {
    Value(Nat),
    Overflow,
    Diverged,
}

fn run_outcome(f: &FuncExpr, x: Nat, budget: Budget, spent: &mut u64) -> Outcome {
    let mut meter = Meter::new(budget);
    let out = f.eval(x, &mut meter);
    *spent += budget - meter.remaining();
    match out {
        Ok(Some(v)) => Outcome::Value(v),
        Err(Halt::Overflow) => Outcome::Overflow,
        Ok(None) | Err(Halt::Exhausted) => Outcome::Diverged,
    }
}

fn run(f: &FuncExpr, x: Nat, budget: Budget, spent: &mut u64) -> Option<Nat> {
    match run_outcome(f, x, budget, spent) {
        Outcome::Value(v) => Some(v),
        Outcome::Overflow | Outcome::Diverged => None,
    }
}

fn admit(mapping: &Mapping, opts: &JumpOptions) -> Result<(), Rejection> {
    match mapping {
        Mapping::Perm(p) => p.check_window(opts.admission_window, opts.budget).map_err(Rejection::NotPermutation),
        Mapping::Func(f) => {
            let mut seen: BTreeMap<Nat, Nat> = BTreeMap::new();
            for x in 0..opts.admission_window {
                if let Some(v) = f.evaluate(x, opts.budget).ok().and_then(|e| e.defined()) {
                    if let Some(first) = seen.insert(v, x) {
                        return Err(Rejection::NotInjective { first, second: x, value: v });
                    }
                }
            }
            Ok(())
        }
    }
}

/// Build `A` one element per stage: stage `t` takes the least element of
/// `targets[t-1]` above the restraint `r_{t-1}` (with `r_0 = 0`).
///
/// Member `e` of the family is suitable at stage `t` when `e < t`, it is
/// defined on `[0, k_t]`, and every value up to `2·max f_e(A_t)` has a
/// preimage, all within budget. Then
/// `r_t = max({k_t} ∪ {f_e^{-1}(i) : e suitable, i <= 2·max f_e(A_t)}) + 1`.
/// Members are indexed by their position in `family`.
pub fn jump_strategy(family: &[Mapping], targets: &[SetSpec], opts: &JumpOptions) -> JumpRun {
    let mut rejected = Vec::new();
    let mut admitted = Vec::with_capacity(family.len());
    for (e, m) in family.iter().enumerate() {
        match admit(m, opts) {
            Ok(()) => admitted.push(true),
            Err(r) => {
                rejected.push((e, r));
                admitted.push(false);
            }
        }
    }
    let mut picks: Vec<Nat> = Vec::new();
    let mut stages = Vec::new();
    let mut halted = None;
    let mut restraint: Nat = 0;
    for t in 1..=opts.stages {
        let Some(target) = targets.get(t - 1) else {
            halted = Some(JumpHalt::NoTarget { stage: t });
            break;
        };
        let chosen = (restraint + 1..restraint.saturating_add(opts.search_limit))
            .find(|&x| target.membership(x, opts.budget) == Verdict::In);
        let Some(k) = chosen else {
            halted = Some(JumpHalt::TargetExhausted { stage: t, restraint });
            break;
        };
        picks.push(k);
        let mut spent = 0;
        let mut next = k;
        let mut suitability = Vec::with_capacity(family.len());
        for (e, mapping) in family.iter().enumerate() {
            let verdict = if !admitted[e] {
                Suitability::Rejected
            } else if e >= t {
                Suitability::NotYetEligible
            } else {
                let member = Member { mapping, budget: opts.budget, search_limit: opts.search_limit };
                match suitable(&member, k, &picks, &mut spent) {
                    Ok(top) => {
                        next = next.max(top);
                        Suitability::Suitable
                    }
                    Err(v) => v,
                }
            };
            suitability.push(verdict);
        }
        restraint = next + 1;
        stages.push(StageRecord { stage: t, chosen: k, suitability, restraint, budget_spent: spent });
    }
    let set = SetSpec::finite(picks.iter().copied()).renamed("jump_strategy");
    JumpRun { set, log: StageLog { rejected, stages, halted } }
}

/// The largest preimage needed by a suitable member, or why it is not.
fn suitable(member: &Member<'_>, k: Nat, picks: &[Nat], spent: &mut u64) -> Result<Nat, Suitability> {
    let mut image_max = 0;
    for x in 0..=k {
        // An overflowing value still converged; it only matters on the picks.
        match member.forward(x, spent) {
            Outcome::Value(v) if picks.contains(&x) => image_max = image_max.max(v),
            Outcome::Value(_) => {}
            Outcome::Overflow if picks.contains(&x) => return Err(Suitability::RangeUnresolved { value: Nat::MAX }),
            Outcome::Overflow => {}
            Outcome::Diverged => return Err(Suitability::DomainUnresolved { input: x }),
        }
    }
    let top = image_max.saturating_mul(2);
    let pre = member.preimages(top, spent).map_err(|value| Suitability::RangeUnresolved { value })?;
    Ok(pre.into_iter().max().unwrap_or(0))
}

/// `π(k_t) > 2·max π(A_{t-1})` for one member at one stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DoublingCheck {
    pub member: usize,
    pub stage: usize,
    pub image: Nat,
    pub previous_max: Nat,
    pub holds: bool,
}

/// Replay the doubling property for every admitted permutation of the family
/// whose values on the picks all resolve: each element added at stage
/// `s + 2` with `s > e` must map above twice the image maximum of `A_{s+1}`.
pub fn doubling_checks(family: &[Mapping], log: &StageLog, budget: Budget) -> Vec<DoublingCheck> {
    let picks = log.picks();
    let mut checks = Vec::new();
    for (e, mapping) in family.iter().enumerate() {
        if !matches!(mapping, Mapping::Perm(_)) || log.rejected.iter().any(|(r, _)| *r == e) {
            continue;
        }
        let mut spent = 0;
        let images: Option<Vec<Nat>> =
            picks.iter().map(|&k| run(mapping.forward().expr(), k, budget, &mut spent)).collect();
        let Some(images) = images else { continue };
        for t in (e + 3)..=picks.len() {
            let previous_max = images[..t - 1].iter().copied().max().unwrap_or(0);
            let image = images[t - 1];
            let holds = image as u128 > 2 * previous_max as u128;
            checks.push(DoublingCheck { member: e, stage: t, image, previous_max, holds });
        }
    }
    checks
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DiagonalError {
    #[error("designated point {point} of index {index} is not in the set")]
    NotInSet { index: usize, point: Nat },
    #[error("designated points must increase with the index (at {index})")]
    NotIncreasing { index: usize },
    #[error("no machine with index {index}")]
    MissingMachine { index: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalRow {
    pub index: usize,
    pub point: Nat,
    /// `None` when the machine did not converge within budget.
    pub machine_output: Option<Nat>,
    pub flipped_to: Option<bool>,
}

impl DiagonalRow {
    /// The machine answers at its point and differs from `B` there.
    pub fn is_witness(&self) -> bool {
        match (self.machine_output, self.flipped_to) {
            (Some(v), Some(b)) => v != Nat::from(b),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagonal {
    pub set: SetSpec,
    pub rows: Vec<DiagonalRow>,
    pub warnings: Vec<String>,
}

/// `B = A` except at each designated `a_e`, where `B(a_e) = 1` if machine `e`
/// answers 0 and `B(a_e) = 0` for any other answer. A machine that does not
/// converge leaves `B(a_e) = A(a_e)` and is reported.
pub fn designated_diagonal(
    a: &SetSpec,
    designated: &[(usize, Nat)],
    machines: &[crate::set_calculus::FuncSpec],
    budget: Budget,
) -> Result<Diagonal, DiagonalError> {
    for (i, &(index, point)) in designated.iter().enumerate() {
        if index >= machines.len() {
            return Err(DiagonalError::MissingMachine { index });
        }
        if a.membership(point, budget) != Verdict::In {
            return Err(DiagonalError::NotInSet { index, point });
        }
        if i > 0 {
            let (prev_index, prev_point) = designated[i - 1];
            if index <= prev_index || point <= prev_point {
                return Err(DiagonalError::NotIncreasing { index });
            }
        }
    }
    let mut points = BTreeMap::new();
    let mut rows = Vec::with_capacity(designated.len());
    let mut warnings = Vec::new();
    for &(index, point) in designated {
        let out = machines[index].evaluate(point, budget).ok().and_then(|e| e.defined());
        let flipped_to = out.map(|v| v == 0);
        match flipped_to {
            Some(b) => {
                points.insert(point, b);
            }
            None => warnings.push(format!("machine {index} did not converge at {point}; B keeps A there")),
        }
        rows.push(DiagonalRow { index, point, machine_output: out, flipped_to });
    }
    let expr = SetExpr::Patch { base: Arc::new(a.expr().clone()), points };
    let set = SetSpec::new(format!("diagonal({})", a.name()), expr).with_kind(a.kind());
    Ok(Diagonal { set, rows, warnings })
}
