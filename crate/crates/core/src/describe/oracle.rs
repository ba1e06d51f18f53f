//! Oracle machines reading the graph of a permutation, and the search that
//! turns an oracle description into an oracle-free one.
//!
//! Oracles are bit strings over the Cantor pairing: bit `pair(x, y)` is set
//! when the encoded function maps `x` to `y` (see [`crate::arith::pair`]).
//! A machine run on a finite string diverges as soon as it queries a position
//! past the end of the string.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::arith::{pair, unpair};
use crate::budget::{Halt, Meter};
use crate::set_calculus::{SetSpec, Verdict};
use crate::{Budget, Nat};

/// Built-in oracle machines. No arbitrary code is loaded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleMachine {
    /// Outputs `value` without reading the oracle.
    Constant { value: Nat },
    /// On input `k`, scans `x = 0, 1, ...` for a set bit at `pair(x, k)` and
    /// outputs `set(x)`. With the graph of `π` as oracle this is the
    /// characteristic function of `π(set)`.
    Echo { set: SetSpec },
    /// Like `Echo`, but diverges on inputs below `refuse_below` and first
    /// reads `extra_reads` bits of row `k` whose values it ignores.
    MixedEcho { set: SetSpec, refuse_below: Nat, extra_reads: Nat },
    /// Outputs the bit at `pair(k, column)`.
    CopyBit { column: Nat },
}

/// One run of a machine: its output (if it halted) and every position it read.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleRun {
    pub output: Option<Nat>,
    pub queried: BTreeSet<Nat>,
    pub steps: u64,
}

impl OracleMachine {
    /// Run on a finite oracle string.
    pub fn run(&self, oracle: &[bool], input: Nat, budget: Budget) -> OracleRun {
        self.run_with(input, budget, |q| usize::try_from(q).ok().and_then(|i| oracle.get(i).copied()))
    }

    /// Run against an oracle given as a function. `None` means the bit is not
    /// available, and the run diverges there.
    pub fn run_with(&self, input: Nat, budget: Budget, mut oracle: impl FnMut(Nat) -> Option<bool>) -> OracleRun {
        let mut meter = Meter::new(budget);
        let mut queried = BTreeSet::new();
        let output = self.exec(input, &mut meter, &mut |q| {
            queried.insert(q);
            oracle(q)
        });
        OracleRun { output: output.ok().flatten(), queried, steps: budget - meter.remaining() }
    }

    fn exec(
        &self,
        k: Nat,
        meter: &mut Meter,
        query: &mut dyn FnMut(Nat) -> Option<bool>,
    ) -> Result<Option<Nat>, Halt> {
        meter.tick()?;
        match self {
            OracleMachine::Constant { value } => Ok(Some(*value)),
            OracleMachine::Echo { set } => echo(set, k, meter, query),
            OracleMachine::MixedEcho { set, refuse_below, extra_reads } => {
                if k < *refuse_below {
                    return Ok(None);
                }
                for j in 0..*extra_reads {
                    meter.tick()?;
                    let Some(pos) = pair(k, j) else { return Ok(None) };
                    if query(pos).is_none() {
                        return Ok(None);
                    }
                }
                echo(set, k, meter, query)
            }
            OracleMachine::CopyBit { column } => {
                let Some(pos) = pair(k, *column) else { return Ok(None) };
                Ok(query(pos).map(Nat::from))
            }
        }
    }
}

fn echo(
    set: &SetSpec,
    k: Nat,
    meter: &mut Meter,
    query: &mut dyn FnMut(Nat) -> Option<bool>,
) -> Result<Option<Nat>, Halt> {
    let mut x = 0;
    loop {
        meter.tick()?;
        let Some(pos) = pair(x, k) else { return Ok(None) };
        match query(pos) {
            None => return Ok(None),
            Some(false) => x += 1,
            Some(true) => {
                return Ok(match set.expr().decide(x, meter)? {
                    Verdict::In => Some(1),
                    Verdict::Out => Some(0),
                    Verdict::Unknown => None,
                })
            }
        }
    }
}

/// Whether `sigma` is an initial segment of the graph of an injective partial
/// function: no row and no column carries two set bits.
pub fn is_injective_graph_prefix(sigma: &[bool]) -> bool {
    let (mut rows, mut cols) = (BTreeSet::new(), BTreeSet::new());
    sigma.iter().enumerate().filter(|(_, &b)| b).all(|(p, _)| {
        let (x, y) = unpair(p as Nat);
        rows.insert(x) && cols.insert(y)
    })
}

/// The finite partial function whose graph is `sigma` followed by zeros.
pub fn graph_function(sigma: &[bool]) -> BTreeMap<Nat, Nat> {
    sigma.iter().enumerate().filter(|(_, &b)| b).map(|(p, _)| unpair(p as Nat)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollapseMode {
    /// Accept any halting answer.
    Convergence,
    /// Accept only answers 0 and 1.
    Decisive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapseWitness {
    /// The first qualifying string in (length, lexicographic) order.
    pub sigma: Vec<bool>,
    /// `f_σ(n)`, the input handed to the machine.
    pub image: Nat,
    pub answer: Nat,
    /// Oracle positions the run read.
    pub used: BTreeSet<Nat>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapseResult {
    /// `In` for answer 1, `Out` for 0, `Unknown` otherwise or when nothing was found.
    pub verdict: Verdict,
    pub witness: Option<CollapseWitness>,
    /// The budget ran out before the search space was covered.
    pub exhausted: bool,
}

/// Search strings `σ` of length at most `sigma_bound`, in order of length and
/// then lexicographically, that are injective graph prefixes with `n` in the
/// domain of `f_σ` and on which the machine halts at `f_σ(n)` reading only
/// bits of `σ`. Returns the machine's answer on the first such `σ`.
///
/// The search walks the machine's query tree: bits it never reads are 0 in
/// the lexicographically least string, so only queried bits branch.
pub fn oracle_collapse(
    machine: &OracleMachine,
    n: Nat,
    sigma_bound: Nat,
    budget: Budget,
    mode: CollapseMode,
) -> CollapseResult {
    let mut search = Search { machine, bound: sigma_bound, mode, meter: Meter::new(budget), best: None };
    let mut exhausted = false;
    let mut y = 0;
    while let Some(p) = pair(n, y).filter(|&p| p < sigma_bound) {
        let assign: BTreeMap<Nat, bool> = [(p, true)].into_iter().collect();
        if search.explore(y, p, assign).is_err() {
            exhausted = true;
            break;
        }
        y += 1;
    }
    let witness = if exhausted { None } else { search.best.map(|(_, w)| w) };
    let verdict = match witness.as_ref().map(|w| w.answer) {
        Some(1) => Verdict::In,
        Some(0) => Verdict::Out,
        _ => Verdict::Unknown,
    };
    CollapseResult { verdict, witness, exhausted }
}

struct Search<'a> {
    machine: &'a OracleMachine,
    bound: Nat,
    mode: CollapseMode,
    meter: Meter,
    best: Option<(usize, CollapseWitness)>,
}

impl Search<'_> {
    fn explore(&mut self, y: Nat, p: Nat, assign: BTreeMap<Nat, bool>) -> Result<(), Halt> {
        self.meter.tick()?;
        let mut missing = None;
        let bound = self.bound;
        let run = self.machine.run_with(y, self.meter.remaining(), |q| {
            if q >= bound {
                return None;
            }
            let bit = assign.get(&q).copied();
            if bit.is_none() {
                missing = Some(q);
            }
            bit
        });
        self.meter.charge(run.steps)?;
        let reach = run.queried.iter().copied().chain([p]).max().unwrap_or(p);
        if let Some((len, _)) = &self.best {
            if reach as usize + 1 > *len {
                return Ok(());
            }
        }
        if let Some(answer) = run.output {
            if self.mode == CollapseMode::Decisive && answer > 1 {
                return Ok(());
            }
            let len = reach as usize + 1;
            let mut sigma = alloc::vec![false; len];
            for (&q, &b) in &assign {
                if (q as usize) < len {
                    sigma[q as usize] = b;
                }
            }
            let better = match &self.best {
                None => true,
                Some((best_len, w)) => (len, &sigma) < (*best_len, &w.sigma),
            };
            if better {
                self.best = Some((len, CollapseWitness { sigma, image: y, answer, used: run.queried }));
            }
            return Ok(());
        }
        let Some(q) = missing else { return Ok(()) };
        let mut zero = assign.clone();
        zero.insert(q, false);
        self.explore(y, p, zero)?;
        if consistent_one(&assign, q) {
            let mut one = assign;
            one.insert(q, true);
            self.explore(y, p, one)?;
        }
        Ok(())
    }
}

fn consistent_one(assign: &BTreeMap<Nat, bool>, q: Nat) -> bool {
    let (x, y) = unpair(q);
    assign.iter().filter(|(_, &b)| b).all(|(&p, _)| {
        let (px, py) = unpair(p);
        px != x && py != y
    })
}
