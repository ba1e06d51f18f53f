use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use super::{FuncSpec, Mapping, SetExpr, SetKind, SetSpec, SpecWarning, Verdict};
use crate::density::DensityProfile;
use crate::{ratio, Budget, Density, Nat};

/// Verdicts for `[0, N)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prefix {
    pub bits: Vec<Verdict>,
    pub unknown: usize,
}

impl Prefix {
    pub fn count_in(&self) -> usize {
        self.bits.iter().filter(|&&v| v == Verdict::In).count()
    }
}

/// Membership of every `k < n`, each with its own `budget`.
pub fn prefix(set: &SetSpec, n: Nat, budget: Budget) -> Prefix {
    let bits: Vec<Verdict> = (0..n).map(|k| set.membership(k, budget)).collect();
    let unknown = bits.iter().filter(|v| !v.is_resolved()).count();
    Prefix { bits, unknown }
}

/// Image of a set on a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImagePrefix {
    /// Resolved image values below the bound.
    pub values: BTreeSet<Nat>,
    /// Inputs (for a function) or values (for a permutation) whose status was
    /// not resolved.
    pub unresolved: Vec<Nat>,
    /// Counts of `values` below this bound are exact.
    pub certified_below: Nat,
}

impl ImagePrefix {
    pub fn count_below(&self, n: Nat) -> Nat {
        self.values.range(..n).count() as Nat
    }
}

/// `{f(a) : a ∈ S ∩ [0, n), f(a) < m}`.
///
/// Counts below `certified_below` are exact for the image of all of `S`: that
/// needs `f` expanding (so inputs at or above `n` land at or above `n`) and
/// every smaller input resolved.
pub fn image_prefix(f: &FuncSpec, set: &SetSpec, n: Nat, m: Nat, budget: Budget) -> ImagePrefix {
    let mut values = BTreeSet::new();
    let mut unresolved = Vec::new();
    for a in 0..n {
        match set.membership(a, budget) {
            Verdict::Out => continue,
            Verdict::Unknown => unresolved.push(a),
            Verdict::In => match f.value(a, budget) {
                Some(v) if v < m => {
                    values.insert(v);
                }
                Some(_) => {}
                None => unresolved.push(a),
            },
        }
    }
    let certified_below = if f.claims().expanding {
        unresolved.first().copied().unwrap_or(n).min(n).min(m)
    } else {
        0
    };
    ImagePrefix { values, unresolved, certified_below }
}

/// `π(S) ∩ [0, m)` read off the inverse, so the count does not depend on how
/// far the forward window reaches.
pub(crate) fn perm_image_prefix(pi: &super::PermSpec, set: &SetSpec, m: Nat, budget: Budget) -> ImagePrefix {
    let mut values = BTreeSet::new();
    let mut unresolved = Vec::new();
    let image = pi.image(set);
    for v in 0..m {
        match image.membership(v, budget) {
            Verdict::In => {
                values.insert(v);
            }
            Verdict::Out => {}
            Verdict::Unknown => unresolved.push(v),
        }
    }
    let certified_below = unresolved.first().copied().unwrap_or(m);
    ImagePrefix { values, unresolved, certified_below }
}

impl Mapping {
    /// Image of `set` below `m`; functions look at inputs below `n`.
    pub fn image_prefix(&self, set: &SetSpec, n: Nat, m: Nat, budget: Budget) -> ImagePrefix {
        match self {
            Mapping::Func(f) => image_prefix(f, set, n, m, budget),
            Mapping::Perm(p) => perm_image_prefix(p, set, m, budget),
        }
    }
}

fn merged_warnings(a: &SetSpec, b: &SetSpec) -> Vec<SpecWarning> {
    a.warnings().iter().chain(b.warnings()).copied().collect()
}

/// `{2n : n ∈ A} ∪ {2n+1 : n ∈ B}`.
pub fn join(a: &SetSpec, b: &SetSpec) -> SetSpec {
    SetSpec::new(
        format!("join({},{})", a.name(), b.name()),
        SetExpr::Join(a.expr_arc().clone(), b.expr_arc().clone()),
    )
    .with_kind(a.kind().max(b.kind()))
    .with_warnings(merged_warnings(a, b))
}

/// Complement. An enumerable input gives an oracle-backed result carrying
/// [`SpecWarning::ComplementOfEnumerable`].
pub fn complement(set: &SetSpec) -> SetSpec {
    let mut out = SetSpec::new(format!("complement({})", set.name()), SetExpr::Complement(set.expr_arc().clone()))
        .with_warnings(set.warnings().iter().copied());
    match set.kind() {
        SetKind::Decidable => {}
        SetKind::Enumerable => {
            out = out.with_kind(SetKind::OracleBacked).with_warnings([SpecWarning::ComplementOfEnumerable]);
        }
        SetKind::OracleBacked => out = out.with_kind(SetKind::OracleBacked),
    }
    out
}

pub fn union(a: &SetSpec, b: &SetSpec) -> SetSpec {
    SetSpec::new(
        format!("union({},{})", a.name(), b.name()),
        SetExpr::Union(a.expr_arc().clone(), b.expr_arc().clone()),
    )
    .with_kind(a.kind().max(b.kind()))
    .with_warnings(merged_warnings(a, b))
}

pub fn intersection(a: &SetSpec, b: &SetSpec) -> SetSpec {
    SetSpec::new(
        format!("intersection({},{})", a.name(), b.name()),
        SetExpr::Intersection(a.expr_arc().clone(), b.expr_arc().clone()),
    )
    .with_kind(a.kind().max(b.kind()))
    .with_warnings(merged_warnings(a, b))
}

/// Collision values of a function on a window and their density profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarInjectivityReport {
    /// Values with more than one preimage in `[0, N)`.
    pub collisions: BTreeSet<Nat>,
    /// Profile of the collision set at `n = 1, ..., max value + 1`.
    pub profile: DensityProfile,
    /// Inputs in `[0, N)` that did not resolve; the report is partial if any.
    pub diverged: Vec<Nat>,
    /// Largest `ρ_n` over the last nine tenths of the profile.
    pub tail_max: Density,
    pub below_threshold: bool,
}

impl StarInjectivityReport {
    pub fn partial(&self) -> bool {
        !self.diverged.is_empty()
    }
}

pub fn star_injectivity_report(f: &FuncSpec, n: Nat, budget: Budget, threshold: Density) -> StarInjectivityReport {
    let mut preimages: BTreeMap<Nat, u32> = BTreeMap::new();
    let mut diverged = Vec::new();
    for x in 0..n {
        match f.value(x, budget) {
            Some(v) => *preimages.entry(v).or_default() += 1,
            None => diverged.push(x),
        }
    }
    let collisions: BTreeSet<Nat> = preimages.iter().filter(|(_, &c)| c > 1).map(|(&v, _)| v).collect();
    let top = preimages.keys().next_back().map_or(1, |&v| v.saturating_add(1));
    let checkpoints: Vec<Nat> = (1..=top).collect();
    let profile = DensityProfile::tally(&checkpoints, |k| Verdict::from_bool(collisions.contains(&k)));
    let tail_start = top.div_ceil(10);
    let tail_max = profile
        .checkpoints
        .iter()
        .zip(&profile.values)
        .filter(|(&c, _)| c >= tail_start)
        .map(|(_, v)| *v)
        .max()
        .unwrap_or(ratio(0, 1));
    StarInjectivityReport { collisions, profile, diverged, tail_max, below_threshold: tail_max < threshold }
}
