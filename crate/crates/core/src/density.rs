//! Exact partial densities, checkpoint profiles and windowed smallness reports.
//!
//! Upper and lower density are never claimed. Profiles report `ρ_n` at chosen
//! checkpoints, extrema are taken over a finite tail with witnesses, and a
//! smallness verdict is one of three fixed outcomes.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use crate::arith::factorial;
use crate::set_calculus::{Mapping, SetSpec, Verdict};
use crate::{ratio, Budget, Density, Nat, DEFAULT_BUDGET};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DensityError {
    #[error("partial density needs n >= 1")]
    ZeroWindow,
    #[error("checkpoint {position} is not positive and strictly above the previous one")]
    BadSchedule { position: usize },
    #[error("no checkpoint at or above tail start {tail_start}")]
    EmptyTail { tail_start: Nat },
    #[error("schedule {0} does not fit in 64-bit checkpoints")]
    ScheduleOverflow(String),
    #[error("unrecognised schedule {0:?}; expected upto:N, factorials:K, alternating:K or a comma list")]
    UnknownSchedule(String),
}

/// `ρ_n(S)` with the count of unresolved points; zero unresolved certifies it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartialDensity {
    pub n: Nat,
    pub count: Nat,
    pub unresolved: Nat,
    pub value: Density,
}

pub fn partial_density(set: &SetSpec, n: Nat, budget: Budget) -> Result<PartialDensity, DensityError> {
    if n == 0 {
        return Err(DensityError::ZeroWindow);
    }
    let (mut count, mut unresolved) = (0, 0);
    for k in 0..n {
        match set.membership(k, budget) {
            Verdict::In => count += 1,
            Verdict::Out => {}
            Verdict::Unknown => unresolved += 1,
        }
    }
    Ok(PartialDensity { n, count, unresolved, value: ratio(count, n) })
}

/// `(n, |A↾n|, ρ_n)` at each checkpoint, with unresolved counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DensityProfile {
    pub checkpoints: Vec<Nat>,
    pub counts: Vec<Nat>,
    pub unresolved: Vec<Nat>,
    pub values: Vec<Density>,
}

impl DensityProfile {
    /// Count `In` verdicts below each checkpoint. Checkpoints must be
    /// positive and strictly increasing.
    pub fn tally(checkpoints: &[Nat], mut member: impl FnMut(Nat) -> Verdict) -> Self {
        let mut profile = DensityProfile::default();
        let (mut k, mut count, mut unresolved) = (0, 0, 0);
        for &n in checkpoints {
            while k < n {
                match member(k) {
                    Verdict::In => count += 1,
                    Verdict::Out => {}
                    Verdict::Unknown => unresolved += 1,
                }
                k += 1;
            }
            profile.push(n, count, unresolved);
        }
        profile
    }

    /// Profile from a sorted set of values, all resolved.
    pub fn from_sorted_values(checkpoints: &[Nat], values: &[Nat]) -> Self {
        let mut profile = DensityProfile::default();
        for &n in checkpoints {
            profile.push(n, values.partition_point(|&v| v < n) as Nat, 0);
        }
        profile
    }

    fn push(&mut self, n: Nat, count: Nat, unresolved: Nat) {
        self.checkpoints.push(n);
        self.counts.push(count);
        self.unresolved.push(unresolved);
        self.values.push(ratio(count, n));
    }

    pub fn len(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checkpoints.is_empty()
    }

    pub fn value_at(&self, n: Nat) -> Option<Density> {
        self.checkpoints.binary_search(&n).ok().map(|i| self.values[i])
    }

    pub fn count_at(&self, n: Nat) -> Option<Nat> {
        self.checkpoints.binary_search(&n).ok().map(|i| self.counts[i])
    }

    /// Every checkpoint resolved.
    pub fn is_exact(&self) -> bool {
        self.unresolved.iter().all(|&u| u == 0)
    }
}

/// Built-in checkpoint schedules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// `1, 2, ..., n`.
    UpTo(Nat),
    /// `2!, 3!, ..., (k+1)!`.
    Factorials(Nat),
    /// `(2j+1)!, (2j+2)!` for `j < k`, the alternating high/low checkpoints.
    Alternating(Nat),
    Explicit(Vec<Nat>),
}

impl Schedule {
    pub fn checkpoints(&self) -> Result<Vec<Nat>, DensityError> {
        let overflow = || DensityError::ScheduleOverflow(self.to_string());
        let points = match self {
            Schedule::UpTo(n) => (1..=*n).collect(),
            Schedule::Factorials(k) => (2..k + 2).map(|j| factorial(j).ok_or_else(overflow)).collect::<Result<_, _>>()?,
            Schedule::Alternating(k) => {
                let mut v = Vec::new();
                for j in 0..*k {
                    v.push(factorial(2 * j + 1).ok_or_else(overflow)?);
                    v.push(factorial(2 * j + 2).ok_or_else(overflow)?);
                }
                v
            }
            Schedule::Explicit(v) => v.clone(),
        };
        validate_schedule(&points)?;
        Ok(points)
    }
}

impl core::fmt::Display for Schedule {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Schedule::UpTo(n) => write!(f, "upto:{n}"),
            Schedule::Factorials(k) => write!(f, "factorials:{k}"),
            Schedule::Alternating(k) => write!(f, "alternating:{k}"),
            Schedule::Explicit(v) => {
                for (i, n) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{n}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Schedule {
    type Err = DensityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || DensityError::UnknownSchedule(s.to_string());
        let num = |t: &str| t.trim().parse::<Nat>().map_err(|_| unknown());
        if let Some((tag, arg)) = s.split_once(':') {
            let k = num(arg)?;
            return match tag.trim() {
                "upto" => Ok(Schedule::UpTo(k)),
                "factorials" => Ok(Schedule::Factorials(k)),
                "alternating" | "paper" => Ok(Schedule::Alternating(k)),
                _ => Err(unknown()),
            };
        }
        let points = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        validate_schedule(&points)?;
        Ok(Schedule::Explicit(points))
    }
}

pub fn validate_schedule(points: &[Nat]) -> Result<(), DensityError> {
    let mut prev = 0;
    for (position, &n) in points.iter().enumerate() {
        if n <= prev {
            return Err(DensityError::BadSchedule { position });
        }
        prev = n;
    }
    Ok(())
}

pub fn density_profile(set: &SetSpec, schedule: &[Nat], budget: Budget) -> Result<DensityProfile, DensityError> {
    validate_schedule(schedule)?;
    Ok(DensityProfile::tally(schedule, |k| set.membership(k, budget)))
}

/// A checkpoint and its exact density.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Witness {
    pub n: Nat,
    pub value: Density,
}

/// Smallest and largest `ρ_n` over the tail of a profile; ties go to the
/// earliest checkpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Extrema {
    pub min: Witness,
    pub max: Witness,
}

pub fn empirical_extrema(profile: &DensityProfile, tail_start: Nat) -> Result<Extrema, DensityError> {
    let mut tail = profile
        .checkpoints
        .iter()
        .zip(&profile.values)
        .filter(|(&n, _)| n >= tail_start)
        .map(|(&n, &value)| Witness { n, value });
    let first = tail.next().ok_or(DensityError::EmptyTail { tail_start })?;
    let (mut min, mut max) = (first, first);
    for w in tail {
        if w.value < min.value {
            min = w;
        }
        if w.value > max.value {
            max = w;
        }
    }
    Ok(Extrema { min, max })
}

/// Fixed verdict vocabulary for windowed smallness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmallnessVerdict {
    /// Every tail checkpoint is exact and below the threshold.
    ConsistentWithDensityZero,
    /// The first exact tail checkpoint at or above the threshold.
    RefutedOnWindow { witness: Witness },
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallnessRow {
    pub name: String,
    pub window: Nat,
    pub tail_start: Nat,
    /// Checkpoints below this bound have exact counts.
    pub certified_below: Nat,
    pub max_tail: Option<Witness>,
    pub min_tail: Option<Witness>,
    pub profile: DensityProfile,
    pub verdict: SmallnessVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallnessReport {
    pub set: String,
    pub rows: Vec<SmallnessRow>,
    /// Oracle-backed permutations left out because the options did not admit them.
    pub excluded: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmallnessOptions {
    pub window: Nat,
    /// Defaults to `⌈window / 10⌉`.
    pub tail_start: Option<Nat>,
    pub threshold: Density,
    pub budget: Budget,
    pub admit_oracle_backed: bool,
}

impl SmallnessOptions {
    pub fn new(window: Nat) -> Self {
        SmallnessOptions {
            window,
            tail_start: None,
            threshold: ratio(1, 10),
            budget: DEFAULT_BUDGET,
            admit_oracle_backed: false,
        }
    }

    pub fn tail_start(&self) -> Nat {
        self.tail_start.unwrap_or_else(|| self.window.div_ceil(10))
    }
}

/// Profile of each image `f(S)` on `[1, window]`, classified against the threshold.
pub fn smallness_report(set: &SetSpec, family: &[Mapping], opts: &SmallnessOptions) -> SmallnessReport {
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    let checkpoints: Vec<Nat> = (1..=opts.window).collect();
    for mapping in family {
        if let Mapping::Perm(p) = mapping {
            if p.is_oracle_backed() && !opts.admit_oracle_backed {
                excluded.push(p.name().to_string());
                continue;
            }
        }
        let image = mapping.image_prefix(set, opts.window, opts.window, opts.budget);
        let values: Vec<Nat> = image.values.iter().copied().collect();
        let mut profile = DensityProfile::from_sorted_values(&checkpoints, &values);
        for (i, &n) in profile.checkpoints.iter().enumerate() {
            profile.unresolved[i] = image.unresolved.iter().filter(|&&u| u < n).count() as Nat;
        }
        rows.push(classify(mapping.name(), opts, image.certified_below, profile));
    }
    SmallnessReport { set: set.name().to_string(), rows, excluded }
}

fn classify(name: &str, opts: &SmallnessOptions, certified_below: Nat, profile: DensityProfile) -> SmallnessRow {
    let tail_start = opts.tail_start();
    let extrema = empirical_extrema(&profile, tail_start).ok();
    let tail: Vec<Witness> = profile
        .checkpoints
        .iter()
        .zip(&profile.values)
        .filter(|(&n, _)| n >= tail_start)
        .map(|(&n, &value)| Witness { n, value })
        .collect();
    let exact = |w: &Witness| w.n <= certified_below;
    let refuting = tail.iter().find(|w| exact(w) && w.value >= opts.threshold).copied();
    let verdict = match refuting {
        Some(witness) => SmallnessVerdict::RefutedOnWindow { witness },
        None if !tail.is_empty() && tail.iter().all(exact) => SmallnessVerdict::ConsistentWithDensityZero,
        None => SmallnessVerdict::Inconclusive,
    };
    SmallnessRow {
        name: name.to_string(),
        window: opts.window,
        tail_start,
        certified_below,
        max_tail: extrema.map(|e| e.max),
        min_tail: extrema.map(|e| e.min),
        profile,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set_calculus::{FuncSpec, PermSpec};

    #[test]
    fn partial_density_examples() {
        assert_eq!(partial_density(&SetSpec::evens(), 10, 10).unwrap().value, ratio(1, 2));
        assert_eq!(partial_density(&SetSpec::empty(), 7, 10).unwrap().value, ratio(0, 1));
        assert_eq!(partial_density(&SetSpec::evens(), 0, 10), Err(DensityError::ZeroWindow));
    }

    #[test]
    fn profile_examples() {
        let p = density_profile(&SetSpec::odds(), &[2, 4, 8], 10).unwrap();
        assert_eq!(p.values, [ratio(1, 2); 3]);
        let sched = Schedule::Factorials(3).checkpoints().unwrap();
        assert_eq!(sched, [2, 6, 24]);
        let p = density_profile(&SetSpec::factorials(), &sched, DEFAULT_BUDGET).unwrap();
        assert_eq!(p.counts, [0, 1, 2]);
        assert_eq!(p.values, [ratio(0, 1), ratio(1, 6), ratio(1, 12)]);
        assert!(density_profile(&SetSpec::odds(), &[2, 2], 10).is_err());
    }

    #[test]
    fn schedules_parse() {
        assert_eq!("upto:3".parse::<Schedule>().unwrap().checkpoints().unwrap(), [1, 2, 3]);
        assert_eq!("paper:2".parse::<Schedule>().unwrap().checkpoints().unwrap(), [1, 2, 6, 24]);
        assert_eq!("alternating:1".parse::<Schedule>(), Ok(Schedule::Alternating(1)));
        assert_eq!("5,9".parse::<Schedule>().unwrap(), Schedule::Explicit(alloc::vec![5, 9]));
        assert!("9,5".parse::<Schedule>().is_err());
        assert!("weird:1".parse::<Schedule>().is_err());
        assert!(Schedule::Factorials(25).checkpoints().is_err());
    }

    #[test]
    fn extrema_examples() {
        let p = density_profile(&SetSpec::odds(), &[2, 4, 8], 10).unwrap();
        let e = empirical_extrema(&p, 0).unwrap();
        assert_eq!((e.min.value, e.max.value), (ratio(1, 2), ratio(1, 2)));
        let p = density_profile(&SetSpec::empty(), &[1, 5], 10).unwrap();
        let e = empirical_extrema(&p, 0).unwrap();
        assert_eq!((e.min.value, e.max.value), (ratio(0, 1), ratio(0, 1)));
        assert_eq!(empirical_extrema(&p, 6), Err(DensityError::EmptyTail { tail_start: 6 }));
    }

    #[test]
    fn smallness_examples() {
        let opts = SmallnessOptions::new(720);
        let fam = [Mapping::Func(FuncSpec::identity())];
        let r = smallness_report(&SetSpec::factorials(), &fam, &opts);
        assert_eq!(r.rows[0].verdict, SmallnessVerdict::ConsistentWithDensityZero);
        let r = smallness_report(&SetSpec::evens(), &fam, &opts);
        assert!(matches!(
            r.rows[0].verdict,
            SmallnessVerdict::RefutedOnWindow { witness } if witness.value == ratio(1, 2)
        ));
        let swap = Mapping::Perm(PermSpec::factorial_swap(&SetSpec::factorials()));
        let r = smallness_report(&SetSpec::factorials(), &[swap], &opts);
        assert!(matches!(r.rows[0].verdict, SmallnessVerdict::RefutedOnWindow { .. }));
    }
}
