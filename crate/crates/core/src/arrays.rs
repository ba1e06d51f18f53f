//! Disjoint strong arrays, principal functions, weak traces built from
//! permutations, and the hypersimple gap construction.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::arith::{factorial, largest_factorial_index};
use crate::budget::Meter;
use crate::set_calculus::{FuncExpr, FuncSpec, Gap, PermSpec, SetExpr, SetSpec, Verdict};
use crate::{Budget, Nat};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ArrayError {
    #[error("cell {index} is empty")]
    EmptyCell { index: usize },
    #[error("cells {first} and {second} share {value}")]
    Overlap { first: usize, second: usize, value: Nat },
    #[error("cells are not separated: max of cell {index} is not below the min of the next")]
    NotNormalized { index: usize },
}

/// Finite list of pairwise disjoint nonempty cells, each sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrongArray {
    cells: Vec<Vec<Nat>>,
}

impl StrongArray {
    pub fn new(cells: Vec<Vec<Nat>>) -> Result<Self, ArrayError> {
        let mut owner: BTreeMap<Nat, usize> = BTreeMap::new();
        let mut sorted = Vec::with_capacity(cells.len());
        for (index, mut cell) in cells.into_iter().enumerate() {
            cell.sort_unstable();
            cell.dedup();
            if cell.is_empty() {
                return Err(ArrayError::EmptyCell { index });
            }
            for &v in &cell {
                if let Some(first) = owner.insert(v, index) {
                    return Err(ArrayError::Overlap { first, second: index, value: v });
                }
            }
            sorted.push(cell);
        }
        Ok(StrongArray { cells: sorted })
    }

    pub fn cells(&self) -> &[Vec<Nat>] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `max(cell n) < min(cell n+1)` for every consecutive pair.
    pub fn is_normalized(&self) -> bool {
        self.cells.windows(2).all(|w| w[0].last() < w[1].first())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized {
    pub array: StrongArray,
    /// Fewer than the requested number of cells qualified.
    pub partial: bool,
}

/// Keep the first cell, then repeatedly the first later cell whose minimum
/// exceeds the maximum of the last kept one.
pub fn normalize_array(g: &StrongArray, count: usize) -> Normalized {
    let mut kept: Vec<Vec<Nat>> = Vec::new();
    for cell in &g.cells {
        if kept.len() == count {
            break;
        }
        if kept.last().is_none_or(|last| last.last() < cell.first()) {
            kept.push(cell.clone());
        }
    }
    let partial = kept.len() < count;
    Normalized { array: StrongArray { cells: kept }, partial }
}

/// The collapse function of a normalized array and its fibre sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collapse {
    /// `f(n) = 2k` on cell `k`, otherwise the least odd value not yet used.
    pub f: FuncSpec,
    /// `|f^{-1}(v)|` for every value `f` takes on the window.
    pub size_witness: FuncSpec,
    pub table: Vec<Nat>,
    /// Beyond the last listed cell, later cells are unknown; values of `f`
    /// are final only below this bound.
    pub certified_below: Nat,
}

pub fn array_collapse(g: &StrongArray, window: Nat) -> Result<Collapse, ArrayError> {
    if let Some(index) = g.cells.windows(2).position(|w| w[0].last() >= w[1].first()) {
        return Err(ArrayError::NotNormalized { index });
    }
    let cell_of: BTreeMap<Nat, Nat> =
        g.cells.iter().enumerate().flat_map(|(k, c)| c.iter().map(move |&v| (v, k as Nat))).collect();
    let mut table = Vec::with_capacity(window as usize);
    let mut next_odd = 1;
    let mut sizes: BTreeMap<Nat, Nat> = BTreeMap::new();
    for n in 0..window {
        let v = match cell_of.get(&n) {
            Some(&k) => 2 * k,
            None => {
                let v = next_odd;
                next_odd += 2;
                v
            }
        };
        table.push(v);
        *sizes.entry(v).or_default() += 0;
    }
    for (k, cell) in g.cells.iter().enumerate() {
        sizes.insert(2 * k as Nat, cell.len() as Nat);
    }
    for v in table.iter().filter(|v| *v % 2 == 1) {
        sizes.insert(*v, 1);
    }
    let certified_below = g.cells.last().and_then(|c| c.last()).map_or(window, |&m| (m + 1).min(window));
    Ok(Collapse {
        f: FuncSpec::new("array_collapse", FuncExpr::table(table.iter().map(|&v| Some(v)))),
        size_witness: FuncSpec::new("size_witness", FuncExpr::Sparse(Arc::new(sizes))),
        table,
        certified_below,
    })
}

/// The search for a principal-function value ran out of budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PrincipalError {
    #[error("the set has fewer than {needed} elements")]
    Missing { needed: Nat },
    #[error("element {index} does not fit in 64 bits")]
    TooLarge { index: Nat },
    #[error("budget ran out after finding {found} elements below {scanned_below}")]
    Exhausted { found: Nat, scanned_below: Nat },
}

/// `p_S(k)`, the `k`-th element of `S` (0-indexed), with `budget` steps in total.
pub fn principal_function(s: &SetSpec, k: Nat, budget: Budget) -> Result<Nat, PrincipalError> {
    use crate::set_calculus::SetExpr as E;
    let closed = matches!(
        s.expr(),
        E::Empty | E::All | E::Periodic { .. } | E::Interval { .. } | E::Finite(_) | E::Factorials { .. }
            | E::Powers { .. } | E::Ruler(_)
    );
    let mut meter = Meter::new(budget);
    if closed {
        return match s.expr().select(k, &mut meter) {
            Ok(crate::set_calculus::Selected::At(v)) => Ok(v),
            Ok(crate::set_calculus::Selected::TooLarge) => Err(PrincipalError::TooLarge { index: k }),
            Ok(_) => Err(PrincipalError::Missing { needed: k + 1 }),
            Err(_) => Err(PrincipalError::Exhausted { found: 0, scanned_below: 0 }),
        };
    }
    let mut found = 0;
    let mut x: Nat = 0;
    loop {
        match s.expr().decide(x, &mut meter) {
            Ok(Verdict::In) => {
                if found == k {
                    return Ok(x);
                }
                found += 1;
            }
            Ok(Verdict::Out) => {}
            Ok(Verdict::Unknown) | Err(_) => return Err(PrincipalError::Exhausted { found, scanned_below: x }),
        }
        x += 1;
    }
}

/// Finite-set-valued function with a size bound per index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub cells: Vec<Vec<Nat>>,
    pub bounds: Vec<Nat>,
}

impl Trace {
    pub fn respects_bounds(&self) -> bool {
        self.cells.iter().zip(&self.bounds).all(|(c, &b)| c.len() as Nat <= b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("inverse of the permutation at {value} did not resolve")]
    Unresolved { value: Nat },
    #[error("{n}! does not fit in 64 bits")]
    TooLarge { n: Nat },
}

/// `cells(n) = π^{-1}([0, n!))` with bound `n!`, for `n <= n_max`.
pub fn weak_trace_from_perm(pi: &PermSpec, n_max: Nat, budget: Budget) -> Result<Trace, TraceError> {
    let top = factorial(n_max).ok_or(TraceError::TooLarge { n: n_max })?;
    let preimages: Vec<Nat> = (0..top)
        .map(|m| pi.inverse().value(m, budget).ok_or(TraceError::Unresolved { value: m }))
        .collect::<Result<_, _>>()?;
    let mut cells = Vec::new();
    let mut bounds = Vec::new();
    for n in 0..=n_max {
        let f = factorial(n).expect("bounded by n_max");
        let mut cell: Vec<Nat> = preimages[..f as usize].to_vec();
        cell.sort_unstable();
        cells.push(cell);
        bounds.push(f);
    }
    Ok(Trace { cells, bounds })
}

/// One checkpoint of the trace inequality `|π(A)↾n| · m! <= (s+m+1) · n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceRow {
    pub n: Nat,
    pub count: Nat,
    /// Largest `m` with `m! <= n`.
    pub m: Nat,
    pub bound_numerator: Nat,
    pub bound_denominator: Nat,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceHitReport {
    /// `(k, p_A(k))` with `π(p_A(k)) < k!` and `π(p_A(k)) < N`.
    pub hits: Vec<(Nat, Nat)>,
    pub s: Nat,
    pub rows: Vec<TraceRow>,
}

impl TraceHitReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Check `ρ_n(π(A)) <= (s+m+1)/m!` for every `n` in `1..=window`.
///
/// `s` counts the hits `p_A(k) ∈ π^{-1}([0, k!))` whose image lies below the
/// window; the remaining elements of `π(A)` below `n` are `p_A(k)` with
/// `k! <= π(p_A(k)) < n`, so `k <= m`.
pub fn trace_hit_report(pi: &PermSpec, a: &SetSpec, window: Nat, budget: Budget) -> Result<TraceHitReport, TraceError> {
    let mut member_below = Vec::with_capacity(window as usize);
    let mut inside: Vec<(Nat, Nat)> = Vec::new();
    for v in 0..window {
        let x = pi.inverse().value(v, budget).ok_or(TraceError::Unresolved { value: v })?;
        let member = a.membership(x, budget) == Verdict::In;
        member_below.push(member);
        if member {
            inside.push((x, v));
        }
    }
    inside.sort_unstable();
    let ranks = ranks_in(a, &inside, budget).ok_or(TraceError::Unresolved { value: window })?;
    let mut hits = Vec::new();
    for (&(x, v), k) in inside.iter().zip(ranks) {
        if factorial(k).is_none_or(|f| v < f) {
            hits.push((k, x));
        }
    }
    hits.sort_unstable();
    let s = hits.len() as Nat;
    let mut rows = Vec::with_capacity(window as usize);
    let mut count = 0;
    for n in 1..=window {
        if member_below[(n - 1) as usize] {
            count += 1;
        }
        let m = largest_factorial_index(n);
        let fm = factorial(m).expect("m! <= n");
        let num = s + m + 1;
        let holds = count as u128 * fm as u128 <= num as u128 * n as u128;
        rows.push(TraceRow { n, count, m, bound_numerator: num, bound_denominator: fm, holds });
    }
    Ok(TraceHitReport { hits, s, rows })
}

/// `|A ∩ [0, x)|` for each `x` of the sorted list, by one membership sweep when
/// the values are small and closed forms otherwise.
fn ranks_in(a: &SetSpec, sorted: &[(Nat, Nat)], budget: Budget) -> Option<Vec<Nat>> {
    const SWEEP_LIMIT: Nat = 1 << 22;
    let top = sorted.last().map_or(0, |p| p.0);
    if top > SWEEP_LIMIT {
        return sorted.iter().map(|&(x, _)| a.expr().count_below(x, &mut Meter::new(budget)).ok().flatten()).collect();
    }
    let mut ranks = Vec::with_capacity(sorted.len());
    let mut count = 0;
    let mut y = 0;
    for &(x, _) in sorted {
        while y < x {
            match a.membership(y, budget) {
                Verdict::In => count += 1,
                Verdict::Out => {}
                Verdict::Unknown => return None,
            }
            y += 1;
        }
        ranks.push(count);
    }
    Some(ranks)
}

/// Limits for [`hypersimple_gaps`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GapOptions {
    pub stages: usize,
    /// Enumeration stages allowed while searching for one gap.
    pub budget: u64,
    /// Step budget for each membership check of the enumeration.
    pub horizon: Budget,
    /// The enumeration only looks at values below this.
    pub value_limit: Nat,
}

impl GapOptions {
    pub fn new(stages: usize) -> Self {
        GapOptions { stages, budget: 1 << 22, horizon: 1 << 12, value_limit: 1 << 26 }
    }
}

/// Why the gap loop stopped early.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GapDiagnostic {
    /// Index of the gap that was not found.
    pub gap: usize,
    pub stages_spent: u64,
    pub enumerated: usize,
    pub enumeration_exhausted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapConstruction {
    pub gaps: Vec<Gap>,
    /// The shifted set; exact below `exact_below`, unresolved from there on.
    pub h: SetSpec,
    /// `H ∪ ⋃_{e ∈ C} [u_e, u_e + m_e]`.
    pub w: SetSpec,
    pub exact_below: Nat,
    /// Enumeration stage at which each gap was fixed.
    pub found_at: Vec<u64>,
    pub partial: Option<GapDiagnostic>,
}

impl GapConstruction {
    /// `n ↦ f(n + Σ_{i<=n} m_i)`.
    pub fn bound_transfer(&self, f: &FuncSpec) -> FuncSpec {
        let widths: Vec<Nat> = self.gaps.iter().map(|g| g.width).collect();
        FuncSpec::new(
            format!("bound_transfer({})", f.name()),
            FuncExpr::GapShift { widths: widths.into(), inner: Arc::new(f.expr().clone()) },
        )
    }

    /// `|H ∩ [0, x)|` for `x <= exact_below`, counted through `C`.
    pub fn h_count_below(&self, c: &SetSpec, x: Nat, budget: Budget) -> Option<Nat> {
        if x > self.exact_below {
            return None;
        }
        let holes: Nat = self
            .gaps
            .iter()
            .map(|g| x.min(g.start + g.width).saturating_sub(g.start))
            .sum();
        c.expr().count_below(x - holes, &mut Meter::new(budget)).ok().flatten()
    }

    /// The gap union listed in order of `e ∈ C`, restricted to constructed gaps.
    pub fn gap_union_enumeration(&self, c: &SetSpec, budget: Budget) -> Vec<Nat> {
        self.gaps
            .iter()
            .enumerate()
            .filter(|(e, _)| c.membership(*e as Nat, budget) == Verdict::In)
            .flat_map(|(_, g)| g.start..=g.start + g.width)
            .collect()
    }
}

/// Shift `x` through all gaps, in order.
fn shift(mut x: Nat, gaps: &[Gap]) -> Nat {
    for g in gaps {
        if x >= g.start {
            x += g.width;
        }
    }
    x
}

/// Open gaps one at a time so that `H` has density below `1/(e+2)` at
/// `u_e + m_e` while staying the image of `C` under the shifts.
///
/// Gap `e` starts at the least `u_e > u_{e-1} + m_{e-1}` at which the shifted
/// enumeration so far has density above `1/2` (for `e <= 1`) or
/// `1 - 1/(e+1)`; its width is the least `m_e` with `u_e/(u_e+m_e) < 1/(e+2)`.
pub fn hypersimple_gaps(c: &SetSpec, opts: &GapOptions) -> GapConstruction {
    let mut source = c.enumerate(opts.horizon, opts.value_limit);
    let mut raw: Vec<Nat> = Vec::new();
    let mut gaps: Vec<Gap> = Vec::new();
    let mut found_at = Vec::new();
    let mut stage: u64 = 0;
    let mut partial = None;
    'gaps: for e in 0..opts.stages {
        let (num, den) = if e <= 1 { (1u128, 2u128) } else { (e as u128, e as u128 + 1) };
        let floor = gaps.last().map_or(0, |g| g.start + g.width);
        let passes = |count: usize, n: Nat| count as u128 * den > num * n as u128;
        let mut images: Vec<Nat> = raw.iter().map(|&x| shift(x, &gaps)).collect();
        images.sort_unstable();
        let mut spent = 0;
        let mut found = least_candidate(&images, floor, passes);
        while found.is_none() {
            if spent >= opts.budget {
                partial = Some(GapDiagnostic { gap: e, stages_spent: spent, enumerated: raw.len(), enumeration_exhausted: false });
                break 'gaps;
            }
            let Some(x) = source.next() else {
                partial = Some(GapDiagnostic { gap: e, stages_spent: spent, enumerated: raw.len(), enumeration_exhausted: true });
                break 'gaps;
            };
            spent += 1;
            stage += 1;
            raw.push(x);
            let t = shift(x, &gaps);
            if images.last().is_none_or(|&l| t > l) {
                images.push(t);
                if t + 1 > floor && passes(images.len(), t + 1) {
                    found = Some(t + 1);
                }
            } else {
                let at = images.partition_point(|&v| v < t);
                images.insert(at, t);
                found = least_candidate(&images, floor, passes);
            }
        }
        let u = found.expect("loop exits with a candidate");
        gaps.push(Gap { start: u, width: u * (e as Nat + 1) + 1 });
        found_at.push(stage);
    }
    let exact_below = gaps.last().map_or(0, |g| g.start + g.width + 1);
    let shifted = SetExpr::Shifted { base: Arc::new(c.expr().clone()), gaps: gaps.clone() };
    let h_expr = SetExpr::Window { inner: Arc::new(shifted), below: exact_below };
    let fill = SetExpr::GapFill { gaps: gaps.clone(), selector: Arc::new(c.expr().clone()) };
    let h = SetSpec::new(format!("H({})", c.name()), h_expr.clone()).with_kind(c.kind());
    let w = SetSpec::new(format!("W({})", c.name()), SetExpr::union(h_expr, fill)).with_kind(c.kind());
    GapConstruction { gaps, h, w, exact_below, found_at, partial }
}

/// Least `n > floor` with `passes(|{x ∈ images : x < n}|, n)`, looking only
/// where the count has just changed.
fn least_candidate(images: &[Nat], floor: Nat, passes: impl Fn(usize, Nat) -> bool) -> Option<Nat> {
    let start = floor + 1;
    let below = images.partition_point(|&v| v < start);
    if passes(below, start) {
        return Some(start);
    }
    images[below..].iter().enumerate().map(|(i, &x)| (below + i + 1, x + 1)).find(|&(count, n)| passes(count, n)).map(|(_, n)| n)
}

/// Replay the stage sets `H_0 = C, H_{e+1} = (H_e↾u_e) ∪ (H_e^{≥u_e} + m_e)`
/// on `[0, limit)` by brute force.
pub fn replay_stages(c_members: &[Nat], gaps: &[Gap], limit: Nat) -> Vec<BTreeSet<Nat>> {
    let mut stages = Vec::with_capacity(gaps.len() + 1);
    let mut current: BTreeSet<Nat> = c_members.iter().copied().filter(|&x| x < limit).collect();
    stages.push(current.clone());
    for g in gaps {
        current = current
            .iter()
            .map(|&x| if x < g.start { x } else { x + g.width })
            .filter(|&x| x < limit)
            .collect();
        stages.push(current.clone());
    }
    stages
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set_calculus::Eval;
    use crate::{ratio, DEFAULT_BUDGET};

    #[test]
    fn normalize_example() {
        let g = StrongArray::new(alloc::vec![alloc::vec![0, 5], alloc::vec![1, 2], alloc::vec![7], alloc::vec![3]]).unwrap();
        let h = normalize_array(&g, 2);
        assert_eq!(h.array.cells(), [alloc::vec![0, 5], alloc::vec![7]]);
        assert!(!h.partial && h.array.is_normalized());
        assert!(normalize_array(&g, 3).partial);
        assert!(StrongArray::new(alloc::vec![alloc::vec![1], alloc::vec![1]]).is_err());
    }

    #[test]
    fn collapse_example() {
        let g = StrongArray::new(alloc::vec![alloc::vec![0, 1], alloc::vec![2, 3]]).unwrap();
        let c = array_collapse(&g, 8).unwrap();
        assert_eq!(&c.table[..5], [0, 0, 2, 2, 1]);
        assert_eq!(c.size_witness.evaluate(0, 10), Ok(Eval::Defined(2)));
        assert_eq!(c.size_witness.evaluate(1, 10), Ok(Eval::Defined(1)));
    }

    #[test]
    fn principal_examples() {
        assert_eq!(principal_function(&SetSpec::evens(), 3, 100), Ok(6));
        assert_eq!(principal_function(&SetSpec::factorials(), 2, 100), Ok(24));
        assert_eq!(principal_function(&SetSpec::empty(), 0, 100), Err(PrincipalError::Missing { needed: 1 }));
        let r = SetSpec::random(1, 1, 3);
        assert!(matches!(principal_function(&r, 1000, 50), Err(PrincipalError::Exhausted { .. })));
    }

    #[test]
    fn identity_trace() {
        let t = weak_trace_from_perm(&PermSpec::identity(), 4, DEFAULT_BUDGET).unwrap();
        assert_eq!(t.cells[3], [0, 1, 2, 3, 4, 5]);
        assert!(t.respects_bounds());
        let swap = PermSpec::factorial_swap(&SetSpec::evens());
        let t = weak_trace_from_perm(&swap, 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(t.cells[2], [0, 2]);
    }

    #[test]
    fn trace_hits() {
        let r = trace_hit_report(&PermSpec::identity(), &SetSpec::factorials(), 720, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.s, 0);
        assert!(r.all_hold());
        let r = trace_hit_report(&PermSpec::identity(), &SetSpec::omega(), 720, DEFAULT_BUDGET).unwrap();
        assert!(r.all_hold());
        assert!(r.s > 700);
    }

    #[test]
    fn omega_gap_trace() {
        let g = hypersimple_gaps(&SetSpec::omega(), &GapOptions::new(3));
        assert_eq!(g.gaps[0], Gap { start: 1, width: 2 });
        assert_eq!(g.gaps[1], Gap { start: 5, width: 11 });
        assert_eq!(g.gaps[2], Gap { start: 40, width: 121 });
        assert!(g.partial.is_none());
        let c = SetSpec::omega();
        let count = g.h_count_below(&c, 3, DEFAULT_BUDGET).unwrap();
        assert!(ratio(count, 3) <= ratio(1, 3));
        let f = g.bound_transfer(&FuncSpec::identity());
        assert_eq!(f.evaluate(1, 10), Ok(Eval::Defined(1 + 2 + 11)));
    }

    #[test]
    fn evens_stall_after_first_gap() {
        let g = hypersimple_gaps(&SetSpec::evens(), &GapOptions { budget: 5000, ..GapOptions::new(6) });
        assert_eq!(g.gaps, [Gap { start: 1, width: 2 }]);
        assert_eq!(g.partial.map(|p| p.gap), Some(1));
    }
}
