//! Invariants of the core library checked on generated inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use proptest::prelude::*;

use density_forge_core::arith::{pair, unpair};
use density_forge_core::arrays::{
    array_collapse, hypersimple_gaps, normalize_array, replay_stages, GapOptions, StrongArray,
};
use density_forge_core::density::{density_profile, partial_density};
use density_forge_core::describe::oracle::{is_injective_graph_prefix, OracleMachine};
use density_forge_core::describe::{combine_total, evaluate_description, Answer, DescExpr, Description, Mode};
use density_forge_core::forge::thin_ce_subset;
use density_forge_core::oracle_sim::{jump_strategy, JumpOptions};
use density_forge_core::set_calculus::{
    complement, intersection, join, union, Eval, FuncExpr, FuncSpec, Mapping, PermSpec, SetExpr, SetSpec, Verdict,
};
use density_forge_core::{ratio, Delay, Nat, DEFAULT_BUDGET};

fn leaf() -> impl Strategy<Value = SetExpr> {
    prop_oneof![
        (1u64..8, prop::collection::vec(0u64..8, 0..4)).prop_map(|(m, r)| SetExpr::periodic(m, r)),
        (0u64..40, prop::option::of(0u64..80)).prop_map(|(s, l)| SetExpr::Interval { start: s, end: l.map(|l| s + l) }),
        prop::collection::vec(0u64..200, 0..12).prop_map(SetExpr::finite),
        (any::<u64>(), 1u64..5).prop_map(|(seed, num)| SetExpr::Random { seed, numerator: num, denominator: 5 }),
        Just(SetExpr::Factorials { from: 2 }),
        (0u64..4).prop_map(SetExpr::Ruler),
    ]
}

fn set_expr() -> impl Strategy<Value = SetExpr> {
    leaf().prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| SetExpr::union(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| SetExpr::intersection(a, b)),
            inner.clone().prop_map(SetExpr::complement),
            (inner.clone(), inner).prop_map(|(a, b)| SetExpr::join(a, b)),
        ]
    })
}

fn set_spec() -> impl Strategy<Value = SetSpec> {
    set_expr().prop_map(|e| SetSpec::new("generated", e))
}

/// A set whose membership costs extra steps at a few points.
fn delayed_spec() -> impl Strategy<Value = SetSpec> {
    (set_expr(), prop::collection::btree_map(0u64..60, 0u64..400, 0..6)).prop_map(|(e, d)| {
        let delays: BTreeMap<Nat, Delay> = d.into_iter().map(|(n, s)| (n, Delay::Steps(s))).collect();
        SetSpec::new("delayed", SetExpr::delayed(e, delays))
    })
}

fn members(s: &SetSpec, n: Nat) -> Vec<bool> {
    (0..n).map(|k| s.membership(k, DEFAULT_BUDGET) == Verdict::In).collect()
}

fn answer() -> impl Strategy<Value = Answer> {
    prop_oneof![Just(Answer::Zero), Just(Answer::One), Just(Answer::Box), Just(Answer::Diverged)]
}

fn description() -> impl Strategy<Value = Description> {
    let mode = prop_oneof![Just(Mode::Generic), Just(Mode::Coarse), Just(Mode::Dense), Just(Mode::EffectiveDense)];
    let expr = prop_oneof![
        set_expr().prop_map(|s| DescExpr::Indicator(Arc::new(s))),
        answer().prop_map(DescExpr::Constant),
        (set_expr(), set_expr()).prop_map(|(b, s)| DescExpr::BoxOn {
            boxes: Arc::new(b),
            otherwise: Arc::new(DescExpr::Indicator(Arc::new(s))),
        }),
        (set_expr(), set_expr()).prop_map(|(d, s)| DescExpr::DivergeOn {
            set: Arc::new(d),
            otherwise: Arc::new(DescExpr::Indicator(Arc::new(s))),
        }),
    ];
    (mode, expr).prop_map(|(m, e)| Description::new("generated", m, e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn membership_is_budget_monotone(s in delayed_spec(), n in 0u64..60, b in 0u64..600, extra in 0u64..600) {
        let low = s.membership(n, b);
        if low.is_resolved() {
            prop_assert_eq!(low, s.membership(n, b + extra));
        }
    }

    #[test]
    fn evaluation_is_budget_monotone(k in 0u64..20, n in 0u64..50, steps in 0u64..300, b in 0u64..400, extra in 0u64..400) {
        let delays: BTreeMap<Nat, Delay> = [(n, Delay::Steps(steps))].into_iter().collect();
        let f = FuncSpec::new("delayed", FuncExpr::delayed(FuncExpr::Xor(k), delays));
        if let Ok(Eval::Defined(v)) = f.evaluate(n, b) {
            prop_assert_eq!(f.evaluate(n, b + extra), Ok(Eval::Defined(v)));
        }
    }

    #[test]
    fn never_delay_exhausts_every_budget(n in 0u64..50, b in any::<u64>()) {
        let delays: BTreeMap<Nat, Delay> = [(n, Delay::Never)].into_iter().collect();
        let s = SetSpec::new("never", SetExpr::delayed(SetExpr::All, delays));
        prop_assert_eq!(s.membership(n, b), Verdict::Unknown);
    }

    #[test]
    fn complement_and_join_round_trip(a in set_spec(), b in set_spec(), n in 1u64..150) {
        let twice = complement(&complement(&a));
        prop_assert_eq!(members(&twice, n), members(&a, n));
        let j = join(&a, &b);
        let bits = members(&j, 2 * n);
        let (ma, mb) = (members(&a, n), members(&b, n));
        for k in 0..n as usize {
            prop_assert_eq!(bits[2 * k], ma[k]);
            prop_assert_eq!(bits[2 * k + 1], mb[k]);
        }
    }

    #[test]
    fn partial_density_matches_brute_force(s in set_spec(), n in 1u64..300) {
        let p = partial_density(&s, n, DEFAULT_BUDGET).unwrap();
        let count = members(&s, n).into_iter().filter(|b| *b).count() as Nat;
        prop_assert_eq!(p.count, count);
        prop_assert_eq!(p.unresolved, 0);
        prop_assert_eq!(p.value, ratio(count, n));
    }

    #[test]
    fn union_density_is_subadditive(a in set_spec(), b in set_spec(), n in 1u64..200) {
        let d = |s: &SetSpec| partial_density(s, n, DEFAULT_BUDGET).unwrap().value;
        let (da, db) = (d(&a), d(&b));
        let du = d(&union(&a, &b));
        prop_assert!(du <= da + db);
        prop_assert!(du >= da.max(db));
        let di = d(&intersection(&a, &b));
        prop_assert!(di <= da.min(db));
        prop_assert_eq!(du + di, da + db);
    }

    #[test]
    fn profile_counts_are_monotone(s in set_spec(), n in 2u64..200) {
        let points: Vec<Nat> = (1..=n).collect();
        let p = density_profile(&s, &points, DEFAULT_BUDGET).unwrap();
        prop_assert!(p.counts.windows(2).all(|w| w[0] <= w[1] && w[1] <= w[0] + 1));
        prop_assert!(p.is_exact());
    }

    #[test]
    fn eval_report_partitions_the_window(d in description(), s in set_spec(), n in 1u64..120) {
        let r = evaluate_description(&d, &s, n, DEFAULT_BUDGET);
        let mut all: Vec<Nat> = r.errors.iter().chain(&r.agreements).chain(&r.unresolved).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        let last = r.error_profile.counts.last().copied().unwrap_or(0) + r.agreement_profile.counts.last().copied().unwrap_or(0);
        prop_assert_eq!(last, n - r.unresolved.len() as Nat);
    }

    #[test]
    fn total_version_errors_are_contained(d in description(), s in set_spec(), n in 1u64..120) {
        let total = combine_total(&d, DEFAULT_BUDGET);
        for k in 0..n {
            let truth = s.membership(k, DEFAULT_BUDGET);
            let wrong = |a: Answer| match (a, truth) {
                (Answer::Zero, Verdict::In) | (Answer::One, Verdict::Out) => true,
                (Answer::Zero | Answer::One, _) => false,
                _ => true,
            };
            let original = d.answer(k, DEFAULT_BUDGET);
            let combined = total.answer(k, DEFAULT_BUDGET);
            prop_assert_ne!(combined, Answer::Diverged);
            if wrong(combined) && truth.is_resolved() {
                prop_assert!(wrong(original), "new error at {}", k);
            }
        }
    }

    #[test]
    fn registry_permutations_are_bijective(k in 0u64..64, b in 1u64..12, s in set_spec()) {
        let perms = [
            PermSpec::identity(),
            PermSpec::from_forward("xor", FuncExpr::Xor(k)).unwrap(),
            PermSpec::from_forward("block_reverse", FuncExpr::BlockReverse(b)).unwrap(),
        ];
        for p in &perms {
            prop_assert_eq!(p.check_window(128, DEFAULT_BUDGET), Ok(()));
        }
        let swap = PermSpec::factorial_swap(&s);
        if s.known_infinite() == Some(true) && complement(&s).known_infinite() == Some(true) {
            for x in 0..15 {
                if let Ok(Eval::Defined(v)) = swap.forward().evaluate(x, DEFAULT_BUDGET) {
                    prop_assert_eq!(swap.inverse().evaluate(v, DEFAULT_BUDGET), Ok(Eval::Defined(x)));
                }
            }
        }
    }

    #[test]
    fn enumeration_lists_each_member_once(s in set_spec(), limit in 1u64..200) {
        let listed: Vec<Nat> = s.enumerate(DEFAULT_BUDGET, limit).collect();
        let unique: BTreeSet<Nat> = listed.iter().copied().collect();
        prop_assert_eq!(unique.len(), listed.len());
        let expected: BTreeSet<Nat> = (0..limit).filter(|&k| s.membership(k, DEFAULT_BUDGET) == Verdict::In).collect();
        prop_assert_eq!(unique, expected);
    }

    #[test]
    fn thinned_subsets_are_spaced(s in set_spec(), count in 1usize..8) {
        let t = thin_ce_subset(&s, count, DEFAULT_BUDGET, 4000);
        for (i, w) in t.values.windows(2).enumerate() {
            prop_assert!(w[1] - w[0] > 1 << i);
        }
        for &v in &t.values {
            prop_assert_eq!(s.membership(v, DEFAULT_BUDGET), Verdict::In);
        }
        prop_assert_eq!(t.partial, t.values.len() < count);
    }

    #[test]
    fn normalization_keeps_separated_cells(sizes in prop::collection::vec((0u64..30, 1usize..4), 1..20), count in 1usize..20) {
        let cells: Vec<Vec<Nat>> = sizes.iter().enumerate().map(|(i, &(base, len))| {
            (0..len as Nat).map(|j| 1000 * i as Nat + base + 40 * j).collect()
        }).rev().collect();
        let g = StrongArray::new(cells).unwrap();
        let h = normalize_array(&g, count);
        prop_assert!(h.array.is_normalized());
        prop_assert!(h.array.cells().iter().all(|c| g.cells().contains(c)));
        let window = 1000 * sizes.len() as Nat;
        let c = array_collapse(&h.array, window).unwrap();
        for (k, cell) in h.array.cells().iter().enumerate() {
            for &x in cell {
                prop_assert_eq!(c.table[x as usize], 2 * k as Nat);
            }
        }
        let odds: Vec<Nat> = c.table.iter().copied().filter(|v| v % 2 == 1).collect();
        prop_assert!(odds.windows(2).all(|w| w[1] == w[0] + 2));
    }

    #[test]
    fn finite_use_replay(bits in prop::collection::vec(any::<bool>(), 0..40), input in 0u64..6, column in 0u64..4) {
        let machines = [
            OracleMachine::CopyBit { column },
            OracleMachine::Echo { set: SetSpec::evens() },
            OracleMachine::MixedEcho { set: SetSpec::odds(), refuse_below: 1, extra_reads: 3 },
        ];
        for m in &machines {
            let run = m.run(&bits, input, DEFAULT_BUDGET);
            if run.output.is_some() {
                let flipped: Vec<bool> = (0..bits.len())
                    .map(|i| if run.queried.contains(&(i as Nat)) { bits[i] } else { !bits[i] })
                    .collect();
                prop_assert_eq!(m.run(&flipped, input, DEFAULT_BUDGET).output, run.output);
            }
        }
    }

    #[test]
    fn graph_prefix_test_matches_definition(bits in prop::collection::vec(any::<bool>(), 0..60)) {
        let mut seen_x = BTreeSet::new();
        let mut seen_y = BTreeSet::new();
        let mut ok = true;
        for (p, _) in bits.iter().enumerate().filter(|(_, b)| **b) {
            let (x, y) = unpair(p as Nat);
            ok &= seen_x.insert(x) && seen_y.insert(y);
        }
        prop_assert_eq!(is_injective_graph_prefix(&bits), ok);
    }

    #[test]
    fn pairing_round_trips(x in 0u64..100_000, y in 0u64..100_000) {
        prop_assert_eq!(unpair(pair(x, y).unwrap()), (x, y));
    }

    #[test]
    fn jump_runs_are_deterministic(k in 0u64..8, stages in 1usize..6) {
        let family = [Mapping::Perm(PermSpec::from_forward("xor", FuncExpr::Xor(k)).unwrap())];
        let targets: Vec<SetSpec> = (0..stages as Nat).map(density_forge_core::coding::ruler_set).collect();
        let a = jump_strategy(&family, &targets, &JumpOptions::new(stages));
        let b = jump_strategy(&family, &targets, &JumpOptions::new(stages));
        prop_assert!(a.log.is_monotone());
        prop_assert_eq!(a, b);
    }
}

#[test]
fn gap_shifts_match_stage_replay() {
    for c in [SetSpec::omega(), SetSpec::random(4, 4, 5)] {
        let g = hypersimple_gaps(&c, &GapOptions { budget: 1 << 16, ..GapOptions::new(3) });
        let limit = g.exact_below;
        let c_members: Vec<Nat> = (0..limit).filter(|&k| c.membership(k, DEFAULT_BUDGET) == Verdict::In).collect();
        let stages = replay_stages(&c_members, &g.gaps, limit);
        let last = stages.last().unwrap();
        let h: BTreeSet<Nat> = (0..limit).filter(|&k| g.h.membership(k, DEFAULT_BUDGET) == Verdict::In).collect();
        assert_eq!(&h, last, "shifted set disagrees with replay for {}", c.name());
        for (e, gap) in g.gaps.iter().enumerate() {
            assert!(stages[e + 1].range(gap.start..gap.start + gap.width).next().is_none());
        }
    }
}
