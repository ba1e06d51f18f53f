use alloc::collections::BinaryHeap;
use alloc::sync::Arc;
use core::cmp::Reverse;

use super::{SetExpr, Verdict};
use crate::budget::Meter;
use crate::{Budget, Nat};

/// Dovetailed enumeration of a set.
///
/// Value `v` is released at stage `max(v + 1, c)` where `c` is the number of
/// steps its membership check took (under `horizon`). Values are emitted in
/// `(stage, v)` order, so delayed values show up late. Values at or above
/// `limit`, and values that do not resolve to `In` within `horizon`, are never
/// emitted.
#[derive(Clone, Debug)]
pub struct Enumeration {
    expr: Arc<SetExpr>,
    horizon: Budget,
    limit: Nat,
    next: Nat,
    pending: BinaryHeap<Reverse<(u64, Nat)>>,
}

impl Enumeration {
    pub(crate) fn new(expr: Arc<SetExpr>, horizon: Budget, limit: Nat) -> Self {
        Enumeration { expr, horizon, limit, next: 0, pending: BinaryHeap::new() }
    }

    /// Next value together with the stage it was released at.
    pub fn next_with_stage(&mut self) -> Option<(u64, Nat)> {
        loop {
            if let Some(&Reverse((stage, v))) = self.pending.peek() {
                // Anything not yet examined is released at stage >= next + 1.
                if stage <= self.next || self.next >= self.limit {
                    self.pending.pop();
                    return Some((stage, v));
                }
            }
            if self.next >= self.limit {
                return None;
            }
            let v = self.next;
            self.next += 1;
            let mut meter = Meter::new(self.horizon);
            if let Ok(Verdict::In) = self.expr.decide(v, &mut meter) {
                let cost = self.horizon - meter.remaining();
                self.pending.push(Reverse(((v + 1).max(cost), v)));
            }
        }
    }
}

impl Iterator for Enumeration {
    type Item = Nat;

    fn next(&mut self) -> Option<Nat> {
        self.next_with_stage().map(|(_, v)| v)
    }
}
