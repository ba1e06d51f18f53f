/// A natural number.
pub type Nat = u64;

/// Abstract step count. Evaluation never looks at a clock.
pub type Budget = u64;

/// Budget used when a caller does not pick one.
pub const DEFAULT_BUDGET: Budget = 1 << 20;

/// Extra steps a combinator spends at one point before it answers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Delay {
    Steps(u64),
    /// The point never resolves at any budget.
    Never,
}

/// Evaluation stopped before producing an answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Halt {
    /// The step budget ran out.
    Exhausted,
    /// A value did not fit in a [`Nat`].
    Overflow,
}

/// Step counter threaded through an evaluation.
///
/// Every evaluation charges a deterministic number of steps that does not
/// depend on the budget, so an answer obtained at budget `b` is reproduced at
/// any larger budget.
#[derive(Debug)]
pub(crate) struct Meter {
    remaining: u64,
}

impl Meter {
    pub(crate) fn new(budget: Budget) -> Self {
        Meter { remaining: budget }
    }

    pub(crate) fn charge(&mut self, steps: u64) -> Result<(), Halt> {
        if steps > self.remaining {
            self.remaining = 0;
            return Err(Halt::Exhausted);
        }
        self.remaining -= steps;
        Ok(())
    }

    pub(crate) fn delay(&mut self, delay: Delay) -> Result<(), Halt> {
        match delay {
            Delay::Steps(s) => self.charge(s),
            Delay::Never => {
                self.remaining = 0;
                Err(Halt::Exhausted)
            }
        }
    }

    pub(crate) fn tick(&mut self) -> Result<(), Halt> {
        self.charge(1)
    }

    pub(crate) fn remaining(&self) -> u64 {
        self.remaining
    }
}
