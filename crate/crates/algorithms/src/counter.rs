/// Operator-call accounting: a member operator or member resolvent costs one
/// unit, an evaluation of the full mean operator costs `n` units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CallCounter {
    pub member_calls: u64,
    pub full_calls: u64,
}

impl CallCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_member(&mut self, calls: u64) {
        self.member_calls += calls;
    }

    pub fn add_full(&mut self, calls: u64) {
        self.full_calls += calls;
    }

    /// Total cost in member-call units for an ensemble of `n` members.
    pub fn cost(&self, n: usize) -> u64 {
        self.member_calls + n as u64 * self.full_calls
    }
}
