/// Counts oracle invocations. Each application of `Q` or `Q⁻¹` is one query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryLedger {
    count: u64,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&mut self, queries: u64) {
        self.count += queries;
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}
