//! Choice of `k` for a query budget from a calibrated error table.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::qcoin_queries;
use crate::error::Result;

#[derive(Serialize, Deserialize)]
struct Row {
    budget: u64,
    k: usize,
    mean_error: f64,
}

/// Mean error of QCoin per `(budget, k)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorTable {
    entries: BTreeMap<u64, BTreeMap<usize, f64>>,
}

impl ErrorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, budget: u64, k: usize, mean_error: f64) {
        self.entries.entry(budget).or_default().insert(k, mean_error);
    }

    pub fn get(&self, budget: u64, k: usize) -> Option<f64> {
        self.entries.get(&budget)?.get(&k).copied()
    }

    pub fn budgets(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.keys().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// CSV with columns `budget,k,mean_error`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for (&budget, row) in &self.entries {
            for (&k, &mean_error) in row {
                w.serialize(Row { budget, k, mean_error })?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut table = ErrorTable::new();
        for row in csv::Reader::from_reader(reader).deserialize() {
            let row: Row = row?;
            table.insert(row.budget, row.k, row.mean_error);
        }
        Ok(table)
    }
}

/// `k` with the lowest calibrated error at the largest calibrated budget not
/// above `budget`, among the `k` whose single-trial cost fits the budget.
/// Ties go to the smaller `k`. Without a usable calibration row the answer is
/// the smallest `k` in the table, or 0 for an empty table.
pub fn select_optimal_k(table: &ErrorTable, budget: u64) -> usize {
    let fallback = table.entries.values().flat_map(|r| r.keys().copied()).min().unwrap_or(0);
    let Some((_, row)) = table.entries.range(..=budget).next_back() else {
        return fallback;
    };
    row.iter()
        .filter(|(&k, e)| qcoin_queries(k, 1) <= budget && e.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(b.0)))
        .map_or(fallback, |(&k, _)| k)
}
