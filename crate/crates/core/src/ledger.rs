use std::cell::Cell;

use serde::Serialize;

/// Cumulative oracle accounting for a single run.
///
/// Counters only move forward. The ledger is `!Sync`; each run owns one.
#[derive(Debug, Default)]
pub struct OracleLedger {
    goldstein_calls: Cell<u64>,
    approx_calls: Cell<u64>,
    subgrad_evals: Cell<u64>,
    value_evals: Cell<u64>,
}

/// Plain copy of the ledger counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LedgerSnapshot {
    pub goldstein_calls: u64,
    pub approx_calls: u64,
    pub subgrad_evals: u64,
    pub value_evals: u64,
}

fn bump(c: &Cell<u64>, by: u64) {
    c.set(c.get() + by);
}

impl OracleLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_goldstein(&self) {
        bump(&self.goldstein_calls, 1);
    }

    pub fn record_approx(&self) {
        bump(&self.approx_calls, 1);
    }

    pub fn record_subgrad_evals(&self, n: u64) {
        bump(&self.subgrad_evals, n);
    }

    pub fn record_value_evals(&self, n: u64) {
        bump(&self.value_evals, n);
    }

    pub fn goldstein_calls(&self) -> u64 {
        self.goldstein_calls.get()
    }

    pub fn approx_calls(&self) -> u64 {
        self.approx_calls.get()
    }

    pub fn subgrad_evals(&self) -> u64 {
        self.subgrad_evals.get()
    }

    pub fn value_evals(&self) -> u64 {
        self.value_evals.get()
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            goldstein_calls: self.goldstein_calls(),
            approx_calls: self.approx_calls(),
            subgrad_evals: self.subgrad_evals(),
            value_evals: self.value_evals(),
        }
    }
}
