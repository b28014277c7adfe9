//! Per-step run traces.
//!
//! Row `k` describes iterate `x_k`: its gap and distance to the minimizer,
//! the radius and `|g|` of the step taken from it (or of the last probe, for
//! the final row), and the cumulative counters at the moment the run left
//! `x_k`. A run with `K` accepted steps therefore has `K + 1` rows.

use serde::{Deserialize, Serialize};

use crate::ledger::OracleLedger;
use crate::objectives::{Objective, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Bisection-driven Goldstein descent with an exact oracle.
    Alg3,
    /// Bisection followed by a `β`-scaled step, exact oracle.
    Alg4,
    /// Heuristic with approximate Goldstein subgradients.
    Alg7,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Alg3 => "alg3",
            Algorithm::Alg4 => "alg4",
            Algorithm::Alg7 => "alg7",
        }
    }

    /// Fraction of `ε|g|` each accepted step is guaranteed to decrease `f` by.
    pub fn descent_factor(self) -> f64 {
        match self {
            Algorithm::Alg3 | Algorithm::Alg4 => 1.0,
            Algorithm::Alg7 => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub k: u64,
    pub s_goldstein: u64,
    pub s_approx: u64,
    pub s_subgrad: u64,
    pub eps: f64,
    pub g_norm: f64,
    pub gap: f64,
    pub dist: f64,
    /// `f(x_k)`; not persisted (reads back as `gap`).
    pub value: f64,
}

impl TraceRow {
    /// Oracle calls of whichever kind the run used (only one is nonzero).
    pub fn calls(&self) -> u64 {
        self.s_goldstein + self.s_approx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason", content = "detail")]
pub enum StopReason {
    /// `g_0(x) = 0` at the current point.
    Critical,
    /// Oracle budget exhausted.
    Budget,
    /// Modulus bracket fell below `stop_eps`.
    StopEps,
    /// The modulus estimate declared the point approximately stationary.
    Stationary,
    /// Outer iteration limit reached.
    Iterations,
    /// A child routine failed; the trace holds everything up to that point.
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub algorithm: Option<Algorithm>,
    pub rows: Vec<TraceRow>,
    pub stop: StopReason,
    /// Steps retried with a halved radius after a zero subgradient.
    pub retries: u64,
    /// Per accepted step: the bisection bracket (exact runs) or the first
    /// modulus estimate (heuristic). Not persisted.
    pub brackets: Vec<f64>,
}

impl Trace {
    pub fn first(&self) -> Option<&TraceRow> {
        self.rows.first()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn accepted_steps(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    /// Best guess at the producing algorithm for traces read back from disk.
    pub fn inferred_algorithm(&self) -> Algorithm {
        self.algorithm.unwrap_or_else(|| {
            if self.rows.iter().any(|r| r.s_approx > 0 || r.s_subgrad > 0) {
                Algorithm::Alg7
            } else {
                Algorithm::Alg3
            }
        })
    }

    /// Steps whose decrease falls short of `factor · ε|g|` by more than `tol`.
    pub fn descent_violations(&self, factor: f64, tol: f64) -> usize {
        self.rows
            .windows(2)
            .filter(|w| w[1].value > w[0].value - factor * w[0].eps * w[0].g_norm + tol)
            .count()
    }

    pub fn gap_non_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| !(w[1].gap > w[0].gap))
    }

    pub fn counters_non_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| {
            w[1].s_goldstein >= w[0].s_goldstein
                && w[1].s_approx >= w[0].s_approx
                && w[1].s_subgrad >= w[0].s_subgrad
        })
    }
}

/// Builds trace rows from the ledger as a run progresses.
pub(crate) struct Recorder<'a> {
    f: &'a Objective,
    ledger: &'a OracleLedger,
    algorithm: Algorithm,
    rows: Vec<TraceRow>,
    retries: u64,
    brackets: Vec<f64>,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(f: &'a Objective, ledger: &'a OracleLedger, algorithm: Algorithm) -> Self {
        Recorder {
            f,
            ledger,
            algorithm,
            rows: Vec::new(),
            retries: 0,
            brackets: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, x: &Point, value: f64, eps: f64, g_norm: f64) {
        let snap = self.ledger.snapshot();
        self.rows.push(TraceRow {
            k: self.rows.len() as u64,
            s_goldstein: snap.goldstein_calls,
            s_approx: snap.approx_calls,
            s_subgrad: snap.subgrad_evals,
            eps,
            g_norm,
            gap: self.f.gap(value),
            dist: self.f.dist(x),
            value,
        });
    }

    pub(crate) fn bracket(&mut self, eps: f64) {
        self.brackets.push(eps);
    }

    pub(crate) fn retry(&mut self) {
        self.retries += 1;
    }

    pub(crate) fn finish(self, stop: StopReason) -> Trace {
        Trace {
            algorithm: Some(self.algorithm),
            rows: self.rows,
            stop,
            retries: self.retries,
            brackets: self.brackets,
        }
    }
}
