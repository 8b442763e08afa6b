//! Per-iteration records shared by all solvers.

use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};

/// One row of an iteration trace.
///
/// Residual entries that are undefined at `k = 0` (before any step) are NaN.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub objective: f64,
    pub infeasibility: f64,
    pub xi_norm: f64,
    pub gap_norm: f64,
    pub inner_iters: usize,
    pub time_ms: f64,
}

impl TraceRow {
    /// `max{‖ξ‖, ‖x − y‖, ‖Ax − b‖}`, NaN-propagating.
    pub fn max_residual(&self) -> f64 {
        if self.xi_norm.is_nan() || self.gap_norm.is_nan() {
            return f64::NAN;
        }
        self.xi_norm.max(self.gap_norm).max(self.infeasibility)
    }
}

/// Quantities the descent and dual-bound analyses consume, one entry per iterate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepRecord {
    /// Merit function at iterate `k`.
    pub potential: f64,
    /// `‖x^k − x^{k−1}‖` (0 at `k = 0`).
    pub dx: f64,
    /// `‖z^k − z^{k−1}‖` (0 at `k = 0`).
    pub dz: f64,
    /// `‖λ^k − λ^{k−1}‖` (0 at `k = 0`).
    pub dlambda: f64,
    pub lambda_norm: f64,
    /// Inner tolerance `ε_k` requested for the step that produced iterate `k`.
    pub inner_tol: f64,
    /// Achieved inner certificate norm `‖ζ^k‖`.
    pub zeta_norm: f64,
}

/// Shared buffer that receives a copy of every row as it is recorded, so the
/// rows survive a solver error.
pub type TraceTap = Arc<Mutex<Vec<TraceRow>>>;

/// Ordered iteration records with a monotonic clock.
#[derive(Clone, Debug)]
pub struct IterateTrace {
    pub rows: Vec<TraceRow>,
    pub steps: Vec<StepRecord>,
    start: Instant,
    tap: Option<TraceTap>,
}

impl Default for IterateTrace {
    fn default() -> Self {
        Self::new()
    }
}

impl IterateTrace {
    pub fn new() -> Self {
        Self::tapped(None)
    }

    /// A trace that mirrors each row into `tap`.
    pub fn tapped(tap: Option<TraceTap>) -> Self {
        Self { rows: Vec::new(), steps: Vec::new(), start: Instant::now(), tap }
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.start.elapsed().as_secs_f64() * 1e3
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        objective: f64,
        infeasibility: f64,
        xi_norm: f64,
        gap_norm: f64,
        inner_iters: usize,
        step: StepRecord,
    ) {
        let k = self.rows.len();
        let time_ms = self.elapsed_ms();
        let row = TraceRow { k, objective, infeasibility, xi_norm, gap_norm, inner_iters, time_ms };
        if let Some(tap) = &self.tap {
            tap.lock().unwrap_or_else(|e| e.into_inner()).push(row);
        }
        self.rows.push(row);
        self.steps.push(step);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Index minimizing the max-residual over rows where it is defined.
    pub fn best_index(&self) -> Option<usize> {
        self.rows
            .iter()
            .filter(|r| !r.max_residual().is_nan())
            .min_by(|a, b| a.max_residual().total_cmp(&b.max_residual()))
            .map(|r| r.k)
    }

    /// `min_{k ≤ K} max-residual` for the first `K + 1` rows.
    pub fn min_residual_upto(&self, k_max: usize) -> f64 {
        self.rows
            .iter()
            .take(k_max + 1)
            .map(TraceRow::max_residual)
            .filter(|r| !r.is_nan())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Why a solver stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIter,
}
