use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// One logged objective evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Global stage counter (continues across the calls of a doubling run).
    pub stage: u32,
    /// Iteration within the stage, starting at 1.
    pub iter: u64,
    /// Subgradient evaluations since the start of the run.
    pub cum_iter: u64,
    pub objective: f64,
    /// Running minimum of every objective seen so far, including f(w₀).
    pub best_objective: f64,
    pub eta: f64,
    /// Monotone-clock nanoseconds since the run started; 0 when disabled.
    pub wallclock_ns: u64,
}

/// Stage output of a restarted method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    /// Index of the enclosing RSG call (1 unless run by R²SG).
    pub call: u32,
    pub stage: u32,
    pub inner_iters: u64,
    pub cum_iter: u64,
    pub eta: f64,
    /// Objective of the averaged point returned by the stage.
    pub objective: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub records: Vec<TraceRecord>,
    pub stages: Vec<StageSummary>,
    pub final_point: Vec<f64>,
    pub final_objective: f64,
}

impl SolveTrace {
    pub fn total_iters(&self) -> u64 {
        self.records.last().map_or(0, |r| r.cum_iter)
    }

    pub fn best_objective(&self) -> f64 {
        let rec = self.records.iter().map(|r| r.best_objective);
        let stages = self.stages.iter().map(|s| s.objective);
        rec.chain(stages)
            .chain(std::iter::once(self.final_objective))
            .fold(f64::INFINITY, f64::min)
    }

    /// First cumulative iteration at which the best objective so far is at
    /// or below `threshold`, considering per-iteration records and stage
    /// outputs.
    pub fn iters_to_reach(&self, threshold: f64) -> Option<u64> {
        let from_records = self
            .records
            .iter()
            .find(|r| r.best_objective <= threshold)
            .map(|r| r.cum_iter);
        let from_stages = self
            .stages
            .iter()
            .find(|s| s.objective <= threshold)
            .map(|s| s.cum_iter);
        match (from_records, from_stages) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// How often objective values are logged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stride {
    /// max(1, t/1000) per stage of t iterations.
    Auto,
    Every(u64),
}

impl Stride {
    pub fn for_stage(&self, iters: u64) -> u64 {
        match *self {
            Stride::Auto => (iters / 1000).max(1),
            Stride::Every(n) => n.max(1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub stride: Stride,
    pub wallclock: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            stride: Stride::Auto,
            wallclock: false,
        }
    }
}

impl TraceOptions {
    pub fn every_iteration() -> Self {
        Self {
            stride: Stride::Every(1),
            wallclock: false,
        }
    }
}

/// Accumulates records for one run.
pub(crate) struct Recorder {
    opts: TraceOptions,
    start: Instant,
    pub(crate) cum_iter: u64,
    pub(crate) best: f64,
    pub(crate) trace: SolveTrace,
}

impl Recorder {
    pub(crate) fn new(opts: TraceOptions, f0: f64) -> Self {
        Self {
            opts,
            start: Instant::now(),
            cum_iter: 0,
            best: if f0.is_finite() { f0 } else { f64::INFINITY },
            trace: SolveTrace::default(),
        }
    }

    pub(crate) fn stride(&self, iters: u64) -> u64 {
        self.opts.stride.for_stage(iters)
    }

    /// Logs an objective and fails on non-finite values.
    pub(crate) fn record(
        &mut self,
        stage: u32,
        iter: u64,
        objective: f64,
        eta: f64,
    ) -> Result<(), Error> {
        if objective.is_finite() {
            self.best = self.best.min(objective);
        }
        let wallclock_ns = if self.opts.wallclock {
            self.start.elapsed().as_nanos() as u64
        } else {
            0
        };
        self.trace.records.push(TraceRecord {
            stage,
            iter,
            cum_iter: self.cum_iter,
            objective,
            best_objective: self.best,
            eta,
            wallclock_ns,
        });
        if objective.is_finite() {
            Ok(())
        } else {
            Err(self.diverged())
        }
    }

    pub(crate) fn stage_done(&mut self, summary: StageSummary) -> Result<(), Error> {
        let ok = summary.objective.is_finite();
        if ok {
            self.best = self.best.min(summary.objective);
        }
        self.trace.stages.push(summary);
        if ok {
            Ok(())
        } else {
            Err(self.diverged())
        }
    }

    pub(crate) fn diverged(&mut self) -> Error {
        Error::Divergence {
            cum_iter: self.cum_iter,
            trace: Box::new(std::mem::take(&mut self.trace)),
        }
    }

    pub(crate) fn finish(mut self, point: Vec<f64>, objective: f64) -> SolveTrace {
        self.trace.final_point = point;
        self.trace.final_objective = objective;
        self.trace
    }
}
