//! `rsg run`: one solver on one problem, written as a trace CSV and a
//! summary JSON.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use rsg_core::oracles::{long_run, OracleReport};
use rsg_core::solvers::{
    baseline_sg_decreasing, r2sg, rsg, rsg_dap, rsg_dap_initial_step, rsg_initial_step, sg_run, SolveTrace,
    StageSummary,
};
use rsg_core::Error as CoreError;
use serde::Serialize;

use crate::build::{build, BuiltRun, SolverPlan};
use crate::config::RunSpec;
use crate::error::{CliError, CliResult};

pub const CSV_HEADER: [&str; 8] = ["run_id", "algo", "stage", "iter", "cum_iter", "objective", "eta", "wallclock_ns"];

#[derive(Clone, Debug, Serialize)]
pub struct OracleRef {
    pub method: String,
    pub fstar_upper: f64,
    pub budget: u64,
    pub certified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub run_id: String,
    pub algo: String,
    pub status: String,
    pub problem: String,
    pub dim: usize,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub best_objective: f64,
    pub total_iters: u64,
    pub eps0: Option<f64>,
    pub initial_eta: Option<f64>,
    pub w0: String,
    /// Seed of the gaussian start point (ChaCha8).
    pub seed: u64,
    pub stages: Vec<StageSummary>,
    pub oracle: Option<OracleRef>,
    /// Resolved configuration; parsing it back reproduces the run.
    pub config: BTreeMap<String, String>,
}

/// Outcome of [`execute`]: a trace, and whether it stops at a divergence.
pub struct Executed {
    pub built: BuiltRun,
    pub trace: SolveTrace,
    pub diverged_at: Option<u64>,
}

pub fn execute(spec: &RunSpec) -> CliResult<Executed> {
    let built = build(spec)?;
    let BuiltRun { problem, w0, opts, .. } = &built;
    let result = match &built.plan {
        SolverPlan::Sg { eta, iters } => sg_run(problem, w0, *eta, *iters, *opts).map(|o| o.trace),
        SolverPlan::Rsg(cfg) => rsg(problem, w0, cfg, *opts).map(|o| o.trace),
        SolverPlan::RsgDap(cfg) => rsg_dap(problem, w0, cfg, *opts).map(|o| o.trace),
        SolverPlan::R2sg { dcfg, cfg } => r2sg(problem, w0, dcfg, cfg, *opts).map(|o| o.trace),
        SolverPlan::Baseline { eta0, iters } => baseline_sg_decreasing(problem, w0, *eta0, *iters, *opts),
    };
    match result {
        Ok(trace) => Ok(Executed { built, trace, diverged_at: None }),
        Err(CoreError::Divergence { cum_iter, trace }) => Ok(Executed { built, trace: *trace, diverged_at: Some(cum_iter) }),
        Err(e) => Err(CliError::from_build(e)),
    }
}

/// Shortest round-trip decimal, switching to exponent form outside
/// [1e-6, 1e16).
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-6..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

pub fn trace_csv(run_id: &str, algo: &str, trace: &SolveTrace) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in &trace.records {
        w.write_record([
            run_id.to_string(),
            algo.to_string(),
            r.stage.to_string(),
            r.iter.to_string(),
            r.cum_iter.to_string(),
            fmt_f64(r.objective),
            fmt_f64(r.eta),
            r.wallclock_ns.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

pub fn csv_path(dir: &Path, run_id: &str) -> PathBuf {
    dir.join(format!("{run_id}.trace.csv"))
}

pub fn summary_path(dir: &Path, run_id: &str) -> PathBuf {
    dir.join(format!("{run_id}.summary.json"))
}

fn initial_eta(plan: &SolverPlan, built: &BuiltRun) -> Option<f64> {
    match plan {
        SolverPlan::Sg { eta, .. } => Some(*eta),
        SolverPlan::Baseline { eta0, .. } => Some(*eta0),
        SolverPlan::Rsg(cfg) | SolverPlan::R2sg { cfg, .. } => rsg_initial_step(&built.problem, cfg).ok(),
        SolverPlan::RsgDap(cfg) => rsg_dap_initial_step(&built.problem, cfg).ok(),
    }
}

fn oracle_ref(spec: &RunSpec, built: &BuiltRun) -> CliResult<Option<OracleRef>> {
    match spec.get("output.oracle") {
        "none" => Ok(None),
        "long_run" => {
            let budget: u64 = spec.parsed("output.oracle_budget")?;
            let eps0 = match built.eps0 {
                Some(e) => e,
                None => built
                    .problem
                    .eps0_for(&built.w0)
                    .filter(|e| *e > 0.0)
                    .ok_or_else(|| CliError::Config("output.oracle=long_run needs eps0 or a lower bound on f*".into()))?,
            };
            let r: OracleReport = long_run(&built.problem, &built.w0, eps0, budget).map_err(CliError::from_build)?;
            Ok(Some(OracleRef { method: "long_run".into(), fstar_upper: r.fstar, budget, certified: r.certified }))
        }
        v => Err(CliError::Config(format!("output.oracle = '{v}' (expected none or long_run)"))),
    }
}

pub fn summarize(spec: &RunSpec, ex: &Executed) -> CliResult<RunSummary> {
    let b = &ex.built;
    Ok(RunSummary {
        run_id: b.run_id.clone(),
        algo: b.plan.algo().to_string(),
        status: match ex.diverged_at {
            None => "ok".into(),
            Some(k) => format!("diverged at cum_iter {k}"),
        },
        problem: b.problem.name().to_string(),
        dim: b.problem.dim(),
        initial_objective: b.problem.value(&b.w0),
        final_objective: ex.trace.final_objective,
        best_objective: ex.trace.best_objective(),
        total_iters: ex.trace.total_iters(),
        eps0: b.eps0,
        initial_eta: initial_eta(&b.plan, b),
        w0: spec.get("solver.w0").to_string(),
        seed: spec.parsed("solver.seed")?,
        stages: ex.trace.stages.clone(),
        oracle: if ex.diverged_at.is_none() { oracle_ref(spec, b)? } else { None },
        config: spec.entries().clone(),
    })
}

/// Writes the trace CSV and summary JSON of an executed run.
pub fn write_artifacts(spec: &RunSpec, ex: &Executed) -> CliResult<RunSummary> {
    let dir = PathBuf::from(spec.get("output.dir"));
    let id = ex.built.run_id.clone();
    write_atomic(&csv_path(&dir, &id), &trace_csv(&id, ex.built.plan.algo(), &ex.trace)?)?;
    let summary = summarize(spec, &ex)?;
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    write_atomic(&summary_path(&dir, &id), &json)?;
    info!("{id}: final objective {:e} after {} iterations", summary.final_objective, summary.total_iters);
    Ok(summary)
}

/// Runs `spec` and writes its artifacts into `output.dir`. A divergence is
/// reported after the partial trace is written.
pub fn cmd_run(spec: &RunSpec) -> CliResult<RunSummary> {
    let ex = execute(spec)?;
    let summary = write_artifacts(spec, &ex)?;
    match ex.diverged_at {
        Some(cum_iter) => Err(CliError::Diverged { cum_iter }),
        None => Ok(summary),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(1e-300), "1e-300");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert_eq!(fmt_f64(2.5e20), "2.5e20");
    }
}
