//! `rsg compare`: several runs on one problem, merged by cumulative
//! iteration.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use log::warn;
use serde::Serialize;

use crate::config::RunSpec;
use crate::error::{CliError, CliResult};
use crate::run::{execute, fmt_f64, write_artifacts, write_atomic, Executed, RunSummary};

#[derive(Clone, Debug, Serialize)]
pub struct CompareSummary {
    pub runs: Vec<RunSummary>,
    pub thresholds: Vec<f64>,
    /// iterations_to_reach[run_id][k] for thresholds[k]; None when never reached.
    pub iterations_to_reach: BTreeMap<String, Vec<Option<u64>>>,
}

pub struct CompareOutput {
    pub summary: CompareSummary,
    pub merged_csv: Vec<u8>,
    pub thresholds_csv: Vec<u8>,
}

pub fn check_shared_problem(specs: &[RunSpec]) -> CliResult<()> {
    let Some(first) = specs.first() else {
        return Err(CliError::Config("compare needs at least one config".into()));
    };
    let reference = first.problem_block();
    for s in &specs[1..] {
        let block = s.problem_block();
        if let Some((k, v)) = block.iter().find(|(k, v)| reference.get(*k) != Some(*v)) {
            return Err(CliError::Config(format!(
                "runs '{}' and '{}' disagree on {k} ('{}' vs '{v}')",
                first.run_id(),
                s.run_id(),
                reference[k]
            )));
        }
    }
    let mut seen = BTreeSet::new();
    for s in specs {
        if !seen.insert(s.run_id()) {
            return Err(CliError::Config(format!("duplicate run_id '{}'", s.run_id())));
        }
    }
    Ok(())
}

/// Executes the specs on up to `threads` worker threads; results keep the
/// input order.
fn execute_all(specs: &[RunSpec], threads: usize) -> Vec<CliResult<Executed>> {
    let threads = threads.max(1);
    let mut out = Vec::with_capacity(specs.len());
    for chunk in specs.chunks(threads) {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunk.iter().map(|s| scope.spawn(move || execute(s))).collect();
            for h in handles {
                out.push(h.join().unwrap_or_else(|_| Err(CliError::Invariant("worker thread panicked".into()))));
            }
        });
    }
    out
}

/// f* + (f₀ − f*)·10^{−k}, k = 1..5, from the best and initial objectives
/// across runs.
pub fn default_thresholds(runs: &[RunSummary]) -> Vec<f64> {
    let best = runs.iter().map(|r| r.best_objective).fold(f64::INFINITY, f64::min);
    let start = runs.iter().map(|r| r.initial_objective).fold(f64::NEG_INFINITY, f64::max);
    if !(start > best) {
        return vec![best];
    }
    (1..=5).map(|k| best + (start - best) * 10f64.powi(-k)).collect()
}

fn merged_csv(ids: &[String], execs: &[Executed]) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    let mut header = vec!["cum_iter".to_string()];
    header.extend(ids.iter().cloned());
    w.write_record(&header)?;
    let mut cums: BTreeSet<u64> = execs.iter().flat_map(|e| e.trace.records.iter().map(|r| r.cum_iter)).collect();
    cums.insert(0);
    let mut cursor = vec![0usize; execs.len()];
    let mut best: Vec<f64> = execs.iter().map(|e| e.built.problem.value(&e.built.w0)).collect();
    for c in cums {
        let mut row = vec![c.to_string()];
        for (j, e) in execs.iter().enumerate() {
            let recs = &e.trace.records;
            while cursor[j] < recs.len() && recs[cursor[j]].cum_iter <= c {
                best[j] = best[j].min(recs[cursor[j]].best_objective);
                cursor[j] += 1;
            }
            let ended = e.trace.total_iters() < c;
            row.push(if ended { String::new() } else { fmt_f64(best[j]) });
        }
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

fn thresholds_csv(ids: &[String], thresholds: &[f64], table: &BTreeMap<String, Vec<Option<u64>>>) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    let mut header = vec!["threshold".to_string()];
    header.extend(ids.iter().cloned());
    w.write_record(&header)?;
    for (k, t) in thresholds.iter().enumerate() {
        let mut row = vec![fmt_f64(*t)];
        for id in ids {
            row.push(table[id][k].map(|n| n.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

/// Runs every spec, writes per-run artifacts, then `compare.merged.csv`,
/// `compare.thresholds.csv` and `compare.summary.json` into `out`.
pub fn cmd_compare(specs: &[RunSpec], thresholds: Option<Vec<f64>>, out: &Path, threads: usize) -> CliResult<CompareOutput> {
    check_shared_problem(specs)?;
    let mut execs = Vec::with_capacity(specs.len());
    for r in execute_all(specs, threads) {
        execs.push(r?);
    }
    let mut runs = Vec::with_capacity(specs.len());
    for (s, e) in specs.iter().zip(&execs) {
        runs.push(write_artifacts(s, e)?);
    }
    let ids: Vec<String> = runs.iter().map(|r| r.run_id.clone()).collect();
    let thresholds = thresholds.unwrap_or_else(|| default_thresholds(&runs));
    let table: BTreeMap<String, Vec<Option<u64>>> = execs
        .iter()
        .zip(&ids)
        .map(|(e, id)| (id.clone(), thresholds.iter().map(|t| e.trace.iters_to_reach(*t)).collect()))
        .collect();
    let merged = merged_csv(&ids, &execs)?;
    let tcsv = thresholds_csv(&ids, &thresholds, &table)?;
    let summary = CompareSummary { runs, thresholds, iterations_to_reach: table };
    write_atomic(&PathBuf::from(out).join("compare.merged.csv"), &merged)?;
    write_atomic(&out.join("compare.thresholds.csv"), &tcsv)?;
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    write_atomic(&out.join("compare.summary.json"), &json)?;
    if let Some((e, id)) = execs.iter().zip(&ids).find(|(e, _)| e.diverged_at.is_some()) {
        warn!("run {id} diverged");
        return Err(CliError::Diverged { cum_iter: e.diverged_at.unwrap_or(0) });
    }
    Ok(CompareOutput { summary, merged_csv: merged, thresholds_csv: tcsv })
}
