use crate::error::{invalid, Result};
use crate::linalg::all_finite;
use crate::problem::ProblemInstance;

use super::schedule::RestartConfig;
use super::trace::{Recorder, StageSummary, TraceOptions};
use super::SolveOutput;

const FEASIBILITY_TOL: f64 = 1e-12;

pub(crate) fn check_start(problem: &ProblemInstance, w: &[f64]) -> Result<()> {
    if w.len() != problem.dim() {
        return invalid(format!(
            "start point has length {} but the problem has dimension {}",
            w.len(),
            problem.dim()
        ));
    }
    if !all_finite(w) {
        return invalid("start point has non-finite entries");
    }
    if !problem.is_feasible(w, FEASIBILITY_TOL) {
        return invalid("start point is not feasible");
    }
    Ok(())
}

/// Projected subgradient descent with a fixed step; returns the average of
/// w_1..w_T. The trace logs f(w_t) before each update.
pub fn sg_run(
    problem: &ProblemInstance,
    w1: &[f64],
    eta: f64,
    iters: u64,
    opts: TraceOptions,
) -> Result<SolveOutput> {
    check_start(problem, w1)?;
    if !(eta > 0.0) || !eta.is_finite() {
        return invalid(format!("step size must be positive, got {eta}"));
    }
    if iters == 0 {
        return invalid("SG needs at least one iteration");
    }
    let mut rec = Recorder::new(opts, problem.value(w1));
    let avg = sg_stage(problem, w1, eta, iters, 1, &mut rec)?;
    let f = problem.value(&avg);
    Ok(SolveOutput {
        trace: rec.finish(avg.clone(), f),
        point: avg,
    })
}

pub(crate) fn sg_stage(
    problem: &ProblemInstance,
    w1: &[f64],
    eta: f64,
    iters: u64,
    stage: u32,
    rec: &mut Recorder,
) -> Result<Vec<f64>> {
    let d = problem.dim();
    let stride = rec.stride(iters);
    let mut w = w1.to_vec();
    let mut g = vec![0.0; d];
    let mut sum = vec![0.0; d];
    for t in 1..=iters {
        rec.cum_iter += 1;
        if t % stride == 0 || t == iters {
            rec.record(stage, t, problem.value(&w), eta)?;
        }
        for (s, x) in sum.iter_mut().zip(&w) {
            *s += x;
        }
        problem.subgradient_into(&w, &mut g);
        if !all_finite(&g) {
            return Err(rec.diverged());
        }
        for (x, gi) in w.iter_mut().zip(&g) {
            *x -= eta * gi;
        }
        if !problem.is_unconstrained() {
            w = problem.project(&w);
        }
    }
    let n = iters as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}

/// Restarted subgradient: K stages of SG with t iterations each, starting
/// at η₁ = ε₀/(αG²) and dividing the step by α between stages.
pub fn rsg(
    problem: &ProblemInstance,
    w0: &[f64],
    cfg: &RestartConfig,
    opts: TraceOptions,
) -> Result<SolveOutput> {
    check_start(problem, w0)?;
    cfg.validate()?;
    let mut rec = Recorder::new(opts, problem.value(w0));
    let mut stage = 0;
    let w = rsg_call(problem, w0, cfg, 1, &mut stage, &mut rec)?;
    let f = problem.value(&w);
    Ok(SolveOutput {
        trace: rec.finish(w.clone(), f),
        point: w,
    })
}

/// Initial step size of a Euclidean RSG call.
pub fn rsg_initial_step(problem: &ProblemInstance, cfg: &RestartConfig) -> Result<f64> {
    let g = problem.lipschitz_bound(2.0);
    if !(g > 0.0) || !g.is_finite() {
        return invalid(format!("Lipschitz bound must be positive and finite, got {g}"));
    }
    Ok(cfg.eta_scale * cfg.eps0 / (cfg.alpha * g * g))
}

pub(crate) fn rsg_call(
    problem: &ProblemInstance,
    w0: &[f64],
    cfg: &RestartConfig,
    call: u32,
    stage_counter: &mut u32,
    rec: &mut Recorder,
) -> Result<Vec<f64>> {
    let mut eta = rsg_initial_step(problem, cfg)?;
    let mut w = w0.to_vec();
    for _ in 0..cfg.stages {
        *stage_counter += 1;
        w = sg_stage(problem, &w, eta, cfg.inner_iters, *stage_counter, rec)?;
        rec.stage_done(StageSummary {
            call,
            stage: *stage_counter,
            inner_iters: cfg.inner_iters,
            cum_iter: rec.cum_iter,
            eta,
            objective: problem.value(&w),
        })?;
        eta /= cfg.alpha;
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::problem::{sign0, Constraint, FnObjective};

    fn abs1() -> ProblemInstance {
        FnObjective::new(1, |w| w[0].abs(), |w, g| g[0] = sign0(w[0]), |_| 1.0)
            .into_problem("abs", Constraint::Unconstrained)
            .unwrap()
    }

    fn half_sq(d: usize) -> ProblemInstance {
        FnObjective::new(
            d,
            |w| 0.5 * w.iter().map(|x| x * x).sum::<f64>(),
            |w, g| g.copy_from_slice(w),
            |_| 1.0,
        )
        .into_problem("half_sq", Constraint::Unconstrained)
        .unwrap()
    }

    #[test]
    fn sg_on_abs_hand_simulated() {
        let out = sg_run(&abs1(), &[1.0], 0.1, 10, TraceOptions::every_iteration()).unwrap();
        let iterates: Vec<f64> = out.trace.records.iter().map(|r| r.objective).collect();
        let expected: Vec<f64> = (0..10).map(|k| 1.0 - 0.1 * k as f64).collect();
        for (a, b) in iterates.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((out.point[0] - 0.55).abs() < 1e-12);
    }

    #[test]
    fn sg_single_iteration_returns_start() {
        let out = sg_run(&abs1(), &[0.7], 0.3, 1, TraceOptions::default()).unwrap();
        assert_eq!(out.point, vec![0.7]);
    }

    #[test]
    fn sg_two_gradient_steps() {
        let out = sg_run(&half_sq(2), &[1.0, 0.0], 0.5, 2, TraceOptions::every_iteration()).unwrap();
        assert_eq!(out.point, vec![0.75, 0.0]);
        assert_eq!(out.trace.records[1].objective, 0.125);
    }

    #[test]
    fn sg_rejects_infeasible_start() {
        let p = abs1().with_constraint(Constraint::Box { lo: vec![0.0], hi: vec![1.0] }).unwrap();
        assert!(matches!(
            sg_run(&p, &[2.0], 0.1, 3, TraceOptions::default()),
            Err(Error::InvalidInput(_))
        ));
        assert!(sg_run(&p, &[0.5], 0.0, 3, TraceOptions::default()).is_err());
    }

    #[test]
    fn sg_divergence_keeps_partial_trace() {
        let p = FnObjective::new(1, |w| w[0].abs(), |_, g| g[0] = f64::NAN, |_| 1.0)
            .into_problem("nan", Constraint::Unconstrained)
            .unwrap();
        match sg_run(&p, &[-1.0], 1.0, 5, TraceOptions::every_iteration()) {
            Err(Error::Divergence { trace, cum_iter }) => {
                assert_eq!(cum_iter, 1);
                assert_eq!(trace.records.len(), 1);
            }
            Ok(o) => panic!("expected divergence, got {:?}", o.point),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn rsg_single_stage_equals_sg() {
        let p = abs1();
        let cfg = RestartConfig::new(2.0, 7, 1.0, 1.0).unwrap();
        assert_eq!(cfg.stages, 1);
        let a = rsg(&p, &[0.9], &cfg, TraceOptions::every_iteration()).unwrap();
        let b = sg_run(&p, &[0.9], 1.0 / 2.0, 7, TraceOptions::every_iteration()).unwrap();
        assert_eq!(a.point, b.point);
        let fa: Vec<f64> = a.trace.records.iter().map(|r| r.objective).collect();
        let fb: Vec<f64> = b.trace.records.iter().map(|r| r.objective).collect();
        assert_eq!(fa, fb);
    }

    #[test]
    fn rsg_abs_stage_bounds() {
        // Stage-by-stage hand simulation (ε₀ = 1, G = 1, α = 2, t = 16).
        let cfg = RestartConfig::new(2.0, 16, 1.0, 1.0 / 64.0).unwrap();
        assert_eq!(cfg.stages, 6);
        let out = rsg(&abs1(), &[1.0], &cfg, TraceOptions::every_iteration()).unwrap();
        assert_eq!(out.trace.records.len(), 6 * 16);
        for s in &out.trace.stages {
            let bound = 0.5f64.powi(s.stage as i32) + 1.0 / 64.0;
            assert!(s.objective <= bound, "stage {} gap {} > {}", s.stage, s.objective, bound);
        }
        // first stage: iterates 1, 0.5, 0, 0, ... → average 1.5/16
        assert!((out.trace.stages[0].objective - 1.5 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn rsg_step_schedule_is_geometric() {
        let p = half_sq(3);
        let cfg = RestartConfig::new(2.0, 5, 2.0, 2.0 / 1024.0).unwrap();
        let out = rsg(&p, &[1.0, -1.0, 0.5], &cfg, TraceOptions::every_iteration()).unwrap();
        for s in &out.trace.stages {
            let expect = cfg.eps0 / (cfg.alpha.powi(s.stage as i32) * 1.0);
            assert_eq!(s.eta, expect);
        }
        let cum: Vec<u64> = out.trace.records.iter().map(|r| r.cum_iter).collect();
        assert!(cum.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(out.trace.final_objective, p.value(&out.trace.final_point));
    }

    #[test]
    fn stride_subsamples_records() {
        let p = abs1();
        let out = sg_run(&p, &[1.0], 1e-4, 5000, TraceOptions::default()).unwrap();
        assert_eq!(out.trace.records.len(), 1000);
        let opts = TraceOptions { stride: super::super::trace::Stride::Every(7), wallclock: false };
        let out = sg_run(&p, &[1.0], 1e-4, 20, opts).unwrap();
        let iters: Vec<u64> = out.trace.records.iter().map(|r| r.iter).collect();
        assert_eq!(iters, vec![7, 14, 20]);
    }
}
