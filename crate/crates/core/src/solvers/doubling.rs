use log::debug;

use crate::error::Result;
use crate::problem::ProblemInstance;

use super::schedule::{DoublingConfig, RestartConfig};
use super::sg::{check_start, rsg_call};
use super::trace::{Recorder, TraceOptions};
use super::SolveOutput;

/// R²SG: repeated RSG calls, each warm-started at the previous output with
/// t grown by `dcfg.growth`. `cfg` supplies α, ε₀, ε and the step scale; its
/// stage count and inner iteration count are replaced by `dcfg`.
pub fn r2sg(
    problem: &ProblemInstance,
    w0: &[f64],
    dcfg: &DoublingConfig,
    cfg: &RestartConfig,
    opts: TraceOptions,
) -> Result<SolveOutput> {
    check_start(problem, w0)?;
    dcfg.validate()?;
    let mut call_cfg = cfg.clone().with_stages(dcfg.stages);
    call_cfg.inner_iters = dcfg.t1;
    call_cfg.validate()?;

    let mut rec = Recorder::new(opts, problem.value(w0));
    let mut stage = 0;
    let mut w = w0.to_vec();
    for call in 1..=dcfg.max_calls {
        if call > 1 && dcfg.recalibrate_eps0 {
            call_cfg.eps0 = call_cfg.eps0 / call_cfg.alpha.powi(call_cfg.stages as i32) + cfg.target_eps;
        }
        let before = rec.best;
        w = rsg_call(problem, &w, &call_cfg, call, &mut stage, &mut rec)?;
        let after = rec.best;
        debug!("r2sg call {call}: t = {}, best {after:e}", call_cfg.inner_iters);
        if dcfg.rel_tol > 0.0 && call > 1 && before.is_finite() {
            let gain = (before - after) / before.abs().max(f64::MIN_POSITIVE);
            if gain < dcfg.rel_tol {
                break;
            }
        }
        call_cfg.inner_iters = dcfg.next_inner_iters(call_cfg.inner_iters);
    }
    let f = problem.value(&w);
    Ok(SolveOutput {
        trace: rec.finish(w.clone(), f),
        point: w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{sign0, Constraint, FnObjective};
    use crate::solvers::rsg;

    fn abs2() -> ProblemInstance {
        FnObjective::new(
            2,
            |w| (w[0] - 0.25).abs() + 2.0 * w[1].abs(),
            |w, g| {
                g[0] = sign0(w[0] - 0.25);
                g[1] = 2.0 * sign0(w[1]);
            },
            |q| (1.0 + 2f64.powf(q)).powf(1.0 / q),
        )
        .into_problem("abs2", Constraint::Unconstrained)
        .unwrap()
    }

    #[test]
    fn single_call_matches_rsg() {
        let p = abs2();
        let cfg = RestartConfig::new(2.0, 50, 3.0, 3.0 / 32.0).unwrap();
        let dcfg = DoublingConfig::new(50, 0.5, cfg.stages, 1).unwrap();
        let a = r2sg(&p, &[1.0, 1.0], &dcfg, &cfg, TraceOptions::every_iteration()).unwrap();
        let b = rsg(&p, &[1.0, 1.0], &cfg, TraceOptions::every_iteration()).unwrap();
        assert_eq!(a.point, b.point);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn theta_zero_quadruples_inner_iters() {
        let p = abs2();
        let cfg = RestartConfig::new(2.0, 1, 3.0, 3.0 / 4.0).unwrap();
        let dcfg = DoublingConfig::new(3, 0.0, 2, 3).unwrap().with_rel_tol(0.0);
        let out = r2sg(&p, &[1.0, 1.0], &dcfg, &cfg, TraceOptions::default()).unwrap();
        let t: Vec<u64> = out.trace.stages.iter().map(|s| s.inner_iters).collect();
        assert_eq!(t, vec![3, 3, 12, 12, 48, 48]);
        let calls: Vec<u32> = out.trace.stages.iter().map(|s| s.call).collect();
        assert_eq!(calls, vec![1, 1, 2, 2, 3, 3]);
        let stages: Vec<u32> = out.trace.stages.iter().map(|s| s.stage).collect();
        assert_eq!(stages, vec![1, 2, 3, 4, 5, 6]);
        // every call restarts from η₁
        assert_eq!(out.trace.stages[0].eta, out.trace.stages[2].eta);
    }

    #[test]
    fn plateau_stops_early() {
        // started at the minimizer, nothing can improve
        let p = abs2();
        let cfg = RestartConfig::new(2.0, 1, 1.0, 0.5).unwrap();
        let dcfg = DoublingConfig::new(4, 0.5, 1, 50).unwrap();
        let mut w = vec![0.25, 0.0];
        w[0] += 1e-3;
        let out = r2sg(&p, &w, &dcfg, &cfg, TraceOptions::default()).unwrap();
        assert!(out.trace.stages.last().unwrap().call < 50);
    }

    #[test]
    fn recalibration_shrinks_step() {
        let p = abs2();
        let cfg = RestartConfig::new(2.0, 1, 4.0, 0.25).unwrap();
        let dcfg = DoublingConfig::new(4, 0.5, 2, 2)
            .unwrap()
            .with_rel_tol(0.0)
            .with_recalibration(true);
        let out = r2sg(&p, &[1.0, 1.0], &dcfg, &cfg, TraceOptions::default()).unwrap();
        let s = &out.trace.stages;
        // second call uses ε₀' = 4/4 + 0.25
        assert!((s[2].eta / s[0].eta - 1.25 / 4.0).abs() < 1e-15);
    }
}
