use crate::error::{invalid, Result};
use crate::linalg::all_finite;
use crate::problem::ProblemInstance;

use super::sg::check_start;
use super::trace::{Recorder, SolveTrace, TraceOptions};

/// Projected SG with step η₀/√τ. Record τ holds f(w_{τ+1}); the best-so-far
/// column starts from f(w₀).
pub fn baseline_sg_decreasing(
    problem: &ProblemInstance,
    w0: &[f64],
    eta0: f64,
    iters: u64,
    opts: TraceOptions,
) -> Result<SolveTrace> {
    check_start(problem, w0)?;
    if !(eta0 > 0.0) || !eta0.is_finite() {
        return invalid(format!("eta0 must be positive, got {eta0}"));
    }
    if iters == 0 {
        return invalid("baseline SG needs at least one iteration");
    }
    let stride = opts.stride.for_stage(iters);
    let mut rec = Recorder::new(opts, problem.value(w0));
    let mut w = w0.to_vec();
    let mut g = vec![0.0; w.len()];
    for tau in 1..=iters {
        rec.cum_iter += 1;
        problem.subgradient_into(&w, &mut g);
        if !all_finite(&g) {
            return Err(rec.diverged());
        }
        let eta = eta0 / (tau as f64).sqrt();
        for (x, gi) in w.iter_mut().zip(&g) {
            *x -= eta * gi;
        }
        if !problem.is_unconstrained() {
            w = problem.project(&w);
        }
        if tau % stride == 0 || tau == iters {
            rec.record(1, tau, problem.value(&w), eta)?;
        }
    }
    let f = problem.value(&w);
    Ok(rec.finish(w, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{sign0, Constraint, FnObjective};

    fn abs1() -> ProblemInstance {
        FnObjective::new(1, |w| w[0].abs(), |w, g| g[0] = sign0(w[0]), |_| 1.0)
            .into_problem("abs", Constraint::Unconstrained)
            .unwrap()
    }

    #[test]
    fn abs_reaches_kink_and_stays() {
        let t = baseline_sg_decreasing(&abs1(), &[1.0], 1.0, 5, TraceOptions::every_iteration()).unwrap();
        assert!(t.records.iter().all(|r| r.objective == 0.0));
        assert_eq!(t.final_point, vec![0.0]);
    }

    #[test]
    fn one_step_uses_eta0() {
        let t = baseline_sg_decreasing(&abs1(), &[2.0], 0.5, 1, TraceOptions::every_iteration()).unwrap();
        assert_eq!(t.final_point, vec![1.5]);
        assert_eq!(t.records[0].eta, 0.5);
    }

    #[test]
    fn best_so_far_is_monotone() {
        let t = baseline_sg_decreasing(&abs1(), &[0.3], 0.7, 200, TraceOptions::every_iteration()).unwrap();
        assert!(t.records.windows(2).all(|w| w[1].best_objective <= w[0].best_objective));
        assert!(t.records.iter().any(|r| r.objective > r.best_objective));
    }
}
