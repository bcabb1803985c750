//! Dual averaging in (ℝ^d, ‖·‖_p) and its restarted wrapper.

use crate::error::{invalid, Error, Result};
use crate::linalg::{all_finite, lp_norm, PNormSpace};
use crate::problem::ProblemInstance;

use super::schedule::{LambdaMode, RestartConfig};
use super::sg::check_start;
use super::trace::{Recorder, StageSummary, TraceOptions};
use super::SolveOutput;

/// argmin_u gᵀu + ½‖u − w‖_p², in closed form:
/// u_i = w_i − ‖g‖_q^{(p−q)/p} sign(g_i) |g_i|^{q−1}.
pub fn pnorm_prox(w: &[f64], g: &[f64], p: f64) -> Result<Vec<f64>> {
    let space = PNormSpace::new(p)?;
    if w.len() != g.len() {
        return invalid("prox center and gradient lengths differ");
    }
    if !all_finite(g) || !all_finite(w) {
        return invalid("prox inputs must be finite");
    }
    let mut out = w.to_vec();
    prox_into(w, g, space, &mut out);
    Ok(out)
}

/// Writes the prox step into `out`. Works in units of max|g_i| so that the
/// exponent q − 1 (large when p is near 1) cannot overflow.
pub(crate) fn prox_into(w: &[f64], g: &[f64], space: PNormSpace, out: &mut [f64]) {
    let (p, q) = (space.p(), space.q());
    let m = g.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if m == 0.0 {
        out.copy_from_slice(w);
        return;
    }
    if p == 2.0 {
        for ((o, wi), gi) in out.iter_mut().zip(w).zip(g) {
            *o = wi - gi;
        }
        return;
    }
    // ‖g‖_q = m·‖r‖_q with r = g/m, and the step is m·‖r‖_q^{(p−q)/p}·|r_i|^{q−1}.
    let r_norm = lp_norm(g, q) / m;
    let scale = m * r_norm.powf((p - q) / p);
    for ((o, wi), gi) in out.iter_mut().zip(w).zip(g) {
        let r = gi.abs() / m;
        *o = wi - scale * gi.signum() * r.powf(q - 1.0);
        if *gi == 0.0 {
            *o = *wi;
        }
    }
}

/// Dual averaging with p-norm prox centered at w₁. Returns the λ-weighted
/// average of w_1..w_T. If a zero subgradient is met under
/// [`LambdaMode::InvGradNorm`] the iterate is optimal and is returned as is.
pub fn dap_run(
    problem: &ProblemInstance,
    w1: &[f64],
    eta: f64,
    iters: u64,
    space: PNormSpace,
    lambda_mode: LambdaMode,
    opts: TraceOptions,
) -> Result<SolveOutput> {
    require_unconstrained(problem)?;
    check_start(problem, w1)?;
    if !(eta > 0.0) || !eta.is_finite() {
        return invalid(format!("step size must be positive, got {eta}"));
    }
    if iters == 0 {
        return invalid("DA_p needs at least one iteration");
    }
    let mut rec = Recorder::new(opts, problem.value(w1));
    let avg = dap_stage(problem, w1, eta, iters, space, lambda_mode, 1, &mut rec)?;
    let f = problem.value(&avg.point);
    Ok(SolveOutput {
        trace: rec.finish(avg.point.clone(), f),
        point: avg.point,
    })
}

pub(crate) struct DapStageOutput {
    pub point: Vec<f64>,
    /// Λ_T; read by the tests.
    #[allow(dead_code)]
    pub lambda_sum: f64,
}

fn require_unconstrained(problem: &ProblemInstance) -> Result<()> {
    if problem.is_unconstrained() {
        Ok(())
    } else {
        Err(Error::UnsupportedConstraint(format!(
            "dual averaging prox is closed-form only on R^d; problem '{}' has {:?}",
            problem.name(),
            problem.constraint()
        )))
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn dap_stage(
    problem: &ProblemInstance,
    w1: &[f64],
    eta: f64,
    iters: u64,
    space: PNormSpace,
    lambda_mode: LambdaMode,
    stage: u32,
    rec: &mut Recorder,
) -> Result<DapStageOutput> {
    let d = problem.dim();
    let stride = rec.stride(iters);
    let mut w = w1.to_vec();
    let mut g = vec![0.0; d];
    let mut g_acc = vec![0.0; d];
    let mut step = vec![0.0; d];
    let mut w_acc = vec![0.0; d];
    let mut lambda_sum = 0.0;
    for t in 1..=iters {
        rec.cum_iter += 1;
        if t % stride == 0 || t == iters {
            rec.record(stage, t, problem.value(&w), eta)?;
        }
        problem.subgradient_into(&w, &mut g);
        if !all_finite(&g) {
            return Err(rec.diverged());
        }
        let lambda = match lambda_mode {
            LambdaMode::Unit => 1.0,
            LambdaMode::InvGradNorm => {
                let n = lp_norm(&g, space.q());
                if n == 0.0 {
                    rec.cum_iter += iters - t;
                    return Ok(DapStageOutput {
                        point: w,
                        lambda_sum: f64::INFINITY,
                    });
                }
                1.0 / n
            }
        };
        lambda_sum += lambda;
        for i in 0..d {
            w_acc[i] += lambda * w[i];
            g_acc[i] += lambda * g[i];
            step[i] = eta * g_acc[i];
        }
        prox_into(w1, &step, space, &mut w);
    }
    Ok(DapStageOutput {
        point: w_acc.into_iter().map(|s| s / lambda_sum).collect(),
        lambda_sum,
    })
}

/// Initial step of RSG-DA_p: ε₀(p−1)/(αG) for λ_t = 1/‖g‖_q, ε₀(p−1)/(αG²)
/// for λ_t = 1, with G bounding ‖𝒢(w)‖_q.
pub fn rsg_dap_initial_step(problem: &ProblemInstance, cfg: &RestartConfig) -> Result<f64> {
    let space = PNormSpace::new(cfg.norm_p)?;
    let g = problem.lipschitz_bound(space.q());
    if !(g > 0.0) || !g.is_finite() {
        return invalid(format!("Lipschitz bound must be positive and finite, got {g}"));
    }
    let base = cfg.eta_scale * cfg.eps0 * space.modulus() / cfg.alpha;
    Ok(match cfg.lambda_mode {
        LambdaMode::InvGradNorm => base / g,
        LambdaMode::Unit => base / (g * g),
    })
}

/// Restarted dual averaging: K stages of DA_p, step divided by α between
/// stages.
pub fn rsg_dap(
    problem: &ProblemInstance,
    w0: &[f64],
    cfg: &RestartConfig,
    opts: TraceOptions,
) -> Result<SolveOutput> {
    require_unconstrained(problem)?;
    check_start(problem, w0)?;
    cfg.validate()?;
    let space = PNormSpace::new(cfg.norm_p)?;
    let mut eta = rsg_dap_initial_step(problem, cfg)?;
    let mut rec = Recorder::new(opts, problem.value(w0));
    let mut w = w0.to_vec();
    for stage in 1..=cfg.stages {
        w = dap_stage(problem, &w, eta, cfg.inner_iters, space, cfg.lambda_mode, stage, &mut rec)?.point;
        rec.stage_done(StageSummary {
            call: 1,
            stage,
            inner_iters: cfg.inner_iters,
            cum_iter: rec.cum_iter,
            eta,
            objective: problem.value(&w),
        })?;
        eta /= cfg.alpha;
    }
    let f = problem.value(&w);
    Ok(SolveOutput {
        trace: rec.finish(w.clone(), f),
        point: w,
    })
}
