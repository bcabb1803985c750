//! Turns a [`RunSpec`] into a problem, a start point and a solver plan.

use std::fs::File;
use std::io::BufReader;
use std::sync::Arc;

use rsg_core::data::{binarize_labels, gaussian_start, load_edge_list, parse_libsvm, synth_classification, synth_regression};
use rsg_core::linalg::{norm2, PNormSpace};
use rsg_core::problems::{
    gflasso_svm, lovasz_problem, piecewise_linear_erm, robust_regression, CutFunction, Dataset, GFlassoGraph, Loss,
    Reg, RegressionRegion,
};
use rsg_core::solvers::{compute_stage_count, DoublingConfig, LambdaMode, RestartConfig, Stride, TraceOptions};
use rsg_core::ProblemInstance;

use crate::config::RunSpec;
use crate::error::{CliError, CliResult};

#[derive(Clone, Debug)]
pub enum SolverPlan {
    Sg { eta: f64, iters: u64 },
    Rsg(RestartConfig),
    RsgDap(RestartConfig),
    R2sg { dcfg: DoublingConfig, cfg: RestartConfig },
    Baseline { eta0: f64, iters: u64 },
}

impl SolverPlan {
    pub fn algo(&self) -> &'static str {
        match self {
            SolverPlan::Sg { .. } => "sg",
            SolverPlan::Rsg(_) => "rsg",
            SolverPlan::RsgDap(_) => "rsg_dap",
            SolverPlan::R2sg { .. } => "r2sg",
            SolverPlan::Baseline { .. } => "baseline_sg",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BuiltRun {
    pub run_id: String,
    pub problem: ProblemInstance,
    pub w0: Vec<f64>,
    pub plan: SolverPlan,
    pub opts: TraceOptions,
    /// ε₀ of the restarted methods, when derived or given.
    pub eps0: Option<f64>,
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn parse_bool(spec: &RunSpec, key: &str) -> CliResult<bool> {
    match spec.get(key) {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        v => Err(cfg_err(format!("{key} = '{v}' is not a boolean"))),
    }
}

fn is_regression_loss(spec: &RunSpec) -> bool {
    match spec.get("problem.kind") {
        "robust_regression" => true,
        "piecewise_linear" => spec.get("problem.loss") != "hinge",
        _ => false,
    }
}

/// Dataset of the problem block (not used by `lovasz_cut`).
pub fn load_dataset(spec: &RunSpec) -> CliResult<Dataset> {
    let source = spec.get("problem.data");
    let mut data = if source == "synthetic" {
        let n = spec.parsed("problem.synth.n")?;
        let d = spec.parsed("problem.synth.d")?;
        let seed = spec.parsed("problem.synth.seed")?;
        let out = if is_regression_loss(spec) {
            synth_regression(n, d, spec.parsed("problem.synth.noise")?, seed)
        } else {
            synth_classification(n, d, spec.parsed("problem.synth.margin")?, seed)
        };
        out.map_err(CliError::from_build)?.data
    } else {
        let file = File::open(source).map_err(|e| CliError::Data(format!("cannot open {source}: {e}")))?;
        parse_libsvm(BufReader::new(file), spec.optional("problem.d")?)
            .map_err(|e| CliError::Data(format!("{source}: {e}")))?
    };
    if let Some(pos) = spec.optional::<f64>("problem.positive_class")? {
        data = binarize_labels(&data, pos);
    }
    match spec.get("problem.scale") {
        "none" => {}
        "max_abs" => data = data.scaled_max_abs(),
        v => return Err(cfg_err(format!("problem.scale = '{v}' (expected none or max_abs)"))),
    }
    Ok(data)
}

fn loss(spec: &RunSpec) -> CliResult<Loss> {
    Ok(match spec.get("problem.loss") {
        "hinge" => Loss::Hinge,
        "absolute" => Loss::Absolute,
        "eps_insensitive" => Loss::EpsInsensitive(spec.parsed("problem.eps_ins")?),
        v => return Err(cfg_err(format!("problem.loss = '{v}'"))),
    })
}

fn reg(spec: &RunSpec) -> CliResult<Reg> {
    let lambda = || spec.parsed::<f64>("problem.lambda");
    let radius = || spec.parsed::<f64>("problem.radius");
    Ok(match spec.get("problem.reg") {
        "none" => Reg::None,
        "l1" => Reg::L1(lambda()?),
        "linf" => Reg::Linf(lambda()?),
        "l1_ball" => Reg::L1Ball(radius()?),
        "linf_ball" => Reg::LinfBall(radius()?),
        v => return Err(cfg_err(format!("problem.reg = '{v}'"))),
    })
}

fn graph(spec: &RunSpec, data: &Dataset) -> CliResult<GFlassoGraph> {
    let d = data.d();
    match spec.get("problem.graph") {
        "chain" => GFlassoGraph::new(d, (1..d).map(|i| (i - 1, i, 1.0)).collect()).map_err(CliError::from_build),
        "correlation" => GFlassoGraph::from_correlation_threshold(data, spec.parsed("problem.graph_cutoff")?)
            .map_err(CliError::from_build),
        path => {
            let file = File::open(path).map_err(|e| CliError::Data(format!("cannot open {path}: {e}")))?;
            load_edge_list(BufReader::new(file), d).map_err(|e| CliError::Data(format!("{path}: {e}")))
        }
    }
}

fn start_point(spec: &RunSpec, d: usize) -> CliResult<Vec<f64>> {
    match spec.get("solver.w0") {
        "zeros" => Ok(vec![0.0; d]),
        "gaussian" => Ok(gaussian_start(d, spec.parsed("solver.seed")?)),
        v => Err(cfg_err(format!("solver.w0 = '{v}' (expected zeros or gaussian)"))),
    }
}

/// Problem and (projected) start point.
pub fn build_problem(spec: &RunSpec) -> CliResult<(ProblemInstance, Vec<f64>)> {
    let kind = spec.get("problem.kind");
    let (problem, w0) = if kind == "lovasz_cut" {
        let d = spec.parsed("problem.lovasz.d")?;
        let f = CutFunction::random(
            d,
            spec.parsed("problem.lovasz.density")?,
            spec.parsed("problem.lovasz.modular_scale")?,
            spec.parsed("problem.lovasz.seed")?,
        )
        .map_err(CliError::from_build)?;
        (lovasz_problem(Arc::new(f)).map_err(CliError::from_build)?, start_point(spec, d)?)
    } else {
        let data = load_dataset(spec)?;
        let w0 = start_point(spec, data.d())?;
        let problem = match kind {
            "piecewise_linear" => piecewise_linear_erm(&data, loss(spec)?, reg(spec)?),
            "gflasso_svm" => gflasso_svm(&data, &graph(spec, &data)?, spec.parsed("problem.lambda")?),
            "robust_regression" => {
                let radius = spec.optional("problem.region_radius")?.unwrap_or(10.0 * norm2(&w0).max(1.0));
                let region = RegressionRegion { radius, constrain: parse_bool(spec, "problem.constrain_region")? };
                robust_regression(&data, spec.parsed("problem.p_loss")?, region)
            }
            v => return Err(cfg_err(format!("problem.kind = '{v}'"))),
        }
        .map_err(CliError::from_build)?;
        (problem, w0)
    };
    let problem = match spec.optional::<f64>("problem.fstar_lower_bound")? {
        Some(lb) => problem.with_fstar_lower_bound(lb),
        None => problem,
    };
    let w0 = problem.project(&w0);
    Ok((problem, w0))
}

fn restart_config(spec: &RunSpec, problem: &ProblemInstance, eps0: f64, t: u64) -> CliResult<RestartConfig> {
    let alpha: f64 = spec.parsed("solver.alpha")?;
    let stages: Option<u32> = spec.optional("solver.stages")?;
    let target: Option<f64> = spec.optional("solver.target_eps")?;
    let (k, eps) = match (stages, target) {
        (Some(k), Some(e)) => (k, e),
        (Some(k), None) => (k, eps0 / alpha.powi(k as i32)),
        (None, Some(e)) => (compute_stage_count(eps0, e, alpha).map_err(CliError::from_build)?, e),
        (None, None) => (10, eps0 / alpha.powi(10)),
    };
    let p = match spec.get("solver.norm_p") {
        "auto" => PNormSpace::for_dimension(problem.dim()).map_err(CliError::from_build)?.p(),
        _ => spec.parsed("solver.norm_p")?,
    };
    let mode = match spec.get("solver.lambda_mode") {
        "unit" => LambdaMode::Unit,
        "inv_grad_norm" => LambdaMode::InvGradNorm,
        v => return Err(cfg_err(format!("solver.lambda_mode = '{v}'"))),
    };
    let cfg = RestartConfig {
        alpha,
        stages: k,
        inner_iters: t,
        eps0,
        target_eps: eps,
        norm_p: p,
        lambda_mode: mode,
        eta_scale: spec.parsed("solver.eta_scale")?,
    };
    cfg.validate().map_err(CliError::from_build)?;
    Ok(cfg)
}

fn eps0(spec: &RunSpec, problem: &ProblemInstance, w0: &[f64]) -> CliResult<f64> {
    let e = match spec.optional::<f64>("solver.eps0")? {
        Some(e) => e,
        None => problem.eps0_for(w0).ok_or_else(|| {
            cfg_err("solver.eps0 is empty and the problem declares no lower bound on f*; set problem.fstar_lower_bound")
        })?,
    };
    if !(e > 0.0) || !e.is_finite() {
        return Err(cfg_err(format!("eps0 = {e}; it must be positive (is w0 already optimal?)")));
    }
    Ok(e)
}

fn trace_options(spec: &RunSpec) -> CliResult<TraceOptions> {
    let stride = match spec.get("output.stride") {
        "auto" => Stride::Auto,
        _ => Stride::Every(spec.parsed("output.stride")?),
    };
    Ok(TraceOptions { stride, wallclock: parse_bool(spec, "output.wallclock")? })
}

pub fn build(spec: &RunSpec) -> CliResult<BuiltRun> {
    let (problem, w0) = build_problem(spec)?;
    let t: u64 = spec.parsed("solver.t")?;
    let algo = spec.get("solver.algo");
    let mut eps = None;
    let plan = match algo {
        "sg" => SolverPlan::Sg { eta: spec.parsed("solver.eta")?, iters: spec.parsed("solver.iters")? },
        "baseline_sg" => SolverPlan::Baseline { eta0: spec.parsed("solver.eta0")?, iters: spec.parsed("solver.iters")? },
        "rsg" | "rsg_dap" | "r2sg" => {
            let e = eps0(spec, &problem, &w0)?;
            eps = Some(e);
            if algo == "r2sg" {
                let k: u32 = spec.parsed("solver.restart_every")?;
                let mut s = spec.clone();
                if s.get("solver.stages").is_empty() && s.get("solver.target_eps").is_empty() {
                    s.set("solver.stages", &k.to_string())?;
                }
                let cfg = restart_config(&s, &problem, e, t)?;
                let max_calls = spec.parsed("solver.max_calls")?;
                let dcfg = match (spec.optional::<f64>("solver.theta")?, spec.optional::<f64>("solver.growth")?) {
                    (Some(_), Some(_)) => return Err(cfg_err("set at most one of solver.theta and solver.growth")),
                    (Some(theta), None) => DoublingConfig::new(t, theta, k, max_calls),
                    (None, Some(g)) => DoublingConfig::with_growth(t, g, k, max_calls),
                    (None, None) => {
                        let robust = spec.get("problem.kind") == "robust_regression";
                        DoublingConfig::with_growth(t, if robust { 1.5 } else { 1.15 }, k, max_calls)
                    }
                }
                .map_err(CliError::from_build)?
                .with_rel_tol(spec.parsed("solver.rel_tol")?)
                .with_recalibration(parse_bool(spec, "solver.recalibrate")?);
                SolverPlan::R2sg { dcfg, cfg }
            } else {
                let cfg = restart_config(spec, &problem, e, t)?;
                if algo == "rsg" {
                    SolverPlan::Rsg(cfg)
                } else {
                    SolverPlan::RsgDap(cfg)
                }
            }
        }
        v => return Err(cfg_err(format!("solver.algo = '{v}'"))),
    };
    Ok(BuiltRun { run_id: spec.run_id(), problem, w0, plan, opts: trace_options(spec)?, eps0: eps })
}
