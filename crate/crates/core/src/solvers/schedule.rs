//! Stage counts, inner-iteration counts and the configuration blocks of the
//! restarted methods.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::problem::ErrorBoundParams;

/// Ceiling that does not round up values that are integers up to floating
/// point noise.
pub(crate) fn ceil_tol(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// K = ⌈log_α(ε₀/ε)⌉, at least 1.
pub fn compute_stage_count(eps0: f64, eps: f64, alpha: f64) -> Result<u32> {
    if !(eps > 0.0) {
        return invalid(format!("target accuracy must be positive, got {eps}"));
    }
    if !(eps <= eps0) {
        return invalid(format!("target accuracy {eps} exceeds eps0 {eps0}"));
    }
    if !(alpha > 1.0) {
        return invalid(format!("alpha must exceed 1, got {alpha}"));
    }
    let k = ceil_tol((eps0 / eps).ln() / alpha.ln());
    Ok((k as u32).max(1))
}

/// t = ⌈α²G²c²/ε^{2(1−θ)}⌉.
pub fn compute_inner_iters(g: f64, eb: ErrorBoundParams, eps: f64, alpha: f64) -> Result<u64> {
    if !(g > 0.0 && eps > 0.0 && alpha > 1.0) {
        return invalid(format!(
            "inner iteration count needs G > 0, eps > 0, alpha > 1 (got {g}, {eps}, {alpha})"
        ));
    }
    let t = alpha * alpha * g * g * eb.c() * eb.c() / eps.powf(2.0 * (1.0 - eb.theta()));
    if !t.is_finite() || t > u64::MAX as f64 {
        return invalid(format!("inner iteration count {t} is not representable"));
    }
    Ok((ceil_tol(t) as u64).max(1))
}

/// Weighting of subgradients inside dual averaging.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMode {
    /// λ_t = 1
    Unit,
    /// λ_t = 1/‖𝒢(w_t)‖_q
    InvGradNorm,
}

/// Parameters of RSG and RSG-DA_p.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartConfig {
    pub alpha: f64,
    pub stages: u32,
    pub inner_iters: u64,
    pub eps0: f64,
    pub target_eps: f64,
    /// Exponent of the dual-averaging prox; RSG always runs Euclidean SG.
    pub norm_p: f64,
    pub lambda_mode: LambdaMode,
    /// Multiplier on the initial step size (1 reproduces the analysed η₁).
    pub eta_scale: f64,
}

impl RestartConfig {
    /// Euclidean configuration with K derived from (ε₀, ε, α).
    pub fn new(alpha: f64, inner_iters: u64, eps0: f64, target_eps: f64) -> Result<Self> {
        let cfg = Self {
            alpha,
            stages: compute_stage_count(eps0, target_eps, alpha)?,
            inner_iters,
            eps0,
            target_eps,
            norm_p: 2.0,
            lambda_mode: LambdaMode::Unit,
            eta_scale: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_stages(mut self, stages: u32) -> Self {
        self.stages = stages;
        self
    }

    pub fn with_norm(mut self, p: f64, mode: LambdaMode) -> Self {
        self.norm_p = p;
        self.lambda_mode = mode;
        self
    }

    pub fn with_eta_scale(mut self, scale: f64) -> Self {
        self.eta_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0) {
            return invalid(format!("alpha must exceed 1, got {}", self.alpha));
        }
        if self.stages == 0 {
            return invalid("at least one stage is required");
        }
        if self.inner_iters == 0 {
            return invalid("at least one inner iteration is required");
        }
        if !(self.eps0 > 0.0) || !self.eps0.is_finite() {
            return invalid(format!("eps0 must be positive and finite, got {}", self.eps0));
        }
        if !(self.target_eps > 0.0 && self.target_eps <= self.eps0) {
            return invalid(format!(
                "target eps must lie in (0, eps0], got {} with eps0 {}",
                self.target_eps, self.eps0
            ));
        }
        if !(self.norm_p > 1.0 && self.norm_p <= 2.0) {
            return invalid(format!("norm_p must lie in (1, 2], got {}", self.norm_p));
        }
        if !(self.eta_scale > 0.0) || !self.eta_scale.is_finite() {
            return invalid(format!("eta_scale must be positive, got {}", self.eta_scale));
        }
        Ok(())
    }
}

/// Parameters of the R²SG outer loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingConfig {
    pub t1: u64,
    pub theta: f64,
    /// Factor 2^{2(1−θ)} applied to t between calls.
    pub growth: f64,
    /// Stages per RSG call (the restart period of the experiment protocol).
    pub stages: u32,
    pub max_calls: u32,
    /// Stop once a full call improves the best objective by less than this
    /// relative amount. 0 disables the rule.
    pub rel_tol: f64,
    /// ε₀ ← ε₀/α^K + ε before every call after the first.
    pub recalibrate_eps0: bool,
}

impl DoublingConfig {
    pub fn new(t1: u64, theta: f64, stages: u32, max_calls: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&theta) {
            return invalid(format!("theta must lie in [0, 1), got {theta}"));
        }
        let cfg = Self {
            t1,
            theta,
            growth: 2f64.powf(2.0 * (1.0 - theta)),
            stages,
            max_calls,
            rel_tol: 1e-10,
            recalibrate_eps0: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Specifies the growth factor directly; θ = 1 − log₂(growth)/2.
    pub fn with_growth(t1: u64, growth: f64, stages: u32, max_calls: u32) -> Result<Self> {
        if !(growth > 1.0 && growth <= 4.0) {
            return invalid(format!("growth factor must lie in (1, 4], got {growth}"));
        }
        let cfg = Self {
            t1,
            theta: 1.0 - growth.log2() / 2.0,
            growth,
            stages,
            max_calls,
            rel_tol: 1e-10,
            recalibrate_eps0: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Experiment protocol for robust regression: restart every 5 stages,
    /// t grows by 1.15 for the absolute loss and by 1.5 for p = 1.5.
    pub fn regression_protocol(t1: u64, p_loss: f64, max_calls: u32) -> Result<Self> {
        let growth = if p_loss > 1.0 { 1.5 } else { 1.15 };
        Self::with_growth(t1, growth, 5, max_calls)
    }

    /// Experiment protocol for GFlasso SVM: t₁ = 10³ by default, restart
    /// every 10 stages, t grows by 1.15.
    pub fn gflasso_protocol(t1: u64, max_calls: u32) -> Result<Self> {
        Self::with_growth(t1, 1.15, 10, max_calls)
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_recalibration(mut self, on: bool) -> Self {
        self.recalibrate_eps0 = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.t1 == 0 {
            return invalid("t1 must be at least 1");
        }
        if !(0.0..1.0).contains(&self.theta) {
            return invalid(format!("theta must lie in [0, 1), got {}", self.theta));
        }
        if !(self.growth > 1.0) {
            return invalid(format!("growth factor must exceed 1, got {}", self.growth));
        }
        if self.stages == 0 || self.max_calls == 0 {
            return invalid("stages and max_calls must be positive");
        }
        if !(self.rel_tol >= 0.0) {
            return invalid("rel_tol must be non-negative");
        }
        Ok(())
    }

    /// t_{s+1} = ⌈t_s · growth⌉.
    pub fn next_inner_iters(&self, t: u64) -> u64 {
        (ceil_tol(t as f64 * self.growth) as u64).max(t + 1)
    }

    /// Inner iteration counts of the first `n` calls.
    pub fn schedule(&self, n: usize) -> Vec<u64> {
        std::iter::successors(Some(self.t1), |&t| Some(self.next_inner_iters(t)))
            .take(n)
            .collect()
    }
}
