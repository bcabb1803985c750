//! The oracle contract shared by every solver: objective value, one
//! subgradient, a Euclidean projection onto the feasible set and an analytic
//! bound on subgradient norms.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{clamp_box, l1_ball, l2_ball};

/// First-order oracle for a convex function on ℝ^d.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, w: &[f64]) -> f64;

    /// Writes one element of ∂f(w) into `out` (overwriting it).
    fn subgradient(&self, w: &[f64], out: &mut [f64]);

    /// Analytic bound G on ‖g‖_q for every subgradient the oracle returns on
    /// the feasible set.
    fn lipschitz_bound(&self, q: f64) -> f64;
}

/// Feasible set Ω.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Constraint {
    Unconstrained,
    Box { lo: Vec<f64>, hi: Vec<f64> },
    L1Ball { radius: f64 },
    LinfBall { radius: f64 },
    L2Ball { radius: f64 },
}

impl Constraint {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Constraint::Unconstrained => Ok(()),
            Constraint::Box { lo, hi } => {
                if lo.len() != dim || hi.len() != dim {
                    return invalid("box bounds do not match the problem dimension");
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
                    return invalid("box bounds with lo > hi");
                }
                Ok(())
            }
            Constraint::L1Ball { radius }
            | Constraint::LinfBall { radius }
            | Constraint::L2Ball { radius } => {
                if !(*radius > 0.0) {
                    return invalid(format!("ball radius must be positive, got {radius}"));
                }
                Ok(())
            }
        }
    }

    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        match self {
            Constraint::Unconstrained => w.to_vec(),
            Constraint::Box { lo, hi } => clamp_box(w, lo, hi),
            Constraint::L1Ball { radius } => l1_ball(w, *radius),
            Constraint::LinfBall { radius } => w.iter().map(|x| x.clamp(-radius, *radius)).collect(),
            Constraint::L2Ball { radius } => l2_ball(w, *radius),
        }
    }

    pub fn is_unconstrained(&self) -> bool {
        matches!(self, Constraint::Unconstrained)
    }
}

/// Local error bound ‖w − w*‖ ≤ c (f(w) − f*)^θ.
///
/// θ = 0 is admitted and denotes the bound with c = B_ε' used when no sharper
/// exponent is known.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundParams {
    theta: f64,
    c: f64,
}

impl ErrorBoundParams {
    pub fn new(theta: f64, c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return invalid(format!("error-bound exponent must lie in [0, 1], got {theta}"));
        }
        if !(c > 0.0) || !c.is_finite() {
            return invalid(format!("error-bound constant must be positive, got {c}"));
        }
        Ok(Self { theta, c })
    }

    /// Polyhedral growth ‖w − w*‖ ≤ (f(w) − f*)/κ.
    pub fn polyhedral(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return invalid(format!("growth constant must be positive, got {kappa}"));
        }
        Self::new(1.0, 1.0 / kappa)
    }

    /// Quadratic growth λ/2 ‖w − w*‖² ≤ f(w) − f*.
    pub fn semi_strong(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return invalid(format!("quadratic growth modulus must be positive, got {lambda}"));
        }
        Self::new(0.5, (2.0 / lambda).sqrt())
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// A convex minimization problem min_{w∈Ω} f(w).
#[derive(Clone)]
pub struct ProblemInstance {
    name: String,
    objective: Arc<dyn Objective>,
    constraint: Constraint,
    error_bound_theta: Option<f64>,
    fstar_lower_bound: Option<f64>,
    known_fstar: Option<f64>,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("constraint", &self.constraint)
            .field("known_fstar", &self.known_fstar)
            .finish()
    }
}

impl ProblemInstance {
    pub fn new(
        name: impl Into<String>,
        objective: Arc<dyn Objective>,
        constraint: Constraint,
    ) -> Result<Self> {
        if objective.dim() == 0 {
            return invalid("problem dimension must be positive");
        }
        constraint.validate(objective.dim())?;
        Ok(Self {
            name: name.into(),
            objective,
            constraint,
            error_bound_theta: None,
            fstar_lower_bound: None,
            known_fstar: None,
        })
    }

    /// Declares a lower bound on f* used to derive ε₀ = f(w₀) − bound.
    pub fn with_fstar_lower_bound(mut self, lb: f64) -> Self {
        self.fstar_lower_bound = Some(lb);
        self
    }

    /// Test-only ground truth for f*.
    pub fn with_known_fstar(mut self, fstar: f64) -> Self {
        self.known_fstar = Some(fstar);
        self
    }

    /// Records the error-bound exponent of the problem class (1 for
    /// polyhedral, ½ for semi-strongly convex).
    pub fn with_error_bound_theta(mut self, theta: f64) -> Self {
        self.error_bound_theta = Some(theta);
        self
    }

    pub fn with_constraint(mut self, constraint: Constraint) -> Result<Self> {
        constraint.validate(self.dim())?;
        self.constraint = constraint;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn objective(&self) -> &Arc<dyn Objective> {
        &self.objective
    }

    pub fn value(&self, w: &[f64]) -> f64 {
        debug_assert_eq!(w.len(), self.dim());
        self.objective.value(w)
    }

    pub fn subgradient_into(&self, w: &[f64], out: &mut [f64]) {
        debug_assert_eq!(w.len(), self.dim());
        self.objective.subgradient(w, out)
    }

    pub fn subgradient(&self, w: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.subgradient_into(w, &mut g);
        g
    }

    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        self.constraint.project(w)
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    pub fn is_unconstrained(&self) -> bool {
        self.constraint.is_unconstrained()
    }

    /// G with ‖𝒢(w)‖_q ≤ G.
    pub fn lipschitz_bound(&self, q: f64) -> f64 {
        self.objective.lipschitz_bound(q)
    }

    pub fn known_fstar(&self) -> Option<f64> {
        self.known_fstar
    }

    pub fn fstar_lower_bound(&self) -> Option<f64> {
        self.fstar_lower_bound
    }

    pub fn error_bound_theta(&self) -> Option<f64> {
        self.error_bound_theta
    }

    /// ε₀ = f(w₀) − (lower bound on f*) when a lower bound is declared.
    pub fn eps0_for(&self, w0: &[f64]) -> Option<f64> {
        self.fstar_lower_bound.map(|lb| (self.value(w0) - lb).max(0.0))
    }

    /// True when `w` is a fixed point of the projection.
    pub fn is_feasible(&self, w: &[f64], tol: f64) -> bool {
        self.project(w)
            .iter()
            .zip(w)
            .all(|(a, b)| (a - b).abs() <= tol)
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type SubgradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
type BoundFn = dyn Fn(f64) -> f64 + Send + Sync;

/// An [`Objective`] assembled from closures. Used for the miniature test
/// problems.
pub struct FnObjective {
    dim: usize,
    value: Box<ValueFn>,
    subgrad: Box<SubgradFn>,
    bound: Box<BoundFn>,
}

impl FnObjective {
    pub fn new(
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        subgrad: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        bound: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            value: Box::new(value),
            subgrad: Box::new(subgrad),
            bound: Box::new(bound),
        }
    }

    pub fn into_problem(self, name: impl Into<String>, constraint: Constraint) -> Result<ProblemInstance> {
        ProblemInstance::new(name, Arc::new(self), constraint)
    }
}

impl Objective for FnObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, w: &[f64]) -> f64 {
        (self.value)(w)
    }

    fn subgradient(&self, w: &[f64], out: &mut [f64]) {
        (self.subgrad)(w, out)
    }

    fn lipschitz_bound(&self, q: f64) -> f64 {
        (self.bound)(q)
    }
}

/// Sign with 0 at 0, the minimal-norm element of ∂|·|.
pub fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_problem() -> ProblemInstance {
        FnObjective::new(1, |w| w[0].abs(), |w, g| g[0] = sign0(w[0]), |_| 1.0)
            .into_problem("abs", Constraint::Unconstrained)
            .unwrap()
            .with_fstar_lower_bound(0.0)
    }

    #[test]
    fn projections_idempotent() {
        let cs = [
            Constraint::Box { lo: vec![0.0, -1.0], hi: vec![1.0, 1.0] },
            Constraint::L1Ball { radius: 1.5 },
            Constraint::LinfBall { radius: 0.5 },
            Constraint::L2Ball { radius: 2.0 },
        ];
        for c in &cs {
            let p = c.project(&[3.0, -4.0]);
            let pp = c.project(&p);
            for (a, b) in p.iter().zip(&pp) {
                assert!((a - b).abs() <= 1e-12, "{c:?}");
            }
        }
    }

    #[test]
    fn error_bound_validation() {
        assert!(ErrorBoundParams::new(1.2, 1.0).is_err());
        assert!(ErrorBoundParams::new(0.5, 0.0).is_err());
        let eb = ErrorBoundParams::polyhedral(4.0).unwrap();
        assert_eq!((eb.theta(), eb.c()), (1.0, 0.25));
        let eb = ErrorBoundParams::semi_strong(8.0).unwrap();
        assert_eq!((eb.theta(), eb.c()), (0.5, 0.5));
    }

    #[test]
    fn eps0_from_lower_bound() {
        let p = abs_problem();
        assert_eq!(p.eps0_for(&[-3.0]), Some(3.0));
        assert_eq!(p.subgradient(&[0.0]), vec![0.0]);
        assert!(p.is_feasible(&[10.0], 0.0));
    }

    #[test]
    fn invalid_constraint_rejected() {
        let obj = FnObjective::new(2, |_| 0.0, |_, g| g.fill(0.0), |_| 0.0);
        let r = obj.into_problem("z", Constraint::Box { lo: vec![0.0], hi: vec![1.0] });
        assert!(r.is_err());
    }
}
