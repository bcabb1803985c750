use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::CsrMatrix;
use crate::problem::{sign0, Constraint, Objective, ProblemInstance};

use super::{lipschitz_bound_for, Dataset, GFlassoGraph, InstanceKind};

/// Piecewise-linear losses ℓ(z, y) with z = x_iᵀw.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// max(0, 1 − yz)
    Hinge,
    /// |z − y|
    Absolute,
    /// max(0, |z − y| − ε)
    EpsInsensitive(f64),
}

/// Regularizer, or a ball constraint (installed as Ω with R = 0).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reg {
    None,
    L1(f64),
    Linf(f64),
    L1Ball(f64),
    LinfBall(f64),
}

impl Loss {
    fn value(&self, z: f64, y: f64) -> f64 {
        match *self {
            Loss::Hinge => (1.0 - y * z).max(0.0),
            Loss::Absolute => (z - y).abs(),
            Loss::EpsInsensitive(e) => ((z - y).abs() - e).max(0.0),
        }
    }

    /// d/dz, 0 at every kink.
    fn slope(&self, z: f64, y: f64) -> f64 {
        match *self {
            Loss::Hinge => {
                if y * z < 1.0 {
                    -y
                } else {
                    0.0
                }
            }
            Loss::Absolute => sign0(z - y),
            Loss::EpsInsensitive(e) => {
                let r = z - y;
                if r.abs() > e {
                    sign0(r)
                } else {
                    0.0
                }
            }
        }
    }
}

fn loss_mean(x: &CsrMatrix, y: &[f64], loss: Loss, w: &[f64]) -> f64 {
    let s: f64 = x.rows().zip(y).map(|(r, &yi)| loss.value(r.dot(w), yi)).sum();
    s / y.len() as f64
}

fn loss_subgradient(x: &CsrMatrix, y: &[f64], loss: Loss, w: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    let n = y.len() as f64;
    for (r, &yi) in x.rows().zip(y) {
        let s = loss.slope(r.dot(w), yi);
        if s != 0.0 {
            r.axpy_into(s / n, out);
        }
    }
}

/// Index of the largest |w_i|, lowest index on ties; None when w = 0.
fn linf_argmax(w: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, x) in w.iter().enumerate() {
        if x.abs() > best.map_or(0.0, |b| w[b].abs()) {
            best = Some(i);
        }
    }
    best
}

struct PiecewiseLinearErm {
    data: Dataset,
    loss: Loss,
    reg: Reg,
}

impl Objective for PiecewiseLinearErm {
    fn dim(&self) -> usize {
        self.data.d()
    }

    fn value(&self, w: &[f64]) -> f64 {
        let f = loss_mean(&self.data.x, &self.data.y, self.loss, w);
        match self.reg {
            Reg::L1(l) => f + l * w.iter().map(|x| x.abs()).sum::<f64>(),
            Reg::Linf(l) => f + l * w.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
            Reg::None | Reg::L1Ball(_) | Reg::LinfBall(_) => f,
        }
    }

    fn subgradient(&self, w: &[f64], out: &mut [f64]) {
        loss_subgradient(&self.data.x, &self.data.y, self.loss, w, out);
        match self.reg {
            Reg::L1(l) => {
                for (o, x) in out.iter_mut().zip(w) {
                    *o += l * sign0(*x);
                }
            }
            Reg::Linf(l) => {
                if let Some(i) = linf_argmax(w) {
                    out[i] += l * sign0(w[i]);
                }
            }
            Reg::None | Reg::L1Ball(_) | Reg::LinfBall(_) => {}
        }
    }

    fn lipschitz_bound(&self, q: f64) -> f64 {
        let kind = InstanceKind::PiecewiseLinear { loss: self.loss, reg: self.reg };
        lipschitz_bound_for(&kind, &self.data, q)
    }
}

/// (1/n) Σ ℓ(x_iᵀw, y_i) + R(w). Polyhedral, so θ = 1; f* ≥ 0.
pub fn piecewise_linear_erm(data: &Dataset, loss: Loss, reg: Reg) -> Result<ProblemInstance> {
    data.require_nonempty()?;
    if loss == Loss::Hinge && !data.is_binary() {
        return invalid("hinge loss needs labels in {-1, +1}");
    }
    if let Loss::EpsInsensitive(e) = loss {
        if !(e >= 0.0) || !e.is_finite() {
            return invalid(format!("insensitivity width must be non-negative, got {e}"));
        }
    }
    let constraint = match reg {
        Reg::L1(l) | Reg::Linf(l) if !(l >= 0.0) || !l.is_finite() => {
            return invalid(format!("regularization weight must be non-negative, got {l}"));
        }
        Reg::L1Ball(r) => Constraint::L1Ball { radius: r },
        Reg::LinfBall(r) => Constraint::LinfBall { radius: r },
        _ => Constraint::Unconstrained,
    };
    let name = format!("{loss:?}+{reg:?}").to_lowercase();
    let obj = PiecewiseLinearErm { data: data.clone(), loss, reg };
    Ok(ProblemInstance::new(name, Arc::new(obj), constraint)?
        .with_error_bound_theta(1.0)
        .with_fstar_lower_bound(0.0))
}

struct GFlassoSvm {
    data: Dataset,
    graph: GFlassoGraph,
    f: CsrMatrix,
    lambda: f64,
}

impl Objective for GFlassoSvm {
    fn dim(&self) -> usize {
        self.data.d()
    }

    fn value(&self, w: &[f64]) -> f64 {
        let loss = loss_mean(&self.data.x, &self.data.y, Loss::Hinge, w);
        if self.lambda == 0.0 {
            return loss;
        }
        let r: f64 = self.f.rows().map(|row| row.dot(w).abs()).sum();
        loss + self.lambda * r
    }

    fn subgradient(&self, w: &[f64], out: &mut [f64]) {
        loss_subgradient(&self.data.x, &self.data.y, Loss::Hinge, w, out);
        if self.lambda == 0.0 {
            return;
        }
        for row in self.f.rows() {
            let s = sign0(row.dot(w));
            if s != 0.0 {
                row.axpy_into(self.lambda * s, out);
            }
        }
    }

    fn lipschitz_bound(&self, q: f64) -> f64 {
        let kind = InstanceKind::GFlasso { graph: self.graph.clone(), lambda: self.lambda };
        lipschitz_bound_for(&kind, &self.data, q)
    }
}

/// (1/n) Σ max(0, 1 − y_i x_iᵀw) + λ‖Fw‖₁.
pub fn gflasso_svm(data: &Dataset, graph: &GFlassoGraph, lambda: f64) -> Result<ProblemInstance> {
    data.require_nonempty()?;
    if !data.is_binary() {
        return invalid("hinge loss needs labels in {-1, +1}");
    }
    if graph.dim() != data.d() {
        return invalid(format!("graph has {} nodes but data has d = {}", graph.dim(), data.d()));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return invalid(format!("lambda must be non-negative, got {lambda}"));
    }
    let obj = GFlassoSvm {
        data: data.clone(),
        graph: graph.clone(),
        f: graph.f_matrix(),
        lambda,
    };
    Ok(ProblemInstance::new("gflasso_svm", Arc::new(obj), Constraint::Unconstrained)?
        .with_error_bound_theta(1.0)
        .with_fstar_lower_bound(0.0))
}

/// Region on which the robust-regression subgradient bound holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionRegion {
    /// Radius R of the Euclidean ball around the origin.
    pub radius: f64,
    /// Install the ball as Ω.
    pub constrain: bool,
}

struct RobustRegression {
    data: Dataset,
    p: f64,
    radius: f64,
}

impl Objective for RobustRegression {
    fn dim(&self) -> usize {
        self.data.d()
    }

    fn value(&self, w: &[f64]) -> f64 {
        let s: f64 = self
            .data
            .x
            .rows()
            .zip(&self.data.y)
            .map(|(r, y)| (r.dot(w) - y).abs().powf(self.p))
            .sum();
        s / self.data.n() as f64
    }

    fn subgradient(&self, w: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let n = self.data.n() as f64;
        for (r, y) in self.data.x.rows().zip(&self.data.y) {
            let res = r.dot(w) - y;
            if res != 0.0 {
                r.axpy_into(self.p * res.abs().powf(self.p - 1.0) * res.signum() / n, out);
            }
        }
    }

    fn lipschitz_bound(&self, q: f64) -> f64 {
        let kind = InstanceKind::RobustRegression { p_loss: self.p, radius: self.radius };
        lipschitz_bound_for(&kind, &self.data, q)
    }
}

/// (1/n) Σ |x_iᵀw − y_i|^p for p ∈ (1, 2). Semi-strongly convex (θ = ½).
pub fn robust_regression(data: &Dataset, p_loss: f64, region: RegressionRegion) -> Result<ProblemInstance> {
    data.require_nonempty()?;
    if !(p_loss > 1.0 && p_loss < 2.0) {
        return invalid(format!(
            "p_loss must lie in (1, 2), got {p_loss}; use the absolute loss for p = 1"
        ));
    }
    if !(region.radius > 0.0) || !region.radius.is_finite() {
        return invalid(format!("region radius must be positive, got {}", region.radius));
    }
    let constraint = if region.constrain {
        Constraint::L2Ball { radius: region.radius }
    } else {
        Constraint::Unconstrained
    };
    let obj = RobustRegression { data: data.clone(), p: p_loss, radius: region.radius };
    Ok(ProblemInstance::new(format!("robust_regression_p{p_loss}"), Arc::new(obj), constraint)?
        .with_error_bound_theta(0.5)
        .with_fstar_lower_bound(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_point(x: f64, y: f64) -> Dataset {
        Dataset::from_dense(&[vec![x]], vec![y]).unwrap()
    }

    #[test]
    fn robust_regression_example() {
        let region = RegressionRegion { radius: 10.0, constrain: false };
        let p = robust_regression(&one_point(1.0, 0.0), 1.5, region).unwrap();
        assert!((p.value(&[4.0]) - 8.0).abs() < 1e-12);
        assert!((p.subgradient(&[4.0])[0] - 3.0).abs() < 1e-12);
        assert_eq!(p.value(&[0.0]), 0.0);
        assert_eq!(p.subgradient(&[0.0]), vec![0.0]);
        assert!(robust_regression(&one_point(1.0, 0.0), 1.0, region).is_err());
        assert!(robust_regression(&one_point(1.0, 0.0), 2.0, region).is_err());
    }

    #[test]
    fn hinge_examples() {
        let p = piecewise_linear_erm(&one_point(1.0, 1.0), Loss::Hinge, Reg::None).unwrap();
        assert_eq!(p.value(&[0.0]), 1.0);
        assert_eq!(p.subgradient(&[0.0]), vec![-1.0]);
        assert_eq!(p.subgradient(&[1.0]), vec![0.0]);
        assert_eq!(p.lipschitz_bound(2.0), 1.0);
    }

    #[test]
    fn hinge_rejects_non_binary() {
        assert!(piecewise_linear_erm(&one_point(1.0, 2.0), Loss::Hinge, Reg::None).is_err());
    }

    #[test]
    fn linf_tie_break_lowest_index() {
        let d = Dataset::from_dense(&[vec![0.0, 0.0, 0.0]], vec![0.0]).unwrap();
        let p = piecewise_linear_erm(&d, Loss::Absolute, Reg::Linf(1.0)).unwrap();
        assert_eq!(p.subgradient(&[-2.0, 2.0, 1.0]), vec![-1.0, 0.0, 0.0]);
        assert_eq!(p.subgradient(&[0.0, 0.0, 0.0]), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn l1_bound_formula() {
        let d = Dataset::from_dense(&[vec![3.0, 4.0], vec![1.0, 0.0]], vec![1.0, -1.0]).unwrap();
        let p = piecewise_linear_erm(&d, Loss::Hinge, Reg::L1(0.5)).unwrap();
        assert!((p.lipschitz_bound(2.0) - (5.0 + 0.5 * 2f64.sqrt())).abs() < 1e-15);
        let p = piecewise_linear_erm(&d, Loss::Absolute, Reg::L1Ball(1.0)).unwrap();
        assert_eq!(p.constraint(), &Constraint::L1Ball { radius: 1.0 });
        assert_eq!(p.lipschitz_bound(2.0), 5.0);
    }

    #[test]
    fn eps_insensitive_flat_band() {
        let p = piecewise_linear_erm(&one_point(1.0, 0.0), Loss::EpsInsensitive(0.5), Reg::None).unwrap();
        assert_eq!(p.value(&[0.3]), 0.0);
        assert_eq!(p.subgradient(&[0.5]), vec![0.0]);
        assert_eq!(p.subgradient(&[0.7]), vec![1.0]);
        assert!((p.value(&[-2.0]) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn gflasso_single_edge() {
        let d = Dataset::from_dense(&[vec![0.0, 0.0]], vec![1.0]).unwrap();
        let g = GFlassoGraph::new(2, vec![(0, 1, 1.0)]).unwrap();
        let p = gflasso_svm(&d, &g, 0.1).unwrap();
        // hinge part is 1 at any w here since x = 0
        assert!((p.value(&[3.0, 1.0]) - (1.0 + 0.2)).abs() < 1e-15);
        assert_eq!(p.subgradient(&[3.0, 1.0]), vec![0.1, -0.1]);
        assert_eq!(p.value(&[0.0, 0.0]), 1.0);
        assert!(gflasso_svm(&d, &GFlassoGraph::new(3, vec![]).unwrap(), 0.1).is_err());
    }
}
