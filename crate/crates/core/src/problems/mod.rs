//! Problem zoo: robust regression, piecewise-linear ERM, GFlasso SVM and
//! Lovász extensions of submodular functions.

mod erm;
mod lovasz;
pub mod zoo;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{lp_norm, CsrMatrix};

pub use erm::{gflasso_svm, piecewise_linear_erm, robust_regression, Loss, Reg, RegressionRegion};
pub use lovasz::{
    check_submodular, lovasz_problem, lovasz_value_and_base, CutFunction, SetFunction, TableSetFunction,
};

/// Examples x_i (rows of `x`) with targets or labels y_i.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: CsrMatrix,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: CsrMatrix, y: Vec<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return invalid(format!("{} rows but {} labels", x.nrows(), y.len()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return invalid("labels must be finite");
        }
        Ok(Self { x, y })
    }

    pub fn from_dense(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.len());
        Self::new(CsrMatrix::from_dense(rows, d)?, y)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_binary(&self) -> bool {
        self.y.iter().all(|&v| v == 1.0 || v == -1.0)
    }

    /// Per-column max-abs scaling; returns the scaled copy.
    pub fn scaled_max_abs(&self) -> Self {
        Self {
            x: self.x.scaled_max_abs().0,
            y: self.y.clone(),
        }
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.n() == 0 || self.d() == 0 {
            return invalid(format!("dataset must have n, d >= 1 (n = {}, d = {})", self.n(), self.d()));
        }
        Ok(())
    }
}

/// Weighted graph over coordinates with 0-based edges (i, j, s_ij), i < j.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GFlassoGraph {
    dim: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl GFlassoGraph {
    pub fn new(dim: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut out = Vec::with_capacity(edges.len());
        for (k, (i, j, s)) in edges.into_iter().enumerate() {
            if i == j {
                return invalid(format!("edge {k} is a self loop on {i}"));
            }
            if i >= dim || j >= dim {
                return invalid(format!("edge {k} ({i}, {j}) out of range for d = {dim}"));
            }
            if !(s > 0.0) || !s.is_finite() {
                return invalid(format!("edge {k} weight must be positive, got {s}"));
            }
            out.push((i.min(j), i.max(j), s));
        }
        Ok(Self { dim, edges: out })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// F with row τ = s_τ (e_i − e_j).
    pub fn f_matrix(&self) -> CsrMatrix {
        let rows: Vec<crate::linalg::SparseVec> = self
            .edges
            .iter()
            .map(|&(i, j, s)| crate::linalg::SparseVec::new(vec![i, j], vec![s, -s]).expect("i < j"))
            .collect();
        CsrMatrix::from_rows(&rows, self.dim).expect("indices checked at construction")
    }

    /// Σ_{edges at i} s for each coordinate.
    pub fn weighted_degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.dim];
        for &(i, j, s) in &self.edges {
            deg[i] += s;
            deg[j] += s;
        }
        deg
    }

    /// Edges between coordinates whose empirical correlation magnitude is at
    /// least `cutoff`, all with unit weight. A convenience for synthetic runs,
    /// not an estimate of the conditional-independence graph.
    pub fn from_correlation_threshold(data: &Dataset, cutoff: f64) -> Result<Self> {
        data.require_nonempty()?;
        let (n, d) = (data.n(), data.d());
        let mut cols = vec![vec![0.0; n]; d];
        for i in 0..n {
            let r = data.x.row(i);
            for (&j, &v) in r.indices.iter().zip(r.values) {
                cols[j][i] = v;
            }
        }
        for c in cols.iter_mut() {
            let mean = c.iter().sum::<f64>() / n as f64;
            c.iter_mut().for_each(|v| *v -= mean);
        }
        let norms: Vec<f64> = cols.iter().map(|c| lp_norm(c, 2.0)).collect();
        let mut edges = Vec::new();
        for a in 0..d {
            for b in a + 1..d {
                if norms[a] == 0.0 || norms[b] == 0.0 {
                    continue;
                }
                let rho = crate::linalg::dot(&cols[a], &cols[b]) / (norms[a] * norms[b]);
                if rho.abs() >= cutoff {
                    edges.push((a, b, 1.0));
                }
            }
        }
        Self::new(d, edges)
    }
}

/// Problem families with an analytic subgradient bound.
#[derive(Clone, Debug, PartialEq)]
pub enum InstanceKind {
    PiecewiseLinear { loss: Loss, reg: Reg },
    /// Valid on the ball ‖w‖₂ ≤ radius.
    RobustRegression { p_loss: f64, radius: f64 },
    GFlasso { graph: GFlassoGraph, lambda: f64 },
}

/// Bound on ‖𝒢(w)‖_q:
/// - piecewise linear: max_i ‖x_i‖_q + λ d^{1/q} (ℓ1) or + λ (ℓ∞);
/// - robust regression: p · max_i (R‖x_i‖₂ + |y_i|)^{p−1} · max_i ‖x_i‖_q;
/// - GFlasso: max_i ‖x_i‖_q + λ (Σ_j deg_j^q)^{1/q}.
pub fn lipschitz_bound_for(kind: &InstanceKind, data: &Dataset, q: f64) -> f64 {
    let xq = data.x.max_row_norm(q);
    match kind {
        InstanceKind::PiecewiseLinear { reg, .. } => {
            let r = match *reg {
                Reg::L1(l) => l * (data.d() as f64).powf(1.0 / q),
                Reg::Linf(l) => l,
                Reg::None | Reg::L1Ball(_) | Reg::LinfBall(_) => 0.0,
            };
            xq + r
        }
        InstanceKind::RobustRegression { p_loss, radius } => {
            let m = data
                .x
                .rows()
                .zip(&data.y)
                .map(|(r, y)| radius * r.norm(2.0) + y.abs())
                .fold(0.0, f64::max);
            p_loss * m.powf(p_loss - 1.0) * xq
        }
        InstanceKind::GFlasso { graph, lambda } => xq + lambda * lp_norm(&graph.weighted_degrees(), q),
    }
}
