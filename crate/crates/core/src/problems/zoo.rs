//! Small instances used by the verification suites and the tests.

use std::sync::Arc;

use crate::data::{synth_classification, synth_regression};
use crate::problem::{sign0, Constraint, FnObjective, ProblemInstance};

use super::{
    gflasso_svm, lovasz_problem, piecewise_linear_erm, robust_regression, CutFunction, Dataset,
    GFlassoGraph, Loss, Reg, RegressionRegion,
};

/// A low-dimensional instance together with a box that contains a
/// minimizer, for the grid and sublevel oracles.
#[derive(Clone, Debug)]
pub struct Miniature {
    pub name: &'static str,
    pub problem: ProblemInstance,
    pub search_lo: Vec<f64>,
    pub search_hi: Vec<f64>,
    pub start: Vec<f64>,
    /// Data of a 1-d absolute-loss instance, whose minimizer is a weighted
    /// median.
    pub abs_loss_data: Option<Dataset>,
    /// Differentiable away from a null set (used for residual proxies).
    pub smooth: bool,
}

fn abs_shift(shift: f64) -> ProblemInstance {
    FnObjective::new(1, move |w| (w[0] - shift).abs(), move |w, g| g[0] = sign0(w[0] - shift), |_| 1.0)
        .into_problem(if shift == 0.0 { "abs" } else { "abs_shift" }, Constraint::Unconstrained)
        .expect("valid")
        .with_fstar_lower_bound(0.0)
        .with_error_bound_theta(1.0)
}

fn l1_2d() -> ProblemInstance {
    FnObjective::new(
        2,
        |w| w[0].abs() + w[1].abs(),
        |w, g| {
            g[0] = sign0(w[0]);
            g[1] = sign0(w[1]);
        },
        |q| 2f64.powf(1.0 / q),
    )
    .into_problem("l1_2d", Constraint::Unconstrained)
    .expect("valid")
    .with_fstar_lower_bound(0.0)
    .with_error_bound_theta(1.0)
}

fn square_1d() -> ProblemInstance {
    FnObjective::new(1, |w| w[0] * w[0], |w, g| g[0] = 2.0 * w[0], |_| 4.0)
        .into_problem("square_1d", Constraint::Box { lo: vec![-2.0], hi: vec![2.0] })
        .expect("valid")
        .with_fstar_lower_bound(0.0)
        .with_error_bound_theta(0.5)
}

fn quad_2d() -> ProblemInstance {
    // w₁² + 2w₂² on [−2, 2]², gradient norm at most ‖(4, 8)‖ in any q ≥ 1 bound below
    FnObjective::new(
        2,
        |w| w[0] * w[0] + 2.0 * w[1] * w[1],
        |w, g| {
            g[0] = 2.0 * w[0];
            g[1] = 4.0 * w[1];
        },
        |q| (4f64.powf(q) + 8f64.powf(q)).powf(1.0 / q),
    )
    .into_problem("quad_2d", Constraint::Box { lo: vec![-2.0; 2], hi: vec![2.0; 2] })
    .expect("valid")
    .with_fstar_lower_bound(0.0)
    .with_error_bound_theta(0.5)
}

fn column(x: &[f64]) -> Vec<Vec<f64>> {
    x.iter().map(|&v| vec![v]).collect()
}

/// The 1-d and 2-d miniatures.
pub fn miniatures() -> Vec<Miniature> {
    let mut out = Vec::new();
    out.push(Miniature {
        name: "abs",
        problem: abs_shift(0.0).with_known_fstar(0.0),
        search_lo: vec![-2.0],
        search_hi: vec![2.0],
        start: vec![1.5],
        abs_loss_data: None,
        smooth: false,
    });
    out.push(Miniature {
        name: "abs_shift",
        problem: abs_shift(0.3).with_known_fstar(0.0),
        search_lo: vec![-1.0],
        search_hi: vec![1.0],
        start: vec![-1.0],
        abs_loss_data: None,
        smooth: false,
    });

    let y = vec![1.0, 2.0, 10.0];
    let data = Dataset::from_dense(&column(&[1.0; 3]), y).expect("valid");
    out.push(Miniature {
        name: "abs_median",
        problem: piecewise_linear_erm(&data, Loss::Absolute, Reg::None).expect("valid"),
        search_lo: vec![-1.0],
        search_hi: vec![12.0],
        start: vec![0.0],
        abs_loss_data: Some(data),
        smooth: false,
    });

    // weights (5, 1, 1) realised by repeating the first example
    let yw = vec![1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 10.0];
    let data = Dataset::from_dense(&column(&[1.0; 7]), yw).expect("valid");
    out.push(Miniature {
        name: "weighted_abs",
        problem: piecewise_linear_erm(&data, Loss::Absolute, Reg::None).expect("valid"),
        search_lo: vec![-1.0],
        search_hi: vec![12.0],
        start: vec![6.0],
        abs_loss_data: Some(data),
        smooth: false,
    });

    out.push(Miniature {
        name: "square_1d",
        problem: square_1d().with_known_fstar(0.0),
        search_lo: vec![-2.0],
        search_hi: vec![2.0],
        start: vec![1.7],
        abs_loss_data: None,
        smooth: true,
    });
    out.push(Miniature {
        name: "l1_2d",
        problem: l1_2d().with_known_fstar(0.0),
        search_lo: vec![-2.0; 2],
        search_hi: vec![2.0; 2],
        start: vec![1.5, -1.0],
        abs_loss_data: None,
        smooth: false,
    });

    let rows = vec![
        vec![1.0, 0.5],
        vec![0.5, 1.0],
        vec![-1.0, -0.2],
        vec![-0.3, -1.0],
        vec![0.8, -0.6],
    ];
    let data = Dataset::from_dense(&rows, vec![1.0, 1.0, -1.0, -1.0, -1.0]).expect("valid");
    out.push(Miniature {
        name: "hinge_l1_2d",
        problem: piecewise_linear_erm(&data, Loss::Hinge, Reg::L1(0.1)).expect("valid"),
        search_lo: vec![-4.0; 2],
        search_hi: vec![4.0; 2],
        start: vec![0.0, 0.0],
        abs_loss_data: None,
        smooth: false,
    });

    let rows = vec![vec![1.0, 0.0], vec![0.5, 1.0], vec![-1.0, 0.7]];
    let planted = [0.5, -0.25];
    let y = rows.iter().map(|r| r[0] * planted[0] + r[1] * planted[1]).collect();
    let data = Dataset::from_dense(&rows, y).expect("valid");
    let region = RegressionRegion { radius: 3.0, constrain: true };
    out.push(Miniature {
        name: "robust_2d",
        problem: robust_regression(&data, 1.5, region).expect("valid"),
        search_lo: vec![-2.0; 2],
        search_hi: vec![2.0; 2],
        start: vec![1.0, 1.0],
        abs_loss_data: None,
        smooth: true,
    });

    out.push(Miniature {
        name: "quad_2d",
        problem: quad_2d().with_known_fstar(0.0),
        search_lo: vec![-2.0; 2],
        search_hi: vec![2.0; 2],
        start: vec![1.0, -1.5],
        abs_loss_data: None,
        smooth: true,
    });
    out
}

/// One instance of every builder on seeded synthetic data, plus the
/// miniatures.
pub fn instances(seed: u64) -> Vec<ProblemInstance> {
    let mut out: Vec<ProblemInstance> = miniatures().into_iter().map(|m| m.problem).collect();
    let cls = synth_classification(40, 6, 0.5, seed).expect("valid").data;
    let reg = synth_regression(40, 6, 0.1, seed.wrapping_add(1)).expect("valid").data;
    for r in [Reg::None, Reg::L1(0.1), Reg::Linf(0.2), Reg::L1Ball(2.0), Reg::LinfBall(0.5)] {
        out.push(piecewise_linear_erm(&cls, Loss::Hinge, r).expect("valid"));
    }
    for loss in [Loss::Absolute, Loss::EpsInsensitive(0.2)] {
        for r in [Reg::None, Reg::L1(0.05), Reg::Linf(0.1)] {
            out.push(piecewise_linear_erm(&reg, loss, r).expect("valid"));
        }
    }
    for p in [1.2, 1.5, 1.8] {
        let region = RegressionRegion { radius: 5.0, constrain: true };
        out.push(robust_regression(&reg, p, region).expect("valid"));
    }
    let edges = (1..6).map(|i| (i - 1, i, 1.0)).chain([(0, 5, 0.5)]).collect();
    let graph = GFlassoGraph::new(6, edges).expect("valid");
    out.push(gflasso_svm(&cls, &graph, 0.1).expect("valid"));
    for s in 0..3 {
        let f = CutFunction::random(8, 0.4, 0.8, seed.wrapping_add(10 + s)).expect("valid");
        out.push(lovasz_problem(Arc::new(f)).expect("submodular"));
    }
    out
}
