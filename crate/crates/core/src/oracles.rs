//! Brute-force reference computations: grid minima, weighted medians,
//! long-run upper bounds, sublevel projections, B_ε estimates and subset
//! enumeration.

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{dist2, norm2};
use crate::problem::ProblemInstance;
use crate::problems::{Dataset, SetFunction};
use crate::solvers::{rsg, RestartConfig, Stride, TraceOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Grid,
    WeightedMedian,
    SubsetEnum,
    LongRun,
}

/// Reference optimum with the method that produced it. `certified` means
/// f* ∈ [fstar − certified_tol, fstar]; long-run reports are upper bounds
/// only and never certified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub fstar: f64,
    pub argmin: Vec<f64>,
    pub method: OracleMethod,
    /// Grid points per dimension, or iteration budget for long runs.
    pub resolution: u64,
    pub certified: bool,
    pub certified_tol: f64,
    pub seed: Option<u64>,
}

/// Exhaustive evaluation on a regular grid of the box (points projected onto
/// Ω). certified_tol = G × cell diameter.
pub fn grid_min(
    problem: &ProblemInstance,
    lo: &[f64],
    hi: &[f64],
    points_per_dim: usize,
    budget: u64,
) -> Result<OracleReport> {
    let d = problem.dim();
    if lo.len() != d || hi.len() != d {
        return invalid("grid box does not match the problem dimension");
    }
    if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
        return invalid("grid box with lo > hi");
    }
    if points_per_dim < 2 {
        return invalid("a grid needs at least 2 points per dimension");
    }
    let required = (points_per_dim as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget: budget as u128 });
    }
    let k = points_per_dim;
    let step: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| (h - l) / (k - 1) as f64).collect();
    let mut idx = vec![0usize; d];
    let mut w = lo.to_vec();
    let mut best = (f64::INFINITY, lo.to_vec());
    loop {
        for j in 0..d {
            // endpoints exact so that on-grid kinks are hit
            w[j] = if idx[j] == k - 1 { hi[j] } else { lo[j] + idx[j] as f64 * step[j] };
        }
        let u = if problem.is_unconstrained() { w.clone() } else { problem.project(&w) };
        let f = problem.value(&u);
        if f < best.0 {
            best = (f, u);
        }
        let mut j = 0;
        while j < d {
            idx[j] += 1;
            if idx[j] < k {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == d {
            break;
        }
    }
    let cell = norm2(&step);
    Ok(OracleReport {
        fstar: best.0,
        argmin: best.1,
        method: OracleMethod::Grid,
        resolution: k as u64,
        certified: true,
        certified_tol: problem.lipschitz_bound(2.0) * cell,
        seed: None,
    })
}

/// Smallest t with cumulative weight ≥ half the total, a minimizer of
/// Σ w_i |t − y_i|. Ties go to the lowest minimizer.
pub fn weighted_median(y: &[f64], weights: &[f64]) -> Result<f64> {
    if y.is_empty() {
        return invalid("weighted median of an empty sample");
    }
    if y.len() != weights.len() {
        return invalid("values and weights differ in length");
    }
    if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return invalid("weights must be positive and values finite");
    }
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for &i in &order {
        acc += weights[i];
        if 2.0 * acc >= total {
            return Ok(y[i]);
        }
    }
    Ok(y[order[order.len() - 1]])
}

/// Exact minimizer of the 1-d absolute-loss fit (1/n) Σ |x_i w − y_i|:
/// the median of y_i/x_i weighted by |x_i|.
pub fn absolute_loss_oracle(problem: &ProblemInstance, data: &Dataset) -> Result<OracleReport> {
    if data.d() != 1 || problem.dim() != 1 {
        return invalid("the weighted-median oracle is one-dimensional");
    }
    let (mut t, mut wts) = (Vec::new(), Vec::new());
    for (i, &y) in data.y.iter().enumerate() {
        let x = data.x.to_dense_row(i)[0];
        if x != 0.0 {
            t.push(y / x);
            wts.push(x.abs());
        }
    }
    let w = if t.is_empty() { 0.0 } else { weighted_median(&t, &wts)? };
    Ok(OracleReport {
        fstar: problem.value(&[w]),
        argmin: vec![w],
        method: OracleMethod::WeightedMedian,
        resolution: 0,
        certified: true,
        certified_tol: 0.0,
        seed: None,
    })
}

/// Upper bound on f* from repeated RSG calls, each warm-started at the best
/// point so far with the same ε₀, t doubled and enough stages to shrink the
/// step by 2⁻⁴⁰, while the next call fits in `budget` subgradient calls
/// (the first call always runs). Not certified; certified_tol holds the
/// improvement of the last call as a convergence indicator.
pub fn long_run(problem: &ProblemInstance, w0: &[f64], eps0: f64, budget: u64) -> Result<OracleReport> {
    if !(eps0 > 0.0) {
        return invalid("eps0 must be positive");
    }
    let mut best = (problem.value(w0), w0.to_vec());
    let mut t = 64u64;
    let mut spent = 0u64;
    let mut last_gain = f64::INFINITY;
    let opts = TraceOptions { stride: Stride::Every(u64::MAX), wallclock: false };
    loop {
        let cfg = RestartConfig::new(2.0, t, eps0, eps0 / 2f64.powi(40))?;
        let cost = cfg.inner_iters * cfg.stages as u64;
        if spent > 0 && spent + cost > budget {
            break;
        }
        let out = rsg(problem, &best.1, &cfg, opts)?;
        spent += cost;
        let before = best.0;
        if out.trace.final_objective < best.0 {
            best = (out.trace.final_objective, out.point);
        }
        last_gain = before - best.0;
        t *= 2;
    }
    Ok(OracleReport {
        fstar: best.0,
        argmin: best.1,
        method: OracleMethod::LongRun,
        resolution: budget,
        certified: false,
        certified_tol: last_gain.max(0.0),
        seed: None,
    })
}

fn level_crossing(problem: &ProblemInstance, from: &[f64], dir: &[f64], level: f64, r_max: f64) -> Option<f64> {
    let at = |r: f64| -> Vec<f64> { from.iter().zip(dir).map(|(a, b)| a + r * b).collect() };
    if problem.value(&at(r_max)) <= level {
        return None;
    }
    let (mut a, mut b) = (0.0, r_max);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if problem.value(&at(m)) <= level {
            a = m;
        } else {
            b = m;
        }
        if b - a <= 1e-15 * b.max(1.0) {
            break;
        }
    }
    Some(a)
}

fn check_oracle(problem: &ProblemInstance, eps: f64, oracle: &OracleReport) -> Result<f64> {
    if !oracle.certified {
        return Err(Error::Inconsistent("sublevel computations need a certified f*".into()));
    }
    if !(eps > 0.0) {
        return invalid("eps must be positive");
    }
    if oracle.argmin.len() != problem.dim() {
        return invalid("oracle argmin has the wrong dimension");
    }
    let level = oracle.fstar + eps;
    if problem.value(&oracle.argmin) > level {
        return Err(Error::Inconsistent(format!(
            "sublevel set at {level} is empty under the oracle's argmin"
        )));
    }
    Ok(level)
}

/// Point of {f ≤ f* + ε} closest to `w`. In 1-d a bisection on the segment
/// to the argmin is exact; in 2-d the boundary is parametrised by angle
/// around the argmin and the distance minimised over a fine angle grid,
/// then refined by golden-section search.
pub fn sublevel_project(
    problem: &ProblemInstance,
    w: &[f64],
    eps: f64,
    oracle: &OracleReport,
) -> Result<Vec<f64>> {
    let level = check_oracle(problem, eps, oracle)?;
    if problem.value(w) <= level {
        return Ok(w.to_vec());
    }
    let c = &oracle.argmin;
    match problem.dim() {
        1 => {
            let dir = [w[0] - c[0]];
            let r = level_crossing(problem, c, &dir, level, 1.0).unwrap_or(1.0);
            Ok(vec![c[0] + r * dir[0]])
        }
        2 => {
            let r_max = 4.0 * dist2(w, c).max(1.0);
            let point = |phi: f64| -> Vec<f64> {
                let dir = [phi.cos(), phi.sin()];
                let r = level_crossing(problem, c, &dir, level, r_max).unwrap_or(r_max);
                vec![c[0] + r * dir[0], c[1] + r * dir[1]]
            };
            let dist = |phi: f64| dist2(&point(phi), w);
            let n = 2048;
            let h = std::f64::consts::TAU / n as f64;
            let (mut bi, mut bd) = (0, f64::INFINITY);
            for i in 0..n {
                let dd = dist(i as f64 * h);
                if dd < bd {
                    bi = i;
                    bd = dd;
                }
            }
            let (mut a, mut b) = ((bi as f64 - 1.0) * h, (bi as f64 + 1.0) * h);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
            let (mut f1, mut f2) = (dist(x1), dist(x2));
            for _ in 0..80 {
                if f1 < f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - g * (b - a);
                    f1 = dist(x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + g * (b - a);
                    f2 = dist(x2);
                }
            }
            let best = if f1 < f2 { x1 } else { x2 };
            let p = point(best);
            Ok(if dist2(&p, w) <= bd { p } else { point(bi as f64 * h) })
        }
        d => invalid(format!("sublevel projection is implemented for d <= 2, got {d}")),
    }
}

/// Lower estimate of B_ε from rays out of the argmin (Ω* treated as the
/// single oracle point).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BEpsEstimate {
    pub value: f64,
    pub rays_used: usize,
    pub rays_skipped: usize,
    pub seed: u64,
}

/// Bisects along the ±coordinate axes and `ray_count` Gaussian directions
/// (ChaCha8, `seed`) for the crossing f = f* + ε and returns the largest
/// distance. Rays that leave Ω or never cross are skipped.
pub fn estimate_b_eps(
    problem: &ProblemInstance,
    eps: f64,
    oracle: &OracleReport,
    ray_count: usize,
    seed: u64,
) -> Result<BEpsEstimate> {
    let level = check_oracle(problem, eps, oracle)?;
    let d = problem.dim();
    let c = &oracle.argmin;
    let mut dirs = Vec::with_capacity(2 * d + ray_count);
    for j in 0..d {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[j] = s;
            dirs.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ray_count {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = norm2(&v);
        if n > 0.0 {
            dirs.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    let r_max = 1e6;
    let (mut best, mut used, mut skipped) = (0.0_f64, 0, 0);
    for dir in &dirs {
        let Some(r) = level_crossing(problem, c, dir, level, r_max) else {
            skipped += 1;
            continue;
        };
        let p: Vec<f64> = c.iter().zip(dir).map(|(a, b)| a + r * b).collect();
        if !problem.is_feasible(&p, 1e-12) {
            skipped += 1;
            continue;
        }
        used += 1;
        best = best.max(r);
    }
    if skipped > 0 {
        warn!("{skipped} of {} rays skipped while estimating B_eps", dirs.len());
    }
    Ok(BEpsEstimate { value: best, rays_used: used, rays_skipped: skipped, seed })
}

pub const MAX_ENUMERATION_SIZE: usize = 20;

/// min_A F(A) over all 2^d subsets; the first minimizing mask in increasing
/// order is returned.
pub fn submodular_min_enumerate(f: &dyn SetFunction) -> Result<(f64, u64)> {
    let d = f.ground_size();
    if d > MAX_ENUMERATION_SIZE {
        return Err(Error::BudgetExceeded { required: 1u128 << d, budget: 1u128 << MAX_ENUMERATION_SIZE });
    }
    let mut best = (f64::INFINITY, 0);
    for m in 0..1u64 << d {
        let v = f.eval(m);
        if v < best.0 {
            best = (v, m);
        }
    }
    Ok(best)
}

/// OracleReport for a Lovász-extension problem: the enumerated minimum and
/// the indicator of its minimizer.
pub fn subset_enum_report(f: &dyn SetFunction) -> Result<OracleReport> {
    let (v, m) = submodular_min_enumerate(f)?;
    Ok(OracleReport {
        fstar: v,
        argmin: (0..f.ground_size()).map(|i| (m >> i & 1) as f64).collect(),
        method: OracleMethod::SubsetEnum,
        resolution: 1 << f.ground_size(),
        certified: true,
        certified_tol: 0.0,
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{sign0, Constraint, FnObjective};
    use crate::problems::CutFunction;

    fn shifted(s: f64) -> ProblemInstance {
        FnObjective::new(1, move |w| (w[0] - s).abs(), move |w, g| g[0] = sign0(w[0] - s), |_| 1.0)
            .into_problem("abs", Constraint::Unconstrained)
            .unwrap()
    }

    #[test]
    fn grid_examples() {
        let r = grid_min(&shifted(0.0), &[-1.0], &[1.0], 3, 1000).unwrap();
        assert_eq!((r.fstar, r.argmin.clone()), (0.0, vec![0.0]));
        let r = grid_min(&shifted(0.3), &[-1.0], &[1.0], 201, 1000).unwrap();
        assert!((r.argmin[0] - 0.3).abs() < 1e-12);
        assert!(r.fstar < 1e-12);
        assert!(matches!(
            grid_min(&shifted(0.0), &[-1.0], &[1.0], 2000, 1000),
            Err(Error::BudgetExceeded { required: 2000, .. })
        ));
    }

    #[test]
    fn weighted_median_examples() {
        assert_eq!(weighted_median(&[1.0, 2.0, 10.0], &[1.0; 3]).unwrap(), 2.0);
        assert_eq!(weighted_median(&[0.0, 1.0], &[1.0; 2]).unwrap(), 0.0);
        assert_eq!(weighted_median(&[1.0, 2.0, 10.0], &[5.0, 1.0, 1.0]).unwrap(), 1.0);
        assert!(weighted_median(&[], &[]).is_err());
    }

    #[test]
    fn sublevel_examples() {
        let p = shifted(0.0);
        let o = grid_min(&p, &[-1.0], &[1.0], 3, 10).unwrap();
        assert_eq!(sublevel_project(&p, &[0.2], 0.5, &o).unwrap(), vec![0.2]);
        let u = sublevel_project(&p, &[2.0], 0.5, &o).unwrap();
        assert!((u[0] - 0.5).abs() < 1e-12);
        let u = sublevel_project(&p, &[-3.0], 0.5, &o).unwrap();
        assert!((u[0] + 0.5).abs() < 1e-12);
        let mut bad = o.clone();
        bad.fstar = -1.0;
        assert!(matches!(sublevel_project(&p, &[2.0], 0.5, &bad), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn b_eps_examples() {
        let p = shifted(0.0);
        let o = grid_min(&p, &[-1.0], &[1.0], 3, 10).unwrap();
        let b = estimate_b_eps(&p, 0.25, &o, 0, 1).unwrap();
        assert!((b.value - 0.25).abs() < 1e-12);
        let sq = FnObjective::new(1, |w| w[0] * w[0], |w, g| g[0] = 2.0 * w[0], |_| 1.0)
            .into_problem("sq", Constraint::Unconstrained)
            .unwrap();
        let o = grid_min(&sq, &[-1.0], &[1.0], 3, 10).unwrap();
        let b = estimate_b_eps(&sq, 0.04, &o, 0, 1).unwrap();
        assert!((b.value - 0.2).abs() < 1e-12);
    }

    #[test]
    fn enumeration() {
        let f = CutFunction::path(4).unwrap();
        assert_eq!(submodular_min_enumerate(&f).unwrap(), (0.0, 0));
        let z = CutFunction::new(3, vec![], vec![0.0; 3]).unwrap();
        assert_eq!(submodular_min_enumerate(&z).unwrap(), (0.0, 0));
        let big = CutFunction::new(21, vec![], vec![0.0; 21]).unwrap();
        assert!(submodular_min_enumerate(&big).is_err());
    }

    #[test]
    fn long_run_upper_bound() {
        let r = long_run(&shifted(0.3), &[2.0], 2.0, 20_000).unwrap();
        assert!(!r.certified);
        assert!(r.fstar < 1e-6, "{}", r.fstar);
    }
}
