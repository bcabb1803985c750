use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::linalg::lp_norm;
use crate::problem::{Constraint, Objective, ProblemInstance};

pub const MAX_GROUND_SIZE: usize = 24;
/// Largest ground set for which submodularity is checked exhaustively.
pub const EXHAUSTIVE_CHECK_SIZE: usize = 12;

/// Set function on {0, .., d−1}, subsets encoded as bitmasks, F(∅) = 0.
pub trait SetFunction: Send + Sync {
    fn ground_size(&self) -> usize;

    fn eval(&self, mask: u64) -> f64;

    /// b_i ≥ |F(A ∪ {i}) − F(A)| for every A. The default enumerates all A.
    fn marginal_bounds(&self) -> Vec<f64> {
        let d = self.ground_size();
        let mut b = vec![0.0_f64; d];
        for a in 0..1u64 << d {
            let fa = self.eval(a);
            for (i, bi) in b.iter_mut().enumerate() {
                if a & (1 << i) == 0 {
                    *bi = bi.max((self.eval(a | 1 << i) - fa).abs());
                }
            }
        }
        b
    }

    /// A lower bound on min_A F(A), if cheaply known.
    fn lower_bound(&self) -> Option<f64> {
        None
    }
}

/// Weighted cut of an undirected graph plus a modular term Σ_{i∈A} m_i.
#[derive(Clone, Debug, PartialEq)]
pub struct CutFunction {
    d: usize,
    edges: Vec<(usize, usize, f64)>,
    modular: Vec<f64>,
}

impl CutFunction {
    pub fn new(d: usize, edges: Vec<(usize, usize, f64)>, modular: Vec<f64>) -> Result<Self> {
        if d == 0 || d > MAX_GROUND_SIZE {
            return invalid(format!("ground set size must lie in 1..={MAX_GROUND_SIZE}, got {d}"));
        }
        if modular.len() != d {
            return invalid("modular term length differs from the ground set size");
        }
        for &(i, j, w) in &edges {
            if i >= d || j >= d || i == j {
                return invalid(format!("bad edge ({i}, {j})"));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return invalid(format!("cut weights must be non-negative, got {w}"));
            }
        }
        Ok(Self { d, edges, modular })
    }

    /// Unit-weight path 0 − 1 − … − (d−1), no modular term.
    pub fn path(d: usize) -> Result<Self> {
        let edges = (1..d).map(|i| (i - 1, i, 1.0)).collect();
        Self::new(d, edges, vec![0.0; d])
    }

    /// Erdős–Rényi graph with edge probability `density`, weights in
    /// [0.1, 1), and modular weights uniform in [−1, 1)·`modular_scale`.
    pub fn random(d: usize, density: f64, modular_scale: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                if rng.random::<f64>() < density {
                    edges.push((i, j, rng.random_range(0.1..1.0)));
                }
            }
        }
        let modular = (0..d).map(|_| modular_scale * rng.random_range(-1.0..1.0)).collect();
        Self::new(d, edges, modular)
    }

    pub fn weighted_degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.d];
        for &(i, j, w) in &self.edges {
            deg[i] += w;
            deg[j] += w;
        }
        deg
    }
}

impl SetFunction for CutFunction {
    fn ground_size(&self) -> usize {
        self.d
    }

    fn eval(&self, mask: u64) -> f64 {
        let cut: f64 = self
            .edges
            .iter()
            .filter(|&&(i, j, _)| (mask >> i & 1) != (mask >> j & 1))
            .map(|e| e.2)
            .sum();
        let m: f64 = (0..self.d).filter(|i| mask >> i & 1 == 1).map(|i| self.modular[i]).sum();
        cut + m
    }

    fn marginal_bounds(&self) -> Vec<f64> {
        self.weighted_degrees()
            .iter()
            .zip(&self.modular)
            .map(|(g, m)| g + m.abs())
            .collect()
    }

    fn lower_bound(&self) -> Option<f64> {
        Some(self.modular.iter().map(|m| m.min(0.0)).sum())
    }
}

/// A set function given by its full table of 2^d values.
#[derive(Clone, Debug, PartialEq)]
pub struct TableSetFunction {
    d: usize,
    values: Vec<f64>,
}

impl TableSetFunction {
    pub fn new(d: usize, values: Vec<f64>) -> Result<Self> {
        if d == 0 || d > MAX_GROUND_SIZE {
            return invalid(format!("ground set size must lie in 1..={MAX_GROUND_SIZE}, got {d}"));
        }
        if values.len() != 1 << d {
            return invalid(format!("expected {} values, got {}", 1u64 << d, values.len()));
        }
        if values[0] != 0.0 {
            return invalid("F(empty set) must be 0");
        }
        Ok(Self { d, values })
    }

    pub fn from_fn(d: usize, f: impl Fn(u64) -> f64) -> Result<Self> {
        Self::new(d, (0..1u64 << d).map(f).collect())
    }
}

impl SetFunction for TableSetFunction {
    fn ground_size(&self) -> usize {
        self.d
    }

    fn eval(&self, mask: u64) -> f64 {
        self.values[mask as usize]
    }
}

/// F(∅) = 0 and, for d ≤ 12, F(A+i) + F(A+j) ≥ F(A+i+j) + F(A) for all A
/// and i, j ∉ A (equivalent to submodularity). Larger ground sets are only
/// checked at ∅.
pub fn check_submodular(f: &dyn SetFunction, tol: f64) -> Result<()> {
    let d = f.ground_size();
    if f.eval(0) != 0.0 {
        return invalid(format!("F(empty set) = {} must be 0", f.eval(0)));
    }
    if d > EXHAUSTIVE_CHECK_SIZE {
        return Ok(());
    }
    for a in 0..1u64 << d {
        let fa = f.eval(a);
        for i in 0..d {
            if a >> i & 1 == 1 {
                continue;
            }
            let fi = f.eval(a | 1 << i);
            for j in i + 1..d {
                if a >> j & 1 == 1 {
                    continue;
                }
                let lhs = fi + f.eval(a | 1 << j);
                let rhs = f.eval(a | 1 << i | 1 << j) + fa;
                if lhs < rhs - tol {
                    return invalid(format!(
                        "not submodular at A = {a:#b}, i = {i}, j = {j}: {lhs} < {rhs}"
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Greedy evaluation: sort w descending (ties by index) and take increments
/// of F along the chain. Returns f(w) and the maximizing base.
pub fn lovasz_value_and_base(f: &dyn SetFunction, w: &[f64]) -> (f64, Vec<f64>) {
    let d = w.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    let mut base = vec![0.0; d];
    let (mut mask, mut prev, mut val) = (0u64, 0.0, 0.0);
    for &i in &order {
        mask |= 1 << i;
        let cur = f.eval(mask);
        base[i] = cur - prev;
        val += w[i] * base[i];
        prev = cur;
    }
    (val, base)
}

struct LovaszExtension {
    setfn: Arc<dyn SetFunction>,
    bounds: Vec<f64>,
}

impl Objective for LovaszExtension {
    fn dim(&self) -> usize {
        self.setfn.ground_size()
    }

    fn value(&self, w: &[f64]) -> f64 {
        lovasz_value_and_base(self.setfn.as_ref(), w).0
    }

    fn subgradient(&self, w: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&lovasz_value_and_base(self.setfn.as_ref(), w).1);
    }

    fn lipschitz_bound(&self, q: f64) -> f64 {
        lp_norm(&self.bounds, q)
    }
}

/// min over [0,1]^d of the Lovász extension. Polyhedral (θ = 1).
pub fn lovasz_problem(setfn: Arc<dyn SetFunction>) -> Result<ProblemInstance> {
    let d = setfn.ground_size();
    if d == 0 || d > MAX_GROUND_SIZE {
        return invalid(format!("ground set size must lie in 1..={MAX_GROUND_SIZE}, got {d}"));
    }
    check_submodular(setfn.as_ref(), 1e-9)?;
    let lb = setfn.lower_bound();
    let obj = LovaszExtension { bounds: setfn.marginal_bounds(), setfn };
    let mut p = ProblemInstance::new(
        "lovasz",
        Arc::new(obj),
        Constraint::Box { lo: vec![0.0; d], hi: vec![1.0; d] },
    )?
    .with_error_bound_theta(1.0);
    if let Some(lb) = lb {
        p = p.with_fstar_lower_bound(lb);
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agrees_on_vertices() {
        let f = CutFunction::random(5, 0.6, 0.5, 3).unwrap();
        for mask in 0..32u64 {
            let w: Vec<f64> = (0..5).map(|i| (mask >> i & 1) as f64).collect();
            let (v, _) = lovasz_value_and_base(&f, &w);
            assert!((v - f.eval(mask)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_supermodular() {
        // F(A) = |A|² is supermodular
        let f = TableSetFunction::from_fn(3, |m| (m.count_ones() as f64).powi(2)).unwrap();
        assert!(lovasz_problem(Arc::new(f)).is_err());
        assert!(TableSetFunction::new(1, vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn path_cut_problem() {
        let p = lovasz_problem(Arc::new(CutFunction::path(4).unwrap())).unwrap();
        assert_eq!(p.value(&[0.0; 4]), 0.0);
        assert_eq!(p.value(&[1.0, 1.0, 0.0, 0.0]), 1.0);
        assert!((p.value(&[0.5, 0.25, 0.25, 1.0]) - 1.0).abs() < 1e-15);
        assert_eq!(p.lipschitz_bound(f64::INFINITY), 2.0);
    }

    #[test]
    fn default_marginal_bounds_match_cut() {
        let f = CutFunction::random(6, 0.5, 1.0, 11).unwrap();
        let t = TableSetFunction::from_fn(6, |m| f.eval(m)).unwrap();
        for (a, b) in t.marginal_bounds().iter().zip(f.marginal_bounds()) {
            assert!(*a <= b + 1e-12);
        }
    }
}
