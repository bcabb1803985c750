//! Vector arithmetic, p-norms and the projection operators used as feasible
//! sets. Iterates are always dense `Vec<f64>`; sparse storage is reserved for
//! read-only data matrices.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Sentinel exponent selecting the max-norm.
pub const INF_NORM: f64 = f64::INFINITY;

/// (Σ|w_i|^p)^{1/p}, or max|w_i| when `p` is [`INF_NORM`].
pub fn pnorm(w: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return invalid(format!("p-norm exponent must be >= 1, got {p}"));
    }
    if let Some(i) = w.iter().position(|x| !x.is_finite()) {
        return invalid(format!("non-finite entry {} at index {i}", w[i]));
    }
    Ok(lp_norm(w, p))
}

/// Unchecked p-norm. Scales by the largest magnitude so that large exponents
/// neither overflow nor underflow.
pub(crate) fn lp_norm(w: &[f64], p: f64) -> f64 {
    let m = w.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if m == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return m;
    }
    if p == 2.0 {
        return w.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    if p == 1.0 {
        return w.iter().map(|x| x.abs()).sum();
    }
    let s: f64 = w.iter().map(|x| (x.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

/// The exponent q with 1/p + 1/q = 1.
pub fn conjugate_exponent(p: f64) -> Result<f64> {
    if !(p > 1.0) || p.is_nan() {
        return invalid(format!("conjugate exponent needs p > 1, got {p}"));
    }
    if p.is_infinite() {
        return Ok(1.0);
    }
    if p == 2.0 {
        return Ok(2.0);
    }
    Ok(p / (p - 1.0))
}

/// The normed space (ℝ^d, ‖·‖_p) with p ∈ (1, 2]. The dual exponent and the
/// strong-convexity modulus of ½‖·‖_p² are derived from p, never supplied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PNormSpace {
    p: f64,
    q: f64,
}

impl PNormSpace {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0 && p <= 2.0) {
            return invalid(format!("p must lie in (1, 2], got {p}"));
        }
        Ok(Self {
            p,
            q: conjugate_exponent(p)?,
        })
    }

    /// The space used for d-dimensional sparse learning: p = 2 ln d / (2 ln d − 1).
    pub fn for_dimension(d: usize) -> Result<Self> {
        let ln_d = (d as f64).ln();
        if !(2.0 * ln_d > 2.0) {
            return invalid(format!("dimension {d} too small for the ln d choice"));
        }
        Self::new(2.0 * ln_d / (2.0 * ln_d - 1.0))
    }

    pub fn euclidean() -> Self {
        Self { p: 2.0, q: 2.0 }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn modulus(&self) -> f64 {
        self.p - 1.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    lp_norm(a, 2.0)
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// y ← y + a·x
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Euclidean projection onto {u : ‖u‖₁ ≤ radius} by sorting magnitudes and
/// locating the soft-threshold pivot. Points already inside are returned
/// unchanged.
pub fn project_l1_ball(w: &[f64], radius: f64) -> Result<Vec<f64>> {
    if !(radius > 0.0) {
        return invalid(format!("l1 radius must be positive, got {radius}"));
    }
    Ok(l1_ball(w, radius))
}

pub(crate) fn l1_ball(w: &[f64], radius: f64) -> Vec<f64> {
    let l1: f64 = w.iter().map(|x| x.abs()).sum();
    if l1 <= radius {
        return w.to_vec();
    }
    let mut mags: Vec<f64> = w.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &u) in mags.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - radius) / (j + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }
    w.iter()
        .map(|&x| x.signum() * (x.abs() - tau).max(0.0))
        .collect()
}

/// Componentwise clamp onto [lo, hi].
pub fn project_box(w: &[f64], lo: &[f64], hi: &[f64]) -> Result<Vec<f64>> {
    if lo.len() != w.len() || hi.len() != w.len() {
        return invalid(format!(
            "box bounds have lengths {}/{} for a vector of length {}",
            lo.len(),
            hi.len(),
            w.len()
        ));
    }
    if let Some(i) = (0..w.len()).find(|&i| !(lo[i] <= hi[i])) {
        return invalid(format!("box bound lo[{i}]={} > hi[{i}]={}", lo[i], hi[i]));
    }
    Ok(clamp_box(w, lo, hi))
}

pub(crate) fn clamp_box(w: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    w.iter()
        .zip(lo.iter().zip(hi))
        .map(|(&x, (&l, &h))| x.max(l).min(h))
        .collect()
}

/// Euclidean projection onto {u : ‖u‖₂ ≤ radius}.
pub fn project_l2_ball(w: &[f64], radius: f64) -> Result<Vec<f64>> {
    if !(radius > 0.0) {
        return invalid(format!("l2 radius must be positive, got {radius}"));
    }
    Ok(l2_ball(w, radius))
}

pub(crate) fn l2_ball(w: &[f64], radius: f64) -> Vec<f64> {
    let n = norm2(w);
    if n <= radius {
        return w.to_vec();
    }
    let s = radius / n;
    w.iter().map(|x| x * s).collect()
}

/// A sparse vector with strictly increasing indices.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVec {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVec {
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return invalid("sparse vector index/value length mismatch");
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("sparse vector indices must be strictly increasing");
        }
        if !all_finite(&values) {
            return invalid("sparse vector has non-finite values");
        }
        Ok(Self { indices, values })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().copied()
    }
}

/// Row-compressed sparse matrix. Rows are the examples x_i.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

/// Borrowed view of one row.
#[derive(Clone, Copy, Debug)]
pub struct RowView<'a> {
    pub indices: &'a [usize],
    pub values: &'a [f64],
}

impl RowView<'_> {
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(self.values)
            .map(|(&j, &v)| v * w[j])
            .sum()
    }

    /// out ← out + a·row
    pub fn axpy_into(&self, a: f64, out: &mut [f64]) {
        for (&j, &v) in self.indices.iter().zip(self.values) {
            out[j] += a * v;
        }
    }

    pub fn norm(&self, p: f64) -> f64 {
        lp_norm(self.values, p)
    }
}

impl CsrMatrix {
    pub fn empty(ncols: usize) -> Self {
        Self {
            ncols,
            indptr: vec![0],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a matrix from sparse rows; every index must be below `ncols`.
    pub fn from_rows(rows: &[SparseVec], ncols: usize) -> Result<Self> {
        let mut m = Self::empty(ncols);
        for (i, r) in rows.iter().enumerate() {
            if let Some(j) = r.max_index() {
                if j >= ncols {
                    return invalid(format!("row {i} has index {j} >= ncols {ncols}"));
                }
            }
            m.indices.extend_from_slice(r.indices());
            m.values.extend_from_slice(r.values());
            m.indptr.push(m.indices.len());
        }
        Ok(m)
    }

    /// Builds a matrix from dense rows, dropping exact zeros.
    pub fn from_dense(rows: &[Vec<f64>], ncols: usize) -> Result<Self> {
        let mut m = Self::empty(ncols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != ncols {
                return invalid(format!("dense row {i} has length {} != {ncols}", r.len()));
            }
            if !all_finite(r) {
                return invalid(format!("dense row {i} has non-finite entries"));
            }
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    m.indices.push(j);
                    m.values.push(v);
                }
            }
            m.indptr.push(m.indices.len());
        }
        Ok(m)
    }

    pub fn nrows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> RowView<'_> {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        RowView {
            indices: &self.indices[a..b],
            values: &self.values[a..b],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = RowView<'_>> + '_ {
        (0..self.nrows()).map(move |i| self.row(i))
    }

    /// max_i ‖x_i‖_q
    pub fn max_row_norm(&self, q: f64) -> f64 {
        self.rows().map(|r| r.norm(q)).fold(0.0, f64::max)
    }

    pub fn to_dense_row(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        self.row(i).axpy_into(1.0, &mut out);
        out
    }

    /// Returns a copy with every column divided by its largest magnitude.
    /// All-zero columns are left alone.
    pub fn scaled_max_abs(&self) -> (Self, Vec<f64>) {
        let mut scale = vec![0.0_f64; self.ncols];
        for (&j, &v) in self.indices.iter().zip(&self.values) {
            scale[j] = scale[j].max(v.abs());
        }
        let mut out = self.clone();
        for (&j, v) in out.indices.iter().zip(out.values.iter_mut()) {
            if scale[j] > 0.0 {
                *v /= scale[j];
            }
        }
        (out, scale)
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn vec_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0..10.0_f64, 1..8)
    }

    proptest! {
        #[test]
        fn holder_inequality(
            (g, w) in (1usize..8).prop_flat_map(|d| (
                prop::collection::vec(-10.0..10.0_f64, d),
                prop::collection::vec(-10.0..10.0_f64, d),
            )),
            p in 1.0001..2.0_f64,
        ) {
            let q = conjugate_exponent(p).unwrap();
            let lhs = dot(&g, &w).abs();
            let rhs = pnorm(&g, q).unwrap() * pnorm(&w, p).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn l1_projection_feasible_and_idempotent(w in vec_strategy(), r in 0.1..5.0_f64) {
            let out = project_l1_ball(&w, r).unwrap();
            prop_assert!(lp_norm(&out, 1.0) <= r + 1e-12);
            let again = project_l1_ball(&out, r).unwrap();
            for (a, b) in out.iter().zip(&again) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            if lp_norm(&w, 1.0) <= r {
                prop_assert_eq!(out, w);
            }
        }

        #[test]
        fn projections_are_nonexpansive(
            (u, v) in (1usize..8).prop_flat_map(|d| (
                prop::collection::vec(-10.0..10.0_f64, d),
                prop::collection::vec(-10.0..10.0_f64, d),
            )),
            r in 0.1..5.0_f64,
        ) {
            let d = u.len();
            let lo = vec![-1.0; d];
            let hi = vec![2.0; d];
            let base = dist2(&u, &v) + 1e-12;
            prop_assert!(dist2(&l1_ball(&u, r), &l1_ball(&v, r)) <= base);
            prop_assert!(dist2(&l2_ball(&u, r), &l2_ball(&v, r)) <= base);
            prop_assert!(dist2(&clamp_box(&u, &lo, &hi), &clamp_box(&v, &lo, &hi)) <= base);
        }
    }
}
