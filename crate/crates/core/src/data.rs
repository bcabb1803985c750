//! libsvm text I/O, edge lists and seeded synthetic datasets.

use std::io::{BufRead, Write};

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, CsrMatrix, SparseVec};
use crate::problems::{Dataset, GFlassoGraph};

fn parse_err<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, column, message: message.into() })
}

/// Whitespace-separated tokens of `s` with their 1-based columns. Anything
/// after '#' is a comment.
fn tokens(s: &str) -> Vec<(usize, &str)> {
    let s = s.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(b)) => {
                out.push((b + 1, &s[b..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(b) = start {
        out.push((b + 1, &s[b..]));
    }
    out
}

/// Parses "label idx:val idx:val ..." lines (1-based indices). Explicit
/// zeros are dropped and pairs are sorted by index. d is the largest index
/// seen unless `d_override` is given.
pub fn parse_libsvm<R: BufRead>(reader: R, d_override: Option<usize>) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut y = Vec::new();
    let mut d = 0usize;
    for (ln, line) in reader.lines().enumerate() {
        let line = line?;
        let ln = ln + 1;
        let toks = tokens(&line);
        let Some(&(col, label)) = toks.first() else { continue };
        let label: f64 = match label.parse() {
            Ok(v) if f64::is_finite(v) => v,
            _ => return parse_err(ln, col, format!("bad label '{label}'")),
        };
        let mut pairs: Vec<(usize, f64, usize)> = Vec::with_capacity(toks.len() - 1);
        for &(col, tok) in &toks[1..] {
            let Some((i, v)) = tok.split_once(':') else {
                return parse_err(ln, col, format!("expected idx:val, got '{tok}'"));
            };
            let idx: usize = match i.parse() {
                Ok(k) if k >= 1 => k,
                _ => return parse_err(ln, col, format!("bad index '{i}' (indices are 1-based)")),
            };
            let val: f64 = match v.parse() {
                Ok(x) if f64::is_finite(x) => x,
                _ => return parse_err(ln, col + i.len() + 1, format!("bad value '{v}'")),
            };
            pairs.push((idx - 1, val, col));
        }
        pairs.sort_by_key(|p| p.0);
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            let c = w[0].2.max(w[1].2);
            return parse_err(ln, c, format!("duplicate index {}", w[0].0 + 1));
        }
        if let Some(p) = pairs.last() {
            d = d.max(p.0 + 1);
        }
        let (idx, val): (Vec<usize>, Vec<f64>) =
            pairs.into_iter().filter(|p| p.1 != 0.0).map(|p| (p.0, p.1)).unzip();
        rows.push(SparseVec::new(idx, val)?);
        y.push(label);
    }
    if let Some(o) = d_override {
        if o < d {
            return invalid(format!("dimension override {o} is below the largest index {d}"));
        }
        d = o;
    }
    Dataset::new(CsrMatrix::from_rows(&rows, d)?, y)
}

/// Canonical libsvm form: shortest round-trip float formatting, ascending
/// indices, no zeros.
pub fn serialize_libsvm<W: Write>(data: &Dataset, mut out: W) -> Result<()> {
    for (i, y) in data.y.iter().enumerate() {
        write!(out, "{y}")?;
        let r = data.x.row(i);
        for (j, v) in r.indices.iter().zip(r.values) {
            write!(out, " {}:{v}", j + 1)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// y_i ← +1 if y_i = positive_class, else −1.
pub fn binarize_labels(data: &Dataset, positive_class: f64) -> Dataset {
    if !data.y.contains(&positive_class) {
        warn!("positive class {positive_class} does not occur; every label becomes -1");
    }
    Dataset {
        x: data.x.clone(),
        y: data.y.iter().map(|&v| if v == positive_class { 1.0 } else { -1.0 }).collect(),
    }
}

/// Lines "i j [s]" with 1-based node indices; s defaults to 1.
pub fn load_edge_list<R: BufRead>(reader: R, d: usize) -> Result<GFlassoGraph> {
    let mut edges = Vec::new();
    for (ln, line) in reader.lines().enumerate() {
        let line = line?;
        let ln = ln + 1;
        let toks = tokens(&line);
        if toks.is_empty() {
            continue;
        }
        if !(2..=3).contains(&toks.len()) {
            return parse_err(ln, toks[0].0, "expected 'i j [s]'");
        }
        let node = |k: usize| -> Result<usize> {
            let (col, t) = toks[k];
            match t.parse::<usize>() {
                Ok(i) if (1..=d).contains(&i) => Ok(i - 1),
                _ => parse_err(ln, col, format!("node '{t}' not in 1..={d}")),
            }
        };
        let (i, j) = (node(0)?, node(1)?);
        if i == j {
            return parse_err(ln, toks[1].0, "self loop");
        }
        let s = match toks.get(2) {
            None => 1.0,
            Some(&(col, t)) => match t.parse::<f64>() {
                Ok(s) if s > 0.0 && s.is_finite() => s,
                _ => return parse_err(ln, col, format!("bad weight '{t}'")),
            },
        };
        edges.push((i, j, s));
    }
    GFlassoGraph::new(d, edges)
}

/// w₀ ~ N(0, I) drawn from a ChaCha8 stream seeded with `seed`.
pub fn gaussian_start(d: usize, seed: u64) -> Vec<f64> {
    normal_vec(&mut ChaCha8Rng::seed_from_u64(seed), d)
}

/// A generated dataset and the weight vector it was planted with.
#[derive(Clone, Debug, PartialEq)]
pub struct Synthetic {
    pub data: Dataset,
    pub planted: Vec<f64>,
}

fn normal_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn check_size(n: usize, d: usize) -> Result<()> {
    if n == 0 || d == 0 {
        return invalid(format!("n and d must be positive (n = {n}, d = {d})"));
    }
    Ok(())
}

/// x_i ~ N(0, I), w ~ N(0, I), y_i = x_iᵀw + noise·N(0, 1). ChaCha8 stream
/// seeded with `seed`: w first, then (x_i, noise_i) row by row.
pub fn synth_regression(n: usize, d: usize, noise: f64, seed: u64) -> Result<Synthetic> {
    check_size(n, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = normal_vec(&mut rng, d);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let x = normal_vec(&mut rng, d);
        let e: f64 = rng.sample(StandardNormal);
        y.push(dot(&x, &w) + noise * e);
        rows.push(x);
    }
    Ok(Synthetic { data: Dataset::new(CsrMatrix::from_dense(&rows, d)?, y)?, planted: w })
}

/// Unit direction u ~ N(0, I)/‖·‖; x_i ~ N(0, I) redrawn while |x_iᵀu| < 0.1;
/// y_i = sign(x_iᵀu). The planted vector is u scaled so that the smallest
/// margin y_i x_iᵀw equals `margin` (u itself when margin = 0).
pub fn synth_classification(n: usize, d: usize, margin: f64, seed: u64) -> Result<Synthetic> {
    check_size(n, d)?;
    if !(margin >= 0.0) || !margin.is_finite() {
        return invalid(format!("margin must be non-negative, got {margin}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = normal_vec(&mut rng, d);
    let nu = dot(&u, &u).sqrt();
    u.iter_mut().for_each(|v| *v /= nu);
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut min_margin = f64::INFINITY;
    while rows.len() < n {
        let x = normal_vec(&mut rng, d);
        let z = dot(&x, &u);
        if z.abs() < 0.1 {
            continue;
        }
        min_margin = min_margin.min(z.abs());
        y.push(if z > 0.0 { 1.0 } else { -1.0 });
        rows.push(x);
    }
    let scale = if margin > 0.0 { margin / min_margin } else { 1.0 };
    let planted = u.iter().map(|v| v * scale).collect();
    Ok(Synthetic { data: Dataset::new(CsrMatrix::from_dense(&rows, d)?, y)?, planted })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn libsvm_example() {
        let d = parse_libsvm("+1 1:0.5 3:2\n".as_bytes(), None).unwrap();
        assert_eq!(d.y, vec![1.0]);
        assert_eq!(d.d(), 3);
        assert_eq!(d.x.to_dense_row(0), vec![0.5, 0.0, 2.0]);
    }

    #[test]
    fn libsvm_empty_and_override() {
        let d = parse_libsvm("".as_bytes(), None).unwrap();
        assert_eq!((d.n(), d.d()), (0, 0));
        let d = parse_libsvm("-1 2:1\n".as_bytes(), Some(5)).unwrap();
        assert_eq!(d.d(), 5);
        assert!(parse_libsvm("-1 4:1\n".as_bytes(), Some(3)).is_err());
    }

    #[test]
    fn libsvm_errors_carry_position() {
        match parse_libsvm("1 1:2\n1 2:x\n".as_bytes(), None) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 5)),
            other => panic!("{other:?}"),
        }
        match parse_libsvm("1 3:1 2:1 3:4\n".as_bytes(), None) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 1);
                assert!(message.contains("duplicate"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_libsvm("abc 1:1\n".as_bytes(), None), Err(Error::Parse { column: 1, .. })));
        assert!(parse_libsvm("1 0:1\n".as_bytes(), None).is_err());
    }

    #[test]
    fn binarize() {
        let d = Dataset::from_dense(&[vec![1.0], vec![2.0], vec![3.0]], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(binarize_labels(&d, 2.0).y, vec![-1.0, 1.0, -1.0]);
        let b = Dataset::from_dense(&[vec![1.0], vec![2.0]], vec![1.0, -1.0]).unwrap();
        assert_eq!(binarize_labels(&b, 1.0), b);
    }

    #[test]
    fn edge_lists() {
        let g = load_edge_list("1 2\n".as_bytes(), 2).unwrap();
        assert_eq!(g.edges(), &[(0, 1, 1.0)]);
        assert_eq!(g.f_matrix().to_dense_row(0), vec![1.0, -1.0]);
        let g = load_edge_list("1 2 0.5\n2 3\n".as_bytes(), 3).unwrap();
        let w: Vec<f64> = g.edges().iter().map(|e| e.2).collect();
        assert_eq!(w, vec![0.5, 1.0]);
        assert!(load_edge_list("".as_bytes(), 3).unwrap().edges().is_empty());
        assert!(matches!(load_edge_list("2 2\n".as_bytes(), 3), Err(Error::Parse { .. })));
        assert!(matches!(load_edge_list("1 4\n".as_bytes(), 3), Err(Error::Parse { .. })));
    }

    #[test]
    fn synth_is_seeded() {
        assert_eq!(synth_regression(20, 4, 0.3, 9).unwrap(), synth_regression(20, 4, 0.3, 9).unwrap());
        assert_ne!(synth_regression(20, 4, 0.3, 9).unwrap(), synth_regression(20, 4, 0.3, 10).unwrap());
        assert_eq!(synth_classification(20, 4, 1.0, 9).unwrap(), synth_classification(20, 4, 1.0, 9).unwrap());
    }

    #[test]
    fn planted_margin() {
        let s = synth_classification(50, 5, 1.0, 4).unwrap();
        let m = s
            .data
            .x
            .rows()
            .zip(&s.data.y)
            .map(|(r, y)| y * r.dot(&s.planted))
            .fold(f64::INFINITY, f64::min);
        assert!((m - 1.0).abs() < 1e-12);
    }
}
