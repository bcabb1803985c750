//! Invariant suites run by `rsg verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{conjugate_exponent, dist2, dot, lp_norm, norm2, PNormSpace};
use crate::oracles::{absolute_loss_oracle, estimate_b_eps, grid_min, sublevel_project, OracleReport};
use crate::problem::ProblemInstance;
use crate::problems::zoo::{instances, miniatures, Miniature};
use crate::solvers::{dap_run, pnorm_prox, sg_run, LambdaMode, TraceOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Prox,
    Lemmas,
    Oracle,
    Zoo,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "prox" => Ok(Suite::Prox),
            "lemmas" => Ok(Suite::Lemmas),
            "oracle" => Ok(Suite::Oracle),
            "zoo" => Ok(Suite::Zoo),
            _ => Err(format!("unknown suite '{s}' (expected prox, lemmas, oracle or zoo)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// First few counterexamples.
    pub counterexamples: Vec<String>,
}

impl Check {
    fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), cases: 0, failures: 0, counterexamples: Vec::new() }
    }

    fn case(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.counterexamples.len() < 5 {
                self.counterexamples.push(detail());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<VerifyReport> {
    let checks = match suite {
        Suite::Prox => prox_suite(seed)?,
        Suite::Lemmas => lemmas_suite()?,
        Suite::Oracle => oracle_suite(seed)?,
        Suite::Zoo => zoo_suite(seed),
    };
    Ok(VerifyReport { suite, seed, checks })
}

fn normal(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn prox_objective(u: &[f64], w: &[f64], g: &[f64], p: f64) -> f64 {
    let diff: Vec<f64> = u.iter().zip(w).map(|(a, b)| a - b).collect();
    dot(g, &diff) + 0.5 * lp_norm(&diff, p).powi(2)
}

fn prox_suite(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut identity = Check::new("prox step length equals dual norm");
    let mut local = Check::new("prox output beats random perturbations");
    for _ in 0..1000 {
        let d = rng.random_range(1..=10);
        let p = 2.0 - rng.random::<f64>() * 0.95;
        let w = normal(&mut rng, d);
        let g = normal(&mut rng, d);
        let u = pnorm_prox(&w, &g, p)?;
        let q = conjugate_exponent(p)?;
        let step: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - b).collect();
        let (lhs, rhs) = (lp_norm(&step, p), lp_norm(&g, q));
        identity.case((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300), || {
            format!("p = {p}, g = {g:?}: {lhs} vs {rhs}")
        });
        let f0 = prox_objective(&u, &w, &g, p);
        let mut ok = true;
        for _ in 0..20 {
            let scale = 10f64.powf(-rng.random_range(1.0..6.0));
            let v: Vec<f64> = u.iter().map(|x| x + scale * rng.sample::<f64, _>(StandardNormal)).collect();
            ok &= prox_objective(&v, &w, &g, p) >= f0 - 1e-12 * (1.0 + f0.abs());
        }
        local.case(ok, || format!("p = {p}, w = {w:?}, g = {g:?}"));
    }
    Ok(vec![identity, local])
}

/// Certified reference optimum for a miniature.
pub fn miniature_oracle(m: &Miniature) -> Result<OracleReport> {
    if let Some(data) = &m.abs_loss_data {
        return absolute_loss_oracle(&m.problem, data);
    }
    let k = if m.problem.dim() == 1 { 4001 } else { 801 };
    grid_min(&m.problem, &m.search_lo, &m.search_hi, k, 10_000_000)
}

fn lemmas_suite() -> Result<Vec<Check>> {
    let mut sg_bound = Check::new("SG averaged-iterate bound");
    let mut da_bound = Check::new("DA_p averaged-iterate bound (unit weights)");
    for m in miniatures() {
        let o = miniature_oracle(&m)?;
        let p = &m.problem;
        let g2 = p.lipschitz_bound(2.0);
        for t in [10u64, 100, 1000] {
            for eta in [1e-3, 1e-2, 1e-1] {
                let out = sg_run(p, &m.start, eta, t, TraceOptions::default())?;
                let gap = p.value(&out.point) - p.value(&o.argmin);
                let bound = g2 * g2 * eta / 2.0 + dist2(&m.start, &o.argmin).powi(2) / (2.0 * eta * t as f64);
                sg_bound.case(gap <= bound + 1e-9, || format!("{} T={t} eta={eta}: {gap} > {bound}", m.name));
                if !p.is_unconstrained() {
                    continue;
                }
                for pe in [1.5, 2.0] {
                    let space = PNormSpace::new(pe)?;
                    let gq = p.lipschitz_bound(space.q());
                    let out = dap_run(p, &m.start, eta, t, space, LambdaMode::Unit, TraceOptions::default())?;
                    let gap = p.value(&out.point) - p.value(&o.argmin);
                    let diff: Vec<f64> = m.start.iter().zip(&o.argmin).map(|(a, b)| a - b).collect();
                    let bound = lp_norm(&diff, pe).powi(2) / (2.0 * eta * t as f64) + eta * gq * gq / (2.0 * (pe - 1.0));
                    da_bound.case(gap <= bound + 1e-9, || {
                        format!("{} p={pe} T={t} eta={eta}: {gap} > {bound}", m.name)
                    });
                }
            }
        }
    }
    Ok(vec![sg_bound, da_bound])
}

/// Sampled points of the search box of a miniature.
pub fn sample_box(m: &Miniature, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let w: Vec<f64> = m
                .search_lo
                .iter()
                .zip(&m.search_hi)
                .map(|(l, h)| rng.random_range(*l..=*h))
                .collect();
            m.problem.project(&w)
        })
        .collect()
}

fn oracle_suite(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lemma2 = Check::new("distance to sublevel set bounded by (B/eps)(f(w) - f(w_eps))");
    let mut lemma1 = Check::new("distance times sampled residual bounded by objective gap");
    for m in miniatures() {
        let o = miniature_oracle(&m)?;
        let p = &m.problem;
        let f0 = p.value(&m.start) - o.fstar;
        for eps in [0.25 * f0, 0.05 * f0] {
            let b = estimate_b_eps(p, eps, &o, 64, seed)?;
            let rho = if m.smooth || p.dim() == 1 { sampled_residual(p, eps, &o, 64, seed) } else { None };
            for w in sample_box(&m, 100, &mut rng) {
                let u = sublevel_project(p, &w, eps, &o)?;
                let dist = dist2(&w, &u);
                let gap = p.value(&w) - p.value(&u);
                let rhs = 1.05 * b.value / eps * gap;
                lemma2.case(dist <= rhs + 1e-9, || format!("{} eps={eps} w={w:?}: {dist} > {rhs}", m.name));
                if let Some(r) = rho {
                    let tol = 1e-6 + o.certified_tol;
                    lemma1.case(dist * r <= gap + tol, || {
                        format!("{} eps={eps} w={w:?}: {} > {gap}", m.name, dist * r)
                    });
                }
            }
        }
    }
    Ok(vec![lemma2, lemma1])
}

/// min of ‖𝒢(u)‖₂ over level-set points u found along rays from the argmin.
pub fn sampled_residual(p: &ProblemInstance, eps: f64, o: &OracleReport, rays: usize, seed: u64) -> Option<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let level = o.fstar + eps;
    let d = p.dim();
    let mut best = f64::INFINITY;
    for k in 0..rays + 2 * d {
        let dir: Vec<f64> = if k < 2 * d {
            let mut e = vec![0.0; d];
            e[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
            e
        } else {
            let v = normal(&mut rng, d);
            let n = norm2(&v);
            v.into_iter().map(|x| x / n).collect()
        };
        let at = |r: f64| -> Vec<f64> { o.argmin.iter().zip(&dir).map(|(a, b)| a + r * b).collect() };
        let (mut a, mut b) = (0.0, 1e3);
        if p.value(&at(b)) <= level {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if p.value(&at(mid)) <= level {
                a = mid;
            } else {
                b = mid;
            }
        }
        let u = at(b);
        if !p.is_feasible(&u, 1e-12) {
            continue;
        }
        best = best.min(norm2(&p.subgradient(&u)));
    }
    best.is_finite().then_some(best)
}

fn zoo_suite(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut convex = Check::new("subgradient inequality");
    let mut bound = Check::new("subgradient norm within declared bound");
    let mut idem = Check::new("projection idempotent");
    for p in instances(seed) {
        let d = p.dim();
        let scale = if matches!(p.constraint(), crate::Constraint::Box { .. }) { 1.0 } else { 2.0 };
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let v: Vec<f64> = (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal) + 0.5 * (scale - 1.0)).collect();
            p.project(&v)
        };
        for _ in 0..1000 {
            let (w, u) = (draw(&mut rng), draw(&mut rng));
            let (fw, fu) = (p.value(&w), p.value(&u));
            let g = p.subgradient(&w);
            let diff: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - b).collect();
            let lin = fw + dot(&g, &diff);
            convex.case(fu >= lin - 1e-9 * (1.0 + fu.abs() + fw.abs()), || {
                format!("{}: f(u) = {fu} < {lin}", p.name())
            });
            for q in [2.0, 3.0] {
                let (n, b) = (lp_norm(&g, q), p.lipschitz_bound(q));
                bound.case(n <= b * (1.0 + 1e-12), || format!("{}: ‖g‖_{q} = {n} > {b}", p.name()));
            }
            let pw = p.project(&w);
            let ok = pw.iter().zip(&w).all(|(a, b)| (a - b).abs() <= 1e-12);
            idem.case(ok, || format!("{}: project(project(w)) moved", p.name()));
        }
    }
    vec![convex, bound, idem]
}
