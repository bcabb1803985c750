use proptest::prelude::*;
use rsg_core::data::{parse_libsvm, serialize_libsvm, synth_classification, synth_regression};
use rsg_core::linalg::{pnorm, CsrMatrix, SparseVec};
use rsg_core::problems::{
    gflasso_svm, lovasz_value_and_base, piecewise_linear_erm, robust_regression, CutFunction, Dataset, GFlassoGraph,
    Loss, Reg, RegressionRegion, SetFunction,
};
use rsg_core::solvers::{pnorm_prox, rsg, rsg_initial_step, sg_run, RestartConfig, TraceOptions};

fn vec_in(d: std::ops::RangeInclusive<usize>, r: f64) -> impl Strategy<Value = Vec<f64>> {
    d.prop_flat_map(move |n| prop::collection::vec(-r..r, n))
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(d - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, d - 1);
            out.push(q);
        }
    }
    out
}

proptest! {
    #[test]
    fn prox_step_length_is_dual_norm(
        (w, g) in (1usize..=10).prop_flat_map(|d| (prop::collection::vec(-5.0..5.0f64, d), prop::collection::vec(-5.0..5.0f64, d))),
        p in 1.05f64..=2.0,
    ) {
        let u = pnorm_prox(&w, &g, p).unwrap();
        let q = p / (p - 1.0);
        let step: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a - b).collect();
        let gq = pnorm(&g, q).unwrap();
        let sp = pnorm(&step, p).unwrap();
        prop_assert!((sp - gq).abs() <= 1e-10 * gq.max(1e-300) + 1e-300);
        // gᵀ(u − w) = −‖g‖_q²
        let inner: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
        prop_assert!((inner + gq * gq).abs() <= 1e-9 * (1.0 + gq * gq));
    }

    #[test]
    fn libsvm_round_trip(
        rows in prop::collection::vec(prop::collection::btree_map(0usize..12, -1e3..1e3f64, 0..6), 1..8),
        labels in prop::collection::vec(prop::sample::select(vec![-1.0, 1.0, 2.0, 0.5]), 8),
    ) {
        let d = 12;
        let sparse: Vec<SparseVec> = rows
            .iter()
            .map(|m| {
                let (i, v): (Vec<usize>, Vec<f64>) = m.iter().filter(|(_, v)| **v != 0.0).map(|(k, v)| (*k, *v)).unzip();
                SparseVec::new(i, v).unwrap()
            })
            .collect();
        let data = Dataset::new(CsrMatrix::from_rows(&sparse, d).unwrap(), labels[..rows.len()].to_vec()).unwrap();
        let mut buf = Vec::new();
        serialize_libsvm(&data, &mut buf).unwrap();
        let back = parse_libsvm(&buf[..], Some(d)).unwrap();
        prop_assert_eq!(back, data);
    }

    #[test]
    fn lovasz_is_max_over_greedy_bases(seed in 0u64..1000, d in 1usize..=6, w in prop::collection::vec(-2.0..2.0f64, 6)) {
        let f = CutFunction::random(d, 0.5, 1.0, seed).unwrap();
        let w = &w[..d];
        let (value, base) = lovasz_value_and_base(&f, w);
        let mut best = f64::NEG_INFINITY;
        for perm in permutations(d) {
            let (mut mask, mut prev, mut s) = (0u64, 0.0, 0.0);
            for &i in &perm {
                mask |= 1 << i;
                let v = f.eval(mask);
                s += w[i] * (v - prev);
                prev = v;
            }
            best = best.max(s);
        }
        prop_assert!((value - best).abs() <= 1e-9 * (1.0 + best.abs()));
        let sw: f64 = base.iter().zip(w).map(|(a, b)| a * b).sum();
        prop_assert!((sw - value).abs() <= 1e-9 * (1.0 + value.abs()));
    }

    #[test]
    fn hinge_objective_affine_between_kinks(seed in 0u64..200, a in vec_in(4..=4, 2.0), b in vec_in(4..=4, 2.0)) {
        // along a segment, f is affine on every piece between parameters where some margin hits 1
        let s = synth_classification(20, 4, 0.5, seed).unwrap();
        let p = piecewise_linear_erm(&s.data, Loss::Hinge, Reg::None).unwrap();
        let at = |t: f64| -> Vec<f64> { a.iter().zip(&b).map(|(x, y)| x + t * (y - x)).collect() };
        let mut kinks = vec![0.0, 1.0];
        for i in 0..s.data.n() {
            let r = s.data.x.row(i);
            let (ma, mb) = (s.data.y[i] * r.dot(&a), s.data.y[i] * r.dot(&b));
            if (mb - ma).abs() > 1e-12 {
                let t = (1.0 - ma) / (mb - ma);
                if t > 0.0 && t < 1.0 {
                    kinks.push(t);
                }
            }
        }
        kinks.sort_by(f64::total_cmp);
        for k in kinks.windows(2) {
            let (lo, hi) = (k[0], k[1]);
            if hi - lo < 1e-6 {
                continue;
            }
            let mid = 0.5 * (lo + hi);
            let lin = 0.5 * (p.value(&at(lo)) + p.value(&at(hi)));
            prop_assert!((p.value(&at(mid)) - lin).abs() <= 1e-9 * (1.0 + lin.abs()));
        }
    }

    #[test]
    fn gflasso_without_penalty_is_hinge(seed in 0u64..200, w in vec_in(6..=6, 3.0)) {
        let s = synth_classification(30, 6, 0.5, seed).unwrap();
        let graph = GFlassoGraph::new(6, (1..6).map(|i| (i - 1, i, 1.0)).collect()).unwrap();
        let g = gflasso_svm(&s.data, &graph, 0.0).unwrap();
        let h = piecewise_linear_erm(&s.data, Loss::Hinge, Reg::None).unwrap();
        prop_assert_eq!(g.value(&w).to_bits(), h.value(&w).to_bits());
        prop_assert_eq!(g.subgradient(&w), h.subgradient(&w));
    }

    #[test]
    fn robust_regression_gradient_matches_differences(seed in 0u64..200, p_loss in 1.1f64..1.9, w in vec_in(3..=3, 2.0)) {
        let s = synth_regression(25, 3, 0.5, seed).unwrap();
        let p = robust_regression(&s.data, p_loss, RegressionRegion { radius: 10.0, constrain: false }).unwrap();
        let g = p.subgradient(&w);
        let h = 1e-6;
        for j in 0..3 {
            let mut up = w.clone();
            let mut dn = w.clone();
            up[j] += h;
            dn[j] -= h;
            let fd = (p.value(&up) - p.value(&dn)) / (2.0 * h);
            prop_assert!((fd - g[j]).abs() <= 1e-5 * (1.0 + g[j].abs()), "coordinate {}: {} vs {}", j, fd, g[j]);
        }
    }

    #[test]
    fn rsg_is_a_chain_of_sg_stages(seed in 0u64..100, t in 1u64..40, stages in 1u32..6) {
        let s = synth_classification(15, 3, 0.5, seed).unwrap();
        let p = piecewise_linear_erm(&s.data, Loss::Hinge, Reg::L1(0.05)).unwrap();
        let w0 = vec![0.0; 3];
        let cfg = RestartConfig::new(2.0, t, 1.0, 0.5).unwrap().with_stages(stages);
        let out = rsg(&p, &w0, &cfg, TraceOptions::default()).unwrap();
        let mut w = w0;
        let mut eta = rsg_initial_step(&p, &cfg).unwrap();
        for k in 0..stages as usize {
            w = sg_run(&p, &w, eta, t, TraceOptions::default()).unwrap().point;
            prop_assert_eq!(out.trace.stages[k].eta, eta);
            eta /= 2.0;
        }
        prop_assert_eq!(w, out.point);
    }
}
