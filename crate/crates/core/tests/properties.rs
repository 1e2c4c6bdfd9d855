mod common;

use std::collections::BTreeSet;

use common::*;
use f2lp_core::baselines::{knn_classify, KnnMetric};
use f2lp_core::classify::{assign_labels, cosine_scores};
use f2lp_core::graph::{compute_lcc, normalize_adjacency, Graph};
use f2lp_core::metrics::{accuracy, confusion_matrix, macro_f1};
use f2lp_core::propagation::{adaptive_propagate, PropagationParams};
use f2lp_core::prototypes::{
    build_prototypes, geometric_median, sum_of_distances, weiszfeld_step, weiszfeld_weights,
    PrototypeMethod, WeiszfeldConfig,
};
use f2lp_core::{load_dataset, save_dataset, FeatureMatrix, Labels, Prediction};
use proptest::prelude::*;

fn edge_list(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1..=max_n).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..(3 * n))))
}

fn simple(edges: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
    edges
        .iter()
        .filter(|(u, v)| u != v)
        .map(|&(u, v)| (u.min(v), u.max(v)))
        .collect()
}

fn points_2d(max_m: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec(prop::array::uniform2(-10.0f64..10.0), 3..=max_m)
}

fn to_matrix(p: &[[f64; 2]]) -> FeatureMatrix {
    FeatureMatrix::from_rows(p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_symmetric_and_deduplicated((n, edges) in edge_list(60)) {
        let g = Graph::from_edges(n, edges.iter().copied()).unwrap();
        let offs = g.csr_offsets();
        prop_assert_eq!(offs[n], g.csr_neighbors().len());
        for i in 0..n {
            prop_assert!(offs[i] <= offs[i + 1]);
            let row = g.neighbors(i);
            prop_assert!(row.windows(2).all(|w| w[0] < w[1]));
            for &j in row {
                prop_assert!(g.neighbors(j).binary_search(&i).is_ok());
            }
            prop_assert_eq!(g.has_self_loop(i), edges.contains(&(i, i)));
        }
        prop_assert_eq!(g.num_edges(), simple(&edges).len());
    }

    #[test]
    fn lcc_in_unit_interval_and_brute_force((n, edges) in edge_list(80)) {
        let g = Graph::from_edges(n, edges.iter().copied()).unwrap();
        let lcc = compute_lcc(&g);
        let want = brute_force_lcc(n, &simple(&edges));
        for i in 0..n {
            prop_assert!((0.0..=1.0).contains(&lcc[i]));
            prop_assert!((lcc[i] - want[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn normalized_adjacency_structure((n, edges) in edge_list(60)) {
        let g = Graph::from_edges(n, edges.iter().copied()).unwrap();
        let a = normalize_adjacency(&g);
        let dense = dense_normalized_adjacency(n, &simple(&edges));
        // Perron vector of the symmetric normalization is sqrt(deg + 1)
        let s: Vec<f64> = g.degrees().iter().map(|&d| ((d + 1) as f64).sqrt()).collect();
        for i in 0..n {
            let (cols, w) = a.row(i);
            prop_assert!(w.iter().all(|&x| x > 0.0));
            let mut image = 0.0;
            for (&j, &wij) in cols.iter().zip(w) {
                prop_assert!((wij - a.weight(j, i)).abs() <= 1e-12);
                image += wij * s[j];
            }
            prop_assert!((image - s[i]).abs() <= 1e-9 * s[i]);
            for j in 0..n {
                prop_assert!((a.weight(i, j) - dense[i][j]).abs() <= 1e-12);
            }
        }
        // spectral radius <= 1: power iteration on a positive start vector
        let mut v = vec![1.0; n];
        let mut ratio = 0.0;
        for _ in 0..200 {
            let mut next = vec![0.0; n];
            for i in 0..n {
                let (cols, w) = a.row(i);
                next[i] = cols.iter().zip(w).map(|(&j, &x)| x * v[j]).sum();
            }
            let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
            let prev = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            ratio = norm / prev;
            v = next.iter().map(|x| x / norm).collect();
        }
        prop_assert!(ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn dataset_round_trip(seed in 0u64..1000, n in 4usize..40) {
        let ds = f2lp_core::PlantedPartition {
            nodes: n,
            classes: 3,
            p_in: 0.3,
            p_out: 0.05,
            feature_dim: Some(5),
            feature_noise: 0.7,
            seed,
            ..Default::default()
        }
        .generate()
        .unwrap();
        let tmp = tempfile::tempdir().unwrap();
        save_dataset(&ds, tmp.path()).unwrap();
        prop_assert_eq!(load_dataset(tmp.path()).unwrap(), ds);
    }

    #[test]
    fn weiszfeld_objective_non_increasing(pts in points_2d(50)) {
        let gm = geometric_median(&to_matrix(&pts), &WeiszfeldConfig::default()).unwrap();
        for w in gm.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", gm.objective_trace);
        }
    }

    #[test]
    fn weiszfeld_weights_sum_to_one(pts in points_2d(50), c in prop::array::uniform2(-10.0f64..10.0)) {
        let m = to_matrix(&pts);
        let mut center = c.to_vec();
        for _ in 0..5 {
            let w = weiszfeld_weights(&m, &center, 1e-12);
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            center = weiszfeld_step(&m, &center, 1e-12);
        }
    }

    #[test]
    fn weiszfeld_translation_equivariant(pts in points_2d(30), t in prop::array::uniform2(-50.0f64..50.0)) {
        let cfg = WeiszfeldConfig::default();
        let base = geometric_median(&to_matrix(&pts), &cfg).unwrap();
        let moved: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] + t[0], p[1] + t[1]]).collect();
        let shifted = geometric_median(&to_matrix(&moved), &cfg).unwrap();
        // compare objectives: the minimizer can be ill-conditioned, the minimum is not
        let at = [base.point[0] + t[0], base.point[1] + t[1]];
        prop_assert!((sum_dist_2d(&moved, at) - sum_dist_2d(&moved, [shifted.point[0], shifted.point[1]])).abs() < 1e-4);
    }

    #[test]
    fn weiszfeld_permutation_invariant(pts in points_2d(30), seed in 0u64..1000) {
        use rand::seq::SliceRandom;
        let cfg = WeiszfeldConfig::default();
        let mut shuffled = pts.clone();
        shuffled.shuffle(&mut rng(seed));
        let a = geometric_median(&to_matrix(&pts), &cfg).unwrap();
        let b = geometric_median(&to_matrix(&shuffled), &cfg).unwrap();
        for k in 0..2 {
            prop_assert!((a.point[k] - b.point[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn weiszfeld_rotation_equivariant(pts in points_2d(30), theta in 0.0f64..std::f64::consts::TAU) {
        let cfg = WeiszfeldConfig::default();
        let (s, c) = theta.sin_cos();
        let rot = |p: [f64; 2]| [c * p[0] - s * p[1], s * p[0] + c * p[1]];
        let base = geometric_median(&to_matrix(&pts), &cfg).unwrap();
        let turned: Vec<[f64; 2]> = pts.iter().map(|&p| rot(p)).collect();
        let r = geometric_median(&to_matrix(&turned), &cfg).unwrap();
        let expected = rot([base.point[0], base.point[1]]);
        prop_assert!((sum_dist_2d(&turned, expected) - sum_dist_2d(&turned, [r.point[0], r.point[1]])).abs() < 1e-4);
    }

    #[test]
    fn propagation_matches_dense_replay(seed in 0u64..10_000) {
        use rand::Rng;
        let mut r = rng(seed);
        let n = r.random_range(1..=40);
        let d = r.random_range(1..=8);
        let p = r.random_range(0.0..0.3);
        let edges = random_edges(&mut r, n, p);
        let x: Dense = (0..n).map(|_| (0..d).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
        let alpha: Vec<f64> = (0..n).map(|_| r.random_range(0.05..=0.2)).collect();
        let k: Vec<usize> = (0..n).map(|_| r.random_range(2..=15)).collect();
        let g = Graph::from_edges(n, edges.iter().copied()).unwrap();
        let got = adaptive_propagate(
            &normalize_adjacency(&g),
            &FeatureMatrix::from_rows(&x).unwrap(),
            &PropagationParams::new(alpha.clone(), k.clone()).unwrap(),
        ).unwrap();
        let want = dense_adaptive_propagate(&dense_normalized_adjacency(n, &edges), &x, &alpha, &k);
        for i in 0..n {
            for c in 0..d {
                let scale = want[i][c].abs().max(1e-300);
                prop_assert!((got.row(i)[c] - want[i][c]).abs() <= 1e-10 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn propagation_is_local(seed in 0u64..10_000) {
        use rand::Rng;
        let mut r = rng(seed);
        let n = r.random_range(5..=60);
        let p = r.random_range(0.02..0.1);
        let edges = random_edges(&mut r, n, p);
        let g = Graph::from_edges(n, edges.iter().copied()).unwrap();
        let a = normalize_adjacency(&g);
        let k: Vec<usize> = (0..n).map(|_| r.random_range(1..=4)).collect();
        let params = PropagationParams::new(vec![0.1; n], k).unwrap();
        let x = FeatureMatrix::new(n, 2, (0..2 * n).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
        let base = adaptive_propagate(&a, &x, &params).unwrap();

        // perturb node `far`, then check every node at hop distance > max k
        let far = r.random_range(0..n);
        let mut hops = vec![usize::MAX; n];
        hops[far] = 0;
        let mut frontier = vec![far];
        while let Some(u) = frontier.pop() {
            for v in g.proper_neighbors(u) {
                if hops[v] > hops[u] + 1 {
                    hops[v] = hops[u] + 1;
                    frontier.push(v);
                }
            }
        }
        let mut bumped = x.clone();
        bumped.row_mut(far)[0] += 100.0;
        let out = adaptive_propagate(&a, &bumped, &params).unwrap();
        for i in 0..n {
            if hops[i] > params.max_k() {
                prop_assert_eq!(out.row(i), base.row(i));
            }
        }
    }

    #[test]
    fn propagation_is_homogeneous(seed in 0u64..10_000, s in -100.0f64..100.0) {
        use rand::Rng;
        let mut r = rng(seed);
        let n = r.random_range(1..=40);
        let edges = random_edges(&mut r, n, 0.15);
        let a = normalize_adjacency(&Graph::from_edges(n, edges.iter().copied()).unwrap());
        let x = FeatureMatrix::new(n, 3, (0..3 * n).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
        let params = PropagationParams::new(
            (0..n).map(|_| r.random_range(0.05..0.2)).collect(),
            (0..n).map(|_| r.random_range(2..=15)).collect(),
        ).unwrap();
        let lhs = adaptive_propagate(&a, &x.scaled(s), &params).unwrap();
        let rhs = adaptive_propagate(&a, &x, &params).unwrap().scaled(s);
        for (u, v) in lhs.values().iter().zip(rhs.values()) {
            prop_assert!((u - v).abs() <= 1e-10 * v.abs().max(1.0));
        }
    }

    #[test]
    fn cosine_decisions_scale_invariant(seed in 0u64..10_000, s in 1e-3f64..1e3) {
        use rand::Rng;
        let mut r = rng(seed);
        let n = r.random_range(1..=30);
        let x = FeatureMatrix::new(n, 4, (0..4 * n).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
        let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let labels = Labels::from_classes(2, &y).unwrap();
        let mask: Vec<bool> = (0..n).map(|i| i < 2 || r.random_bool(0.5)).collect();
        if n < 2 {
            return Ok(());
        }
        let cfg = WeiszfeldConfig::default();
        let p = build_prototypes(&x, &labels, &mask, PrototypeMethod::GeometricMedian, &cfg).unwrap();
        let base = assign_labels(&cosine_scores(&x, &p).unwrap());
        let scaled = assign_labels(&cosine_scores(&x.scaled(s), &p).unwrap());
        prop_assert_eq!(base.labels, scaled.labels);

        let k1 = knn_classify(&x, &labels, &mask, 3, KnnMetric::Cosine).unwrap();
        let k2 = knn_classify(&x.scaled(s), &labels, &mask, 3, KnnMetric::Cosine).unwrap();
        prop_assert_eq!(k1.labels, k2.labels);
    }

    #[test]
    fn metric_identities(
        classes in 1usize..5,
        rows in prop::collection::vec((0usize..5, 0usize..5, any::<bool>()), 1..80),
    ) {
        let truth: Vec<usize> = rows.iter().map(|r| r.0 % classes).collect();
        let pred = Prediction { labels: rows.iter().map(|r| r.1 % classes).collect(), tie_count: 0 };
        let mut mask: Vec<bool> = rows.iter().map(|r| r.2).collect();
        mask[0] = true;
        let labels = Labels::from_classes(classes, &truth).unwrap();
        let cm = confusion_matrix(&pred, &labels, &mask, classes).unwrap();
        let total: usize = cm.iter().flatten().sum();
        let trace: usize = (0..classes).map(|c| cm[c][c]).sum();
        prop_assert_eq!(total, mask.iter().filter(|&&m| m).count());
        for (c, row) in cm.iter().enumerate() {
            let support = (0..truth.len()).filter(|&i| mask[i] && truth[i] == c).count();
            prop_assert_eq!(row.iter().sum::<usize>(), support);
        }
        let acc = accuracy(&pred, &labels, &mask).unwrap();
        prop_assert!((acc - trace as f64 / total as f64).abs() < 1e-15);
        let f1 = macro_f1(&pred, &labels, &mask, classes).unwrap();
        prop_assert!((0.0..=1.0).contains(&f1));
        if classes == 1 {
            prop_assert_eq!(f1, acc);
        }
    }
}

#[test]
fn ten_thousand_step_stress_stays_bounded() {
    use rand::Rng;
    let mut r = rng(99);
    let n = 80;
    // star plus random edges: hub row sums exceed 1
    let mut edges = random_edges(&mut r, n, 0.05);
    for v in 1..n {
        edges.insert((0, v));
    }
    let a = normalize_adjacency(&Graph::from_edges(n, edges.iter().copied()).unwrap());
    let x = FeatureMatrix::new(n, 3, (0..3 * n).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
    let (a_lo, a_hi) = (0.05, 0.2);
    let params = PropagationParams::new(
        (0..n).map(|_| r.random_range(a_lo..=a_hi)).collect(),
        (0..n).map(|_| r.random_range(1..=10_000)).collect(),
    )
    .unwrap();
    let out = adaptive_propagate(&a, &x, &params).unwrap();
    let inf = |m: &FeatureMatrix| m.values().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    // per column: |h| <= (1 - a_lo) |h| + a_hi |x| in the 2-norm, so
    // |h|_2 <= (a_hi / a_lo) |x|_2 <= (a_hi / a_lo) sqrt(n) |X|_inf
    let bound = (a_hi / a_lo) * (n as f64).sqrt() * inf(&x);
    assert!(out.values().iter().all(|v| v.is_finite()));
    assert!(inf(&out) <= bound, "{} > {bound}", inf(&out));
}

#[test]
fn prototype_objective_matches_oracle_on_many_sets() {
    use rand::Rng;
    let mut r = rng(5);
    for _ in 0..10 {
        let m = r.random_range(3..=50);
        let pts: Vec<[f64; 2]> = (0..m).map(|_| [r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)]).collect();
        let gm = geometric_median(&to_matrix(&pts), &WeiszfeldConfig::default()).unwrap();
        let (_, best) = grid_geometric_median_2d(&pts);
        let got = sum_of_distances(&to_matrix(&pts), &gm.point);
        assert!((got - best).abs() < 1e-3);
    }
}
