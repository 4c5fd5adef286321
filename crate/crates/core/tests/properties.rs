//! Cross-module invariants: metric axioms, rank/graph consistency, index
//! monotonicity, and transform invariances.

use manifold_ann::ann::{knn_graph, recall, AnnParams, Backend};
use manifold_ann::distributions::{bin_series, build_grid, stack_household, to_feature_vector, FeatureMode};
use manifold_ann::manifold::{hessian_form, hessian_lle, isomap, laplacian_eigenmaps, lle, LaplacianWeights};
use manifold_ann::metric::{euclidean, hellinger, hellinger_coords, manhattan, total_variation};
use manifold_ann::quality::quality_report;
use manifold_ann::synthetic::gaussian_cloud;
use manifold_ann::{brute_force_knn, rank_matrix, Coordinates, Metric, PointCloud};

use proptest::prelude::*;

fn vec_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-100.0f64..100.0, len)
}

fn pmf_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.001f64..1.0, len).prop_map(|v| {
        let sum: f64 = v.iter().sum();
        v.into_iter().map(|x| x / sum).collect()
    })
}

proptest! {
    #[test]
    fn metric_axioms(a in vec_strategy(8), b in vec_strategy(8), c in vec_strategy(8)) {
        for metric in [Metric::Euclidean, Metric::Manhattan] {
            let d_ab = metric.distance(&a, &b);
            let d_ba = metric.distance(&b, &a);
            prop_assert!(d_ab >= 0.0);
            prop_assert!((d_ab - d_ba).abs() < 1e-12);
            prop_assert!(metric.distance(&a, &a) == 0.0);
            let d_ac = metric.distance(&a, &c);
            let d_cb = metric.distance(&c, &b);
            prop_assert!(d_ab <= d_ac + d_cb + 1e-12);
        }
    }

    #[test]
    fn probability_distances_bounded(p in pmf_strategy(12), q in pmf_strategy(12)) {
        let h = hellinger(&p, &q).unwrap();
        let tv = total_variation(&p, &q).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&h));
        prop_assert!((0.0..=1.0 + 1e-12).contains(&tv));

        // Coordinate route equals the direct formula.
        let direct: f64 = p
            .iter()
            .zip(&q)
            .map(|(x, y)| (x.sqrt() - y.sqrt()).powi(2))
            .sum::<f64>()
            .sqrt()
            / std::f64::consts::SQRT_2;
        prop_assert!((h - direct).abs() < 1e-12);
        let coords_p = hellinger_coords(&p).unwrap();
        let coords_q = hellinger_coords(&q).unwrap();
        let via_coords = euclidean(&coords_p, &coords_q).unwrap() / std::f64::consts::SQRT_2;
        prop_assert!((h - via_coords).abs() < 1e-12);
    }

    #[test]
    fn rank_matrix_scale_invariant(seed in 0u64..500, scale in 0.01f64..50.0) {
        let cloud = gaussian_cloud(25, 3, seed);
        let scaled: Vec<f64> = cloud.as_slice().iter().map(|v| v * scale).collect();
        let scaled = PointCloud::new(scaled, 3).unwrap();
        let r1 = rank_matrix(&cloud, Metric::Euclidean).unwrap();
        let r2 = rank_matrix(&scaled, Metric::Euclidean).unwrap();
        for i in 0..25 {
            for j in 0..25 {
                prop_assert_eq!(r1.rank(i, j), r2.rank(i, j));
            }
        }
    }

    #[test]
    fn grid_is_data_order_invariant(seed in 0u64..200) {
        let cloud = gaussian_cloud(64, 1, seed);
        let vals = cloud.as_slice().to_vec();
        let mut reversed = vals.clone();
        reversed.reverse();
        let g1 = build_grid(&vals, 50).unwrap();
        let g2 = build_grid(&reversed, 50).unwrap();
        prop_assert_eq!(g1.edges(), g2.edges());
    }

    #[test]
    fn binning_conserves_mass(seed in 0u64..200) {
        let cloud = gaussian_cloud(400, 1, seed);
        let vals = cloud.as_slice().to_vec();
        let grid = build_grid(&vals, 97).unwrap();
        let dist = bin_series(&vals, &grid);
        let sum: f64 = dist.pmf().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }
}

#[test]
fn metric_axioms_thousand_triples() {
    // A fixed bank of 1000 random triples checked at 1e-12 slack.
    let cloud = gaussian_cloud(3000, 10, 987);
    for t in 0..1000 {
        let a = cloud.row(3 * t);
        let b = cloud.row(3 * t + 1);
        let c = cloud.row(3 * t + 2);
        for metric in [Metric::Euclidean, Metric::Manhattan] {
            let d_ab = metric.distance(a, b);
            assert!((d_ab - metric.distance(b, a)).abs() < 1e-12);
            assert!(d_ab <= metric.distance(a, c) + metric.distance(c, b) + 1e-12);
            assert!(d_ab >= 0.0);
        }
    }
}

#[test]
fn knn_permutation_invariant_up_to_relabeling() {
    let cloud = gaussian_cloud(60, 4, 31);
    let graph = brute_force_knn(&cloud, 5, Metric::Euclidean).unwrap();

    // Reverse the point order; the relabeled graph must match.
    let n = cloud.len();
    let perm: Vec<usize> = (0..n).rev().collect();
    let rows: Vec<Vec<f64>> = perm.iter().map(|&i| cloud.row(i).to_vec()).collect();
    let permuted = PointCloud::from_rows(&rows).unwrap();
    let graph_p = brute_force_knn(&permuted, 5, Metric::Euclidean).unwrap();

    for new_i in 0..n {
        let old_i = perm[new_i];
        let expect: Vec<(usize, f64)> = graph
            .neighbors(old_i)
            .iter()
            .map(|nb| (n - 1 - nb.index, nb.distance))
            .collect();
        let mut expect_sorted = expect;
        expect_sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let got: Vec<(usize, f64)> = graph_p
            .neighbors(new_i)
            .iter()
            .map(|nb| (nb.index, nb.distance))
            .collect();
        assert_eq!(got, expect_sorted);
    }
}

#[test]
fn knn_equals_rank_threshold_sets() {
    let cloud = gaussian_cloud(50, 5, 77);
    let k = 7;
    let graph = brute_force_knn(&cloud, k, Metric::Euclidean).unwrap();
    let ranks = rank_matrix(&cloud, Metric::Euclidean).unwrap();
    for i in 0..50 {
        let from_graph: Vec<usize> = graph.neighbors(i).iter().map(|nb| nb.index).collect();
        assert_eq!(from_graph, ranks.neighborhood(i, k));
    }
}

#[test]
fn recall_monotone_in_tuning_parameters() {
    // Statistical monotonicity: mean recall over 50 paired-seed datasets is
    // non-decreasing along each tuning grid.
    let datasets: Vec<PointCloud> = (0..50).map(|s| gaussian_cloud(120, 6, 1000 + s)).collect();
    let exacts: Vec<_> = datasets
        .iter()
        .map(|c| brute_force_knn(c, 5, Metric::Euclidean).unwrap())
        .collect();

    let mean_recall = |backend: Backend, tweak: &dyn Fn(&mut AnnParams)| -> f64 {
        let mut total = 0.0;
        for (cloud, exact) in datasets.iter().zip(&exacts) {
            let mut params = AnnParams { seed: 7, ..AnnParams::default() };
            tweak(&mut params);
            let out = knn_graph(cloud, 5, backend, &params).unwrap();
            total += recall(&out.graph, exact).unwrap();
        }
        total / datasets.len() as f64
    };

    let by_search_k: Vec<f64> = [6, 20, 60, 120]
        .iter()
        .map(|&sk| {
            mean_recall(Backend::Annoy, &move |p: &mut AnnParams| {
                p.n_trees = 4;
                p.search_k = sk;
            })
        })
        .collect();
    for pair in by_search_k.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-12, "search_k means {by_search_k:?}");
    }

    let by_trees: Vec<f64> = [1, 4, 16]
        .iter()
        .map(|&t| {
            mean_recall(Backend::Annoy, &move |p: &mut AnnParams| {
                p.n_trees = t;
                p.search_k = 30;
            })
        })
        .collect();
    for pair in by_trees.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-12, "n_trees means {by_trees:?}");
    }

    let by_ef: Vec<f64> = [6, 20, 60]
        .iter()
        .map(|&ef| {
            mean_recall(Backend::Hnsw, &move |p: &mut AnnParams| {
                p.n_links = 6;
                p.ef = ef;
            })
        })
        .collect();
    for pair in by_ef.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-12, "ef means {by_ef:?}");
    }
}

#[test]
fn stacked_metric_preserves_neighbor_order() {
    // Manhattan over stacked vectors orders households exactly like the sum
    // of per-period TV distances.
    let grid = build_grid(&[0.0, 10.0], 40).unwrap();
    let households: Vec<Vec<_>> = (0..12)
        .map(|h| {
            let series = manifold_ann::synthetic::household_demand(900 + h, 8, 30, 0.0);
            series
                .iter()
                .map(|vals| {
                    let clamped: Vec<f64> =
                        vals.iter().map(|v| v.clamp(0.0, 10.0)).collect();
                    bin_series(&clamped, &grid)
                })
                .collect()
        })
        .collect();
    let stacks: Vec<_> = households
        .iter()
        .map(|dists| stack_household(dists).unwrap())
        .collect();
    for a in 0..12 {
        let mut by_stack: Vec<(usize, f64)> = (0..12)
            .filter(|&b| b != a)
            .map(|b| {
                (
                    b,
                    manhattan(stacks[a].as_slice(), stacks[b].as_slice()).unwrap(),
                )
            })
            .collect();
        let mut by_tv: Vec<(usize, f64)> = (0..12)
            .filter(|&b| b != a)
            .map(|b| {
                let total: f64 = (0..8)
                    .map(|h| {
                        total_variation(households[a][h].pmf(), households[b][h].pmf()).unwrap()
                    })
                    .sum();
                (b, total)
            })
            .collect();
        // Exact proportionality: manhattan = 2 x TV sum (up to summation
        // rounding: one route adds over 8 blocks, the other over one long
        // vector).
        let tv_of: std::collections::HashMap<usize, f64> = by_tv.iter().copied().collect();
        for &(b, m) in &by_stack {
            assert!((m - 2.0 * tv_of[&b]).abs() < 1e-12 * (1.0 + m));
        }
        by_stack.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
        by_tv.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
        // Orders agree except where the underlying distances collide to
        // within rounding noise.
        for (pos, (s, t)) in by_stack.iter().zip(&by_tv).enumerate() {
            if s.0 != t.0 {
                let gap = (s.1 - 2.0 * tv_of[&s.0]).abs() + (2.0 * tv_of[&t.0] - s.1).abs();
                assert!(
                    gap < 1e-9,
                    "household {a} order diverges at {pos} with gap {gap}"
                );
            }
        }
    }
}

#[test]
fn hellinger_features_reproduce_tv_and_hellinger_order_through_indexes() {
    // Metric-agnosticism: an index built with the Manhattan metric over raw
    // mass vectors reproduces TV-neighbor order.
    let grid = build_grid(&[0.0, 6.0], 30).unwrap();
    let rows: Vec<Vec<f64>> = (0..40)
        .map(|i| {
            let series = manifold_ann::synthetic::household_demand(i as u64, 12, 25, 0.0);
            let vals: Vec<f64> = series
                .iter()
                .flat_map(|v| v.iter().map(|x| x.clamp(0.0, 6.0)))
                .collect();
            to_feature_vector(&bin_series(&vals, &grid), FeatureMode::Tv).unwrap()
        })
        .collect();
    let cloud = PointCloud::from_rows(&rows).unwrap();
    let params = AnnParams { metric: Metric::Manhattan, ..AnnParams::default() };
    let graph = knn_graph(&cloud, 5, Backend::KdTree, &params).unwrap().graph;
    for i in 0..40 {
        // Oracle: TV distances, halved L1.
        let mut order: Vec<(usize, f64)> = (0..40)
            .filter(|&j| j != i)
            .map(|j| (j, total_variation(&rows[i], &rows[j]).unwrap()))
            .collect();
        order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let expect: Vec<usize> = order[..5].iter().map(|e| e.0).collect();
        let got: Vec<usize> = graph.neighbors(i).iter().map(|nb| nb.index).collect();
        assert_eq!(got, expect, "row {i}");
    }
}

#[test]
fn rigid_motion_leaves_quality_measures_unchanged() {
    use rand::SeedableRng;
    // Manifold-structured data with a little off-manifold noise: the
    // spectral algorithms need gaps in the bottom spectrum for their output
    // to be a stable function of the input. An exactly isometric sample
    // leaves the Hessian null space exactly degenerate, making the
    // eigenbasis (and hence rank measures of the raw output) solver-chosen.
    let (flat, _) = manifold_ann::synthetic::rotated_rectangle(120, 2.0, 1.0, 3, 55);
    let cloud = {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let jittered: Vec<f64> = flat
            .as_slice()
            .iter()
            .map(|v| {
                let eps: f64 = StandardNormal.sample(&mut rng);
                v + 0.01 * eps
            })
            .collect();
        PointCloud::new(jittered, 3).unwrap()
    };
    let k = 10;
    let d = 2;

    // Rigid motion: rotate with a fixed orthonormal matrix and translate.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let q = {
        use rand_distr::{Distribution, StandardNormal};
        // Gram-Schmidt on a random 3x3.
        let mut cols: Vec<Vec<f64>> = Vec::new();
        while cols.len() < 3 {
            let mut v: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
            for c in &cols {
                let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= dot * ci;
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for vi in &mut v {
                    *vi /= norm;
                }
                cols.push(v);
            }
        }
        cols
    };
    let moved: Vec<Vec<f64>> = cloud
        .rows()
        .map(|r| {
            (0..3)
                .map(|a| q[0][a] * r[0] + q[1][a] * r[1] + q[2][a] * r[2] + [1.0, -2.0, 0.5][a])
                .collect()
        })
        .collect();
    let moved = PointCloud::from_rows(&moved).unwrap();

    let graph = brute_force_knn(&cloud, k, Metric::Euclidean).unwrap();
    let graph_m = brute_force_knn(&moved, k, Metric::Euclidean).unwrap();

    type Runner = fn(&PointCloud, &manifold_ann::NeighborGraph, usize) -> manifold_ann::Embedding;
    let runners: Vec<(&str, Runner)> = vec![
        ("isomap", |_c, g, d| isomap(g, d).unwrap().embedding),
        ("lle", |c, g, d| lle(c, g, d, 1e-3).unwrap().embedding),
        ("le", |_c, g, d| {
            laplacian_eigenmaps(g, d, LaplacianWeights::Binary)
                .unwrap()
                .embedding
        }),
        ("hlle", |c, g, d| hessian_lle(c, g, d).unwrap().embedding),
    ];
    for (name, run) in runners {
        let emb_a = run(&cloud, &graph, d);
        let emb_b = run(&moved, &graph_m, d);
        let qa = quality_report(&cloud, &emb_a, k, Metric::Euclidean).unwrap();
        let qb = quality_report(&moved, &emb_b, k, Metric::Euclidean).unwrap();
        assert!((qa.lcmc - qb.lcmc).abs() < 1e-9, "{name} lcmc");
        assert!(
            (qa.trustworthiness - qb.trustworthiness).abs() < 1e-9,
            "{name} trustworthiness"
        );
        assert!((qa.continuity - qb.continuity).abs() < 1e-9, "{name} continuity");
        assert!((qa.mrre_input - qb.mrre_input).abs() < 1e-9, "{name} mrre");
        assert!((qa.q_nx - qb.q_nx).abs() < 1e-9, "{name} q_nx");
        // The Procrustes measure normalizes by the raw (uncentered) input
        // norms, so translating the input moves it; its own invariance (to
        // rigid motion of the embedding) is covered where it is defined.
    }

    // The accumulated Hessian form itself is rigid-motion invariant to
    // machine precision.
    let form_a = hessian_form(&cloud, &graph, d).unwrap();
    let form_b = hessian_form(&moved, &graph_m, d).unwrap();
    let diff: f64 = form_a
        .form()
        .iter()
        .zip(form_b.form().iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    assert!(diff < 1e-9 * form_a.form().norm(), "hessian form moved by {diff}");
}
