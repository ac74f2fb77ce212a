use learnt_ivf::clustering::{run_clustering, ClusteringKind, KMeansParams};
use learnt_ivf::evaluation::{mcnemar_from_counts, topk_accuracy};
use learnt_ivf::formats;
use learnt_ivf::ivf::{build_index, route, top_clusters};
use learnt_ivf::learning::{log_softmax, softmax, split_sizes, topk_weights};
use learnt_ivf::vectorspace::{distance, exact_top_k, l2_normalize};
use learnt_ivf::{Metric, Router, VectorSet};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f32> {
    -100.0f32..100.0
}

fn vector_pair(max_dim: usize) -> impl Strategy<Value = (Vec<f32>, Vec<f32>)> {
    (1..=max_dim).prop_flat_map(|d| {
        (
            prop::collection::vec(finite(), d),
            prop::collection::vec(finite(), d),
        )
    })
}

fn vector_set(max_n: usize, dim: usize) -> impl Strategy<Value = VectorSet> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(-5.0f32..5.0, n * dim)
            .prop_map(move |v| VectorSet::new(dim, v).unwrap())
    })
}

fn nonzero(v: &[f32]) -> bool {
    v.iter().any(|&x| x.abs() > 1e-3)
}

proptest! {
    #[test]
    fn softmax_is_a_shift_invariant_distribution(
        s in prop::collection::vec(-50.0f64..50.0, 1..40),
        c in -1e3f64..1e3,
    ) {
        let p = softmax(&s);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let shifted: Vec<f64> = s.iter().map(|x| x + c).collect();
        for (a, b) in p.iter().zip(softmax(&shifted)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in p.iter().zip(log_softmax(&s)) {
            prop_assert!((a.ln() - b).abs() < 1e-9 || *a == 0.0);
        }
    }

    #[test]
    fn metrics_are_symmetric((a, b) in vector_pair(16)) {
        for m in [Metric::L1, Metric::L2, Metric::InnerProduct] {
            prop_assert_eq!(distance(&a, &b, m).unwrap(), distance(&b, &a, m).unwrap());
        }
        if nonzero(&a) && nonzero(&b) {
            let (x, y) = (distance(&a, &b, Metric::Cosine).unwrap(), distance(&b, &a, Metric::Cosine).unwrap());
            prop_assert!((x - y).abs() < 1e-12);
            prop_assert!((-1e-9..=2.0 + 1e-9).contains(&x));
        }
        prop_assert!(distance(&a, &a, Metric::L2).unwrap() == 0.0);
    }

    #[test]
    fn top_k_is_prefix_consistent(docs in vector_set(60, 4), q in prop::collection::vec(-5.0f32..5.0, 4), k in 1usize..30) {
        for m in [Metric::L2, Metric::InnerProduct] {
            let small = exact_top_k(&q, &docs, k, m).unwrap();
            let big = exact_top_k(&q, &docs, k + 7, m).unwrap();
            prop_assert_eq!(small.ids.len(), k.min(docs.len()));
            prop_assert_eq!(&big.ids[..small.ids.len()], &small.ids[..]);
            prop_assert!(small.scores.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn cosine_and_inner_product_rank_unit_vectors_alike(docs in vector_set(40, 5), q in prop::collection::vec(-5.0f32..5.0, 5)) {
        prop_assume!(nonzero(&q) && docs.rows().all(nonzero));
        let unit: Vec<Vec<f32>> = docs.rows().map(|r| l2_normalize(r).unwrap().into_inner()).collect();
        let unit = VectorSet::from_rows(&unit).unwrap();
        let q = l2_normalize(&q).unwrap();
        let a = exact_top_k(&q, &unit, unit.len(), Metric::Cosine).unwrap();
        let b = exact_top_k(&q, &unit, unit.len(), Metric::InnerProduct).unwrap();
        // rankings agree up to rounding of near-equal scores
        for (x, y) in a.ids.iter().zip(&b.ids) {
            if x != y {
                let dx = distance(&q, unit.row(*x), Metric::InnerProduct).unwrap();
                let dy = distance(&q, unit.row(*y), Metric::InnerProduct).unwrap();
                prop_assert!((dx - dy).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn routing_ignores_query_scale_and_score_shift(
        reps in vector_set(20, 3),
        q in prop::collection::vec(-5.0f32..5.0, 3),
        scale in prop::sample::select(vec![0.5f32, 2.0, 4.0, 8.0]),
        shift in -100.0f64..100.0,
        ell in 1usize..25,
    ) {
        let router = Router::Baseline(reps);
        let scaled: Vec<f32> = q.iter().map(|x| x * scale).collect();
        prop_assert_eq!(route(&q, &router, ell).unwrap(), route(&scaled, &router, ell).unwrap());
        let scores = router.score(&q).unwrap();
        let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
        let routed = top_clusters(&scores, ell);
        prop_assert_eq!(&routed, &top_clusters(&shifted, ell));
        prop_assert_eq!(routed.len(), ell.min(scores.len()));
    }

    #[test]
    fn accuracy_grows_with_ell(docs in vector_set(80, 3), queries in vector_set(10, 3), k in 1usize..6, seed in 0u64..1000) {
        let l = docs.len().min(6);
        let (c, _) = run_clustering(ClusteringKind::Standard, &docs, &KMeansParams::new(l, seed)).unwrap();
        let idx = build_index(docs, c).unwrap();
        let router = idx.baseline_router();
        let accs: Vec<f64> = (1..=l).map(|ell| topk_accuracy(&idx, &router, &queries, k, ell).unwrap().mean).collect();
        prop_assert!(accs.windows(2).all(|w| w[1] >= w[0]), "{:?}", accs);
        prop_assert_eq!(*accs.last().unwrap(), 1.0);
    }

    #[test]
    fn clusterings_cover_every_point(docs in vector_set(60, 2), l in 1usize..8, seed in 0u64..1000) {
        let l = l.min(docs.len());
        for kind in ClusteringKind::ALL {
            let (c, obj) = run_clustering(kind, &docs, &KMeansParams::new(l, seed)).unwrap();
            prop_assert!(obj.is_finite());
            prop_assert_eq!(c.num_points(), docs.len());
            prop_assert_eq!(c.members().iter().map(Vec::len).sum::<usize>(), docs.len());
            if kind != ClusteringKind::Shallow {
                let distinct = {
                    let mut rows: Vec<Vec<u32>> = docs.rows().map(|r| r.iter().map(|x| x.to_bits()).collect()).collect();
                    rows.sort();
                    rows.dedup();
                    rows.len()
                };
                if distinct >= l {
                    prop_assert!(c.members().iter().all(|m| !m.is_empty()));
                }
            }
        }
    }

    #[test]
    fn vector_and_label_files_round_trip(
        set in (1usize..10).prop_flat_map(|d| vector_set(30, d)),
        rows in (1usize..20).prop_flat_map(|l| prop::collection::vec(prop::collection::vec(any::<bool>(), l), 0..15)),
    ) {
        prop_assert_eq!(formats::decode_vectors(&formats::encode_vectors(&set).unwrap()).unwrap(), set);
        if let Some(l) = rows.first().map(Vec::len) {
            prop_assert_eq!(formats::decode_labels(&formats::encode_labels(&rows, l).unwrap()).unwrap(), rows);
        }
    }

    #[test]
    fn truncated_vector_files_name_an_offset(set in vector_set(10, 3), cut in 0usize..200) {
        let bytes = formats::encode_vectors(&set).unwrap();
        prop_assume!(cut < bytes.len());
        let msg = formats::decode_vectors(&bytes[..cut]).unwrap_err().to_string();
        prop_assert!(msg.contains("byte offset"), "{}", msg);
    }

    #[test]
    fn split_sizes_partition(n in 0usize..10_000) {
        let (a, b, c) = split_sizes(n);
        prop_assert_eq!(a + b + c, n);
        prop_assert_eq!(a, n * 6 / 10);
        prop_assert_eq!(b, n * 2 / 10);
    }

    #[test]
    fn topk_weights_form_a_distribution(
        labels in prop::collection::vec(any::<bool>(), 1..30),
        gamma in prop::collection::vec(0.0f64..1.0, 30),
    ) {
        prop_assume!(labels.iter().any(|&b| b));
        let w = topk_weights(&labels, &gamma[..labels.len()]).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        let min_rel = w.iter().zip(&labels).filter(|p| *p.1).map(|p| *p.0).fold(f64::INFINITY, f64::min);
        let max_irr = w.iter().zip(&labels).filter(|p| !*p.1).map(|p| *p.0).fold(0.0, f64::max);
        prop_assert!(min_rel >= max_irr);
    }

    #[test]
    fn mcnemar_is_symmetric_and_bounded(b in 0usize..200, c in 0usize..200) {
        let x = mcnemar_from_counts(b, c);
        let y = mcnemar_from_counts(c, b);
        prop_assert!((x.p_value - y.p_value).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&x.p_value));
    }
}
