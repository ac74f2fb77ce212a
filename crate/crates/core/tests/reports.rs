use learnt_ivf::evaluation::{
    emit_report, emit_significance, mcnemar_from_counts, read_report, EvalRecord, ReportFormat,
    SignificanceRecord,
};
use learnt_ivf::synth::{generate, SyntheticConfig};

fn records() -> Vec<EvalRecord> {
    let mut out = Vec::new();
    for router in ["learnt", "baseline"] {
        for ell in [3, 1, 2] {
            for k in [10, 1] {
                out.push(EvalRecord {
                    dataset: "toy".into(),
                    clustering: "standard".into(),
                    router: router.into(),
                    k,
                    ell,
                    accuracy: 1.0 / (ell * k) as f64,
                });
            }
        }
    }
    out
}

#[test]
fn reports_are_order_independent_and_parse_back() {
    let dir = tempfile::tempdir().unwrap();
    let recs = records();
    let mut shuffled = recs.clone();
    shuffled.reverse();
    shuffled.swap(1, 7);
    for format in [ReportFormat::Csv, ReportFormat::Json] {
        let a = dir.path().join(format!("a.{}", format.extension()));
        let b = dir.path().join(format!("b.{}", format.extension()));
        emit_report(&recs, &a, format).unwrap();
        emit_report(&shuffled, &b, format).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

        let back: Vec<EvalRecord> = read_report(&a, format).unwrap();
        let mut sorted = recs.clone();
        sorted.sort_by(|x, y| {
            (&x.dataset, &x.clustering, &x.router, x.k, x.ell).cmp(&(
                &y.dataset,
                &y.clustering,
                &y.router,
                y.k,
                y.ell,
            ))
        });
        assert_eq!(back, sorted);
    }
    let csv = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert!(csv.starts_with("dataset,clustering,router,k,ell,accuracy\n"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 12);
}

#[test]
fn significance_rows_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = mcnemar_from_counts(30, 9);
    let rec = SignificanceRecord {
        dataset: "toy".into(),
        clustering: "spherical".into(),
        router_a: "baseline".into(),
        router_b: "learnt".into(),
        ell: 2,
        b: t.b,
        c: t.c,
        statistic: t.statistic,
        p_value: t.p_value,
        method: t.method,
    };
    for format in [ReportFormat::Csv, ReportFormat::Json] {
        let p = dir.path().join(format!("s.{}", format.extension()));
        emit_significance(std::slice::from_ref(&rec), &p, format).unwrap();
        let back: Vec<SignificanceRecord> = read_report(&p, format).unwrap();
        assert_eq!(back, vec![rec.clone()]);
    }
    // (|30 - 9| - 1)^2 / 39
    assert!((t.statistic - 400.0 / 39.0).abs() < 1e-12);
}

#[test]
fn synthetic_queries_track_their_sources() {
    let mut cfg = SyntheticConfig::new(4_000, 3_000, 8, 5, 77);
    cfg.query_noise = 0.2;
    let data = generate(&cfg).unwrap();

    // per-coordinate noise variance should be near 0.04
    let mut sq = 0.0;
    for (q, &src) in data.queries.rows().zip(&data.query_sources) {
        for (a, b) in q.iter().zip(data.docs.row(src)) {
            sq += f64::from(a - b).powi(2);
        }
    }
    let var = sq / (3_000.0 * 8.0);
    assert!((var - 0.04).abs() < 0.004, "noise variance {var}");

    // blob membership roughly uniform
    let mut counts = [0usize; 5];
    data.doc_blobs.iter().for_each(|&b| counts[b] += 1);
    assert!(
        counts.iter().all(|&c| (650..=950).contains(&c)),
        "{counts:?}"
    );
}
