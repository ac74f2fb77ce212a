//! Browser bindings: cluster a 2-D point cloud, route a clicked query, and
//! compare the baseline router with a learnt one over an ell sweep.

use learnt_ivf::clustering::{run_clustering, ClusteringKind, KMeansParams};
use learnt_ivf::evaluation::accuracy_sweep;
use learnt_ivf::ivf::{build_index, route, search, IvfIndex};
use learnt_ivf::learning::{build_training_pairs, train_linear_router, SplitDataset, TrainConfig};
use learnt_ivf::seed::derive_seed;
use learnt_ivf::synth::{generate, SyntheticConfig};
use learnt_ivf::{Router, VectorSet};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn json<T: Serialize>(value: &T) -> Result<String, JsValue> {
    serde_json::to_string(value).map_err(js_err)
}

#[derive(Serialize)]
struct ClusterView {
    objective: f64,
    assignments: Vec<usize>,
    representatives: Vec<[f32; 2]>,
}

#[derive(Serialize)]
struct RouteView {
    probed: Vec<usize>,
    scores: Vec<f64>,
    neighbours: Vec<usize>,
    exact: Vec<usize>,
}

#[derive(Serialize)]
struct SweepView {
    ells: Vec<usize>,
    baseline: Vec<f64>,
    learnt: Vec<f64>,
    best_epoch: usize,
}

/// A 2-D corpus plus the index and routers built on it.
#[wasm_bindgen]
pub struct Demo {
    seed: u64,
    docs: VectorSet,
    queries: VectorSet,
    index: Option<IvfIndex>,
    learnt: Option<Router>,
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(n_docs: usize, n_blobs: usize, seed: u64) -> Result<Demo, JsValue> {
        let mut cfg =
            SyntheticConfig::new(n_docs, n_docs, 2, n_blobs, derive_seed(seed, "demo-data"));
        cfg.center_scale = 3.0;
        let data = generate(&cfg).map_err(js_err)?;
        Ok(Demo {
            seed,
            docs: data.docs,
            queries: data.queries,
            index: None,
            learnt: None,
        })
    }

    /// Document coordinates as a flat `[x0, y0, x1, y1, ...]` array.
    pub fn points(&self) -> Vec<f32> {
        self.docs.as_slice().to_vec()
    }

    /// Clusters the documents; `kind` is standard, spherical or shallow.
    pub fn cluster(&mut self, kind: &str, clusters: usize) -> Result<String, JsValue> {
        let kind: ClusteringKind = kind.parse().map_err(js_err)?;
        let params = KMeansParams::new(clusters, derive_seed(self.seed, "demo-cluster"));
        let (clustering, objective) = run_clustering(kind, &self.docs, &params).map_err(js_err)?;
        let view = ClusterView {
            objective,
            assignments: clustering.assignments().to_vec(),
            representatives: clustering
                .representatives()
                .rows()
                .map(|r| [r[0], r[1]])
                .collect(),
        };
        self.index = Some(build_index(self.docs.clone(), clustering).map_err(js_err)?);
        self.learnt = None;
        json(&view)
    }

    /// Routes `(x, y)` to `ell` partitions and searches them for the top `k`
    /// documents; `learnt` selects the trained router when one exists.
    pub fn query(
        &self,
        x: f32,
        y: f32,
        ell: usize,
        k: usize,
        learnt: bool,
    ) -> Result<String, JsValue> {
        let idx = self.index()?;
        let baseline = idx.baseline_router();
        let router = match (&self.learnt, learnt) {
            (Some(r), true) => r,
            _ => &baseline,
        };
        let q = [x, y];
        let scores = router.score(&q).map_err(js_err)?;
        let probed = route(&q, router, ell).map_err(js_err)?;
        let neighbours = search(idx, &q, k, ell, router).map_err(js_err)?.ids;
        let exact = learnt_ivf::vectorspace::exact_top_k(
            &q,
            &self.docs,
            k,
            learnt_ivf::Metric::InnerProduct,
        )
        .map_err(js_err)?
        .ids;
        json(&RouteView {
            probed,
            scores,
            neighbours,
            exact,
        })
    }

    /// Trains a linear router on held-out queries and sweeps top-1 accuracy
    /// for ell = 1..=L on the test split.
    pub fn sweep(&mut self, epochs: usize, learning_rate: f64) -> Result<String, JsValue> {
        let idx = self.index()?;
        let pairs = build_training_pairs(&self.queries, idx).map_err(js_err)?;
        let split = SplitDataset::from_pairs(&pairs, derive_seed(self.seed, "demo-split"))
            .map_err(js_err)?;
        let cfg = TrainConfig {
            learning_rate,
            max_epochs: epochs,
            batch_size: 64,
            seed: derive_seed(self.seed, "demo-train"),
            ..TrainConfig::default()
        };
        let outcome = train_linear_router(&split, idx.num_clusters(), 2, &cfg).map_err(js_err)?;
        let learnt = Router::LearntLinear(outcome.model);

        let rows: Vec<&[f32]> = split.test.iter().map(|p| p.query.as_slice()).collect();
        let test = VectorSet::from_rows(&rows).map_err(js_err)?;
        let ells: Vec<usize> = (1..=idx.num_clusters()).collect();
        let baseline = idx.baseline_router();
        let table = accuracy_sweep(
            idx,
            &[("baseline", &baseline), ("learnt", &learnt)],
            &test,
            1,
            &ells,
        )
        .map_err(js_err)?;
        let view = SweepView {
            baseline: table.method("baseline").map(|r| r.accuracy).collect(),
            learnt: table.method("learnt").map(|r| r.accuracy).collect(),
            ells,
            best_epoch: outcome.best_epoch,
        };
        self.learnt = Some(learnt);
        json(&view)
    }
}

impl Demo {
    fn index(&self) -> Result<&IvfIndex, JsValue> {
        self.index
            .as_ref()
            .ok_or_else(|| JsValue::from_str("cluster the points first"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cluster_route_sweep() {
        let mut d = Demo::new(600, 5, 3).unwrap();
        assert_eq!(d.points().len(), 1200);
        let c: serde_json::Value =
            serde_json::from_str(&d.cluster("standard", 8).unwrap()).unwrap();
        assert_eq!(c["assignments"].as_array().unwrap().len(), 600);
        assert_eq!(c["representatives"].as_array().unwrap().len(), 8);

        let r: serde_json::Value =
            serde_json::from_str(&d.query(1.0, -0.5, 8, 3, false).unwrap()).unwrap();
        // probing every partition is exhaustive search
        assert_eq!(r["neighbours"], r["exact"]);
        assert_eq!(r["probed"].as_array().unwrap().len(), 8);

        let s: serde_json::Value = serde_json::from_str(&d.sweep(20, 0.05).unwrap()).unwrap();
        let base = s["baseline"].as_array().unwrap();
        assert_eq!(base.len(), 8);
        assert_eq!(base[7].as_f64(), Some(1.0));
        assert_eq!(s["learnt"][7].as_f64(), Some(1.0));
        assert!(d.query(0.0, 0.0, 2, 1, true).is_ok());
    }
}
