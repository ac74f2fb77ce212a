//! Inverted-file index: route a query to the best-scoring partitions and scan
//! only their members.

use std::collections::HashSet;

use crate::clustering::ClusteringResult;
use crate::error::{Error, Result};
use crate::learning::{LinearRouterModel, MlpRouterModel};
use crate::vectorspace::{dot_unchecked, TopKResult, TopKSelector, VectorSet};

/// Partitions, their routing representatives and the indexed documents.
#[derive(Debug, Clone, PartialEq)]
pub struct IvfIndex {
    clustering: ClusteringResult,
    docs: VectorSet,
}

impl IvfIndex {
    pub fn num_clusters(&self) -> usize {
        self.clustering.num_clusters()
    }

    pub fn dim(&self) -> usize {
        self.docs.dim()
    }

    pub fn docs(&self) -> &VectorSet {
        &self.docs
    }

    pub fn clustering(&self) -> &ClusteringResult {
        &self.clustering
    }

    /// `L x dim` matrix whose row `i` represents cluster `i`.
    pub fn rep_matrix(&self) -> &VectorSet {
        self.clustering.representatives()
    }

    pub fn members(&self, cluster: usize) -> &[usize] {
        &self.clustering.members()[cluster]
    }

    pub fn cluster_of(&self, doc: usize) -> usize {
        self.clustering.cluster_of(doc)
    }

    /// Router scoring queries by inner product with the representatives.
    pub fn baseline_router(&self) -> Router {
        Router::Baseline(self.rep_matrix().clone())
    }
}

/// Assembles an index; the clustering must partition exactly `docs`' ids.
pub fn build_index(docs: VectorSet, clustering: ClusteringResult) -> Result<IvfIndex> {
    if clustering.num_points() != docs.len() {
        return Err(Error::InconsistentClustering(format!(
            "clustering covers {} points but the collection has {}",
            clustering.num_points(),
            docs.len()
        )));
    }
    if clustering.representatives().dim() != docs.dim() {
        return Err(Error::InconsistentClustering(format!(
            "representatives have dim {} but documents have dim {}",
            clustering.representatives().dim(),
            docs.dim()
        )));
    }
    Ok(IvfIndex { clustering, docs })
}

/// Assigns a score to every partition; larger means more promising.
#[derive(Debug, Clone, PartialEq)]
pub enum Router {
    /// Inner products with the representative rows.
    Baseline(VectorSet),
    LearntLinear(LinearRouterModel),
    LearntMlp(MlpRouterModel),
}

impl Router {
    pub fn num_clusters(&self) -> usize {
        match self {
            Router::Baseline(m) => m.len(),
            Router::LearntLinear(m) => m.num_clusters(),
            Router::LearntMlp(m) => m.num_clusters(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Router::Baseline(m) => m.dim(),
            Router::LearntLinear(m) => m.dim(),
            Router::LearntMlp(m) => m.dim(),
        }
    }

    /// Raw scores, one per cluster. No softmax is applied.
    pub fn score(&self, q: &[f32]) -> Result<Vec<f64>> {
        if q.len() != self.dim() {
            return Err(Error::dim(self.dim(), q.len()));
        }
        Ok(match self {
            Router::Baseline(m) => m.rows().map(|row| dot_unchecked(row, q)).collect(),
            Router::LearntLinear(m) => m.scores(q),
            Router::LearntMlp(m) => m.scores(q),
        })
    }
}

/// Cluster ids ordered by descending score, ties by ascending id; at most
/// `ell` of them.
pub fn top_clusters(scores: &[f64], ell: usize) -> Vec<usize> {
    let mut sel = TopKSelector::new(ell.min(scores.len()));
    for (c, &s) in scores.iter().enumerate() {
        sel.push(-s, c);
    }
    sel.into_result().ids
}

/// The `min(ell, L)` best partitions for `q`, best first.
pub fn route(q: &[f32], router: &Router, ell: usize) -> Result<Vec<usize>> {
    if ell == 0 {
        return Err(Error::InvalidParam("ell must be >= 1".into()));
    }
    Ok(top_clusters(&router.score(q)?, ell))
}

/// Routes `q` to `ell` partitions and returns the best `k` of their members
/// under inner-product distance. Returns fewer than `k` ids when the routed
/// partitions hold fewer documents.
pub fn search(
    idx: &IvfIndex,
    q: &[f32],
    k: usize,
    ell: usize,
    router: &Router,
) -> Result<TopKResult> {
    if k == 0 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    idx.docs.check_dim(q)?;
    if router.num_clusters() != idx.num_clusters() {
        return Err(Error::InvalidParam(format!(
            "router scores {} clusters but the index has {}",
            router.num_clusters(),
            idx.num_clusters()
        )));
    }
    let mut sel = TopKSelector::new(k);
    for c in route(q, router, ell)? {
        for &id in idx.members(c) {
            sel.push(-dot_unchecked(q, idx.docs.row(id)), id);
        }
    }
    Ok(sel.into_result())
}

/// `|exact ∩ approx| / k`, ignoring order.
pub fn ann_accuracy(exact: &TopKResult, approx: &TopKResult, k: usize) -> f64 {
    let truth: HashSet<usize> = exact.ids.iter().copied().collect();
    let hits = approx.ids.iter().filter(|id| truth.contains(id)).count();
    hits as f64 / k as f64
}
