//! Supervision for routers: each query is labelled with the partitions
//! holding its exact top-k documents.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::ivf::IvfIndex;
use crate::seed;
use crate::vectorspace::{exact_top_k, Metric, Vector, VectorSet};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub query: Vector,
    /// One flag per cluster.
    pub relevance: Vec<bool>,
}

impl TrainingPair {
    pub fn relevant_count(&self) -> usize {
        self.relevance.iter().filter(|&&b| b).count()
    }

    /// Index of the single relevant cluster of a top-1 label.
    pub fn label(&self) -> Result<usize> {
        match self.relevant_count() {
            1 => Ok(self.relevance.iter().position(|&b| b).unwrap_or_default()),
            n => Err(Error::InvalidLabel(format!(
                "expected exactly one relevant cluster, found {n}"
            ))),
        }
    }
}

/// Labels each query with the cluster owning its exact inner-product
/// nearest neighbour.
pub fn build_training_pairs(queries: &VectorSet, idx: &IvfIndex) -> Result<Vec<TrainingPair>> {
    build_topk_training_pairs(queries, idx, 1)
}

/// Labels each query with every cluster that holds at least one of its
/// exact top-`k` documents.
pub fn build_topk_training_pairs(
    queries: &VectorSet,
    idx: &IvfIndex,
    k: usize,
) -> Result<Vec<TrainingPair>> {
    if k == 0 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    if queries.dim() != idx.dim() {
        return Err(Error::dim(idx.dim(), queries.dim()));
    }
    let label = |q: &[f32]| -> Result<TrainingPair> {
        let top = exact_top_k(q, idx.docs(), k, Metric::InnerProduct)?;
        let mut relevance = vec![false; idx.num_clusters()];
        for id in top.ids {
            relevance[idx.cluster_of(id)] = true;
        }
        Ok(TrainingPair {
            query: Vector::new(q.to_vec())?,
            relevance,
        })
    };
    #[cfg(feature = "parallel")]
    let pairs = queries
        .as_slice()
        .par_chunks_exact(queries.dim())
        .map(label)
        .collect();
    #[cfg(not(feature = "parallel"))]
    let pairs = queries.rows().map(label).collect();
    pairs
}

/// Disjoint train/validation/test portions of a pair set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SplitDataset {
    pub train: Vec<TrainingPair>,
    pub val: Vec<TrainingPair>,
    pub test: Vec<TrainingPair>,
}

/// Sizes `(floor(0.6 n), floor(0.2 n), remainder)`.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let train = n * 3 / 5;
    let val = n / 5;
    (train, val, n - train - val)
}

/// Seeded shuffle followed by a contiguous 60/20/20 cut.
pub fn split_dataset<T: Clone>(items: &[T], seed: u64) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    if items.len() < 5 {
        return Err(Error::InvalidParam(format!(
            "need at least 5 pairs to split, got {}",
            items.len()
        )));
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut seed::rng(seed));
    let (n_train, n_val, _) = split_sizes(items.len());
    let pick = |ids: &[usize]| ids.iter().map(|&i| items[i].clone()).collect::<Vec<_>>();
    Ok((
        pick(&order[..n_train]),
        pick(&order[n_train..n_train + n_val]),
        pick(&order[n_train + n_val..]),
    ))
}

impl SplitDataset {
    pub fn from_pairs(pairs: &[TrainingPair], seed: u64) -> Result<Self> {
        let (train, val, test) = split_dataset(pairs, seed)?;
        Ok(SplitDataset { train, val, test })
    }
}
