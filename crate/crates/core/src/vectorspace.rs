//! Dense vector types, distance functions and the exhaustive top-k scan.
//!
//! Vectors are stored as `f32`; every reduction accumulates in `f64`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single dense vector with finite components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vector(Vec<f32>);

impl Vector {
    pub fn new(components: Vec<f32>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParam("vector must have dim >= 1".into()));
        }
        if let Some(i) = components.iter().position(|c| !c.is_finite()) {
            return Err(Error::DegenerateInput(format!(
                "component {i} is not finite"
            )));
        }
        Ok(Vector(components))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.0
    }
}

impl Deref for Vector {
    type Target = [f32];

    fn deref(&self) -> &[f32] {
        &self.0
    }
}

impl TryFrom<Vec<f32>> for Vector {
    type Error = Error;

    fn try_from(v: Vec<f32>) -> Result<Self> {
        Vector::new(v)
    }
}

/// Non-empty collection of same-dimension vectors, stored row-major.
///
/// Row `i` is the vector with id `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorSet {
    dim: usize,
    data: Vec<f32>,
}

impl VectorSet {
    /// Wraps a flat row-major buffer of `data.len() / dim` vectors.
    pub fn new(dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParam("dimension must be >= 1".into()));
        }
        if data.is_empty() {
            return Err(Error::InvalidParam("vector set must be non-empty".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidParam(format!(
                "buffer of {} floats is not a multiple of dim {dim}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|c| !c.is_finite()) {
            return Err(Error::DegenerateInput(format!(
                "vector {} has a non-finite component",
                i / dim
            )));
        }
        Ok(VectorSet { dim, data })
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::InvalidParam("vector set must be non-empty".into()))?;
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(dim * rows.len());
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::dim(dim, row.len()));
            }
            data.extend_from_slice(row);
        }
        VectorSet::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    /// Always false for a constructed set; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, id: usize) -> &[f32] {
        &self.data[id * self.dim..(id + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f32> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.data
    }

    /// Copies the listed rows into a new set.
    pub fn select(&self, ids: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(ids.len() * self.dim);
        for &id in ids {
            data.extend_from_slice(self.row(id));
        }
        VectorSet::new(self.dim, data)
    }

    pub fn check_dim(&self, q: &[f32]) -> Result<()> {
        if q.len() != self.dim {
            return Err(Error::dim(self.dim, q.len()));
        }
        Ok(())
    }
}

/// Distance functions over dense vectors. Smaller is closer for all kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    L1,
    L2,
    Cosine,
    InnerProduct,
}

/// Ranked result of a top-k query, best (smallest distance) first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopKResult {
    pub ids: Vec<usize>,
    pub scores: Vec<f64>,
}

impl TopKResult {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[inline]
pub(crate) fn dot_unchecked(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum()
}

#[inline]
pub(crate) fn squared_l2_unchecked(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum()
}

pub(crate) fn norm_unchecked(a: &[f32]) -> f64 {
    dot_unchecked(a, a).sqrt()
}

fn check_same_dim(a: &[f32], b: &[f32]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::dim(a.len(), b.len()));
    }
    Ok(())
}

pub fn dot(a: &[f32], b: &[f32]) -> Result<f64> {
    check_same_dim(a, b)?;
    Ok(dot_unchecked(a, b))
}

pub fn distance(a: &[f32], b: &[f32], metric: Metric) -> Result<f64> {
    check_same_dim(a, b)?;
    Ok(match metric {
        Metric::L1 => a
            .iter()
            .zip(b)
            .map(|(&x, &y)| (f64::from(x) - f64::from(y)).abs())
            .sum(),
        Metric::L2 => squared_l2_unchecked(a, b).sqrt(),
        Metric::Cosine => {
            let (na, nb) = (norm_unchecked(a), norm_unchecked(b));
            if na == 0.0 || nb == 0.0 {
                return Err(Error::DegenerateInput(
                    "cosine distance is undefined for a zero vector".into(),
                ));
            }
            1.0 - dot_unchecked(a, b) / (na * nb)
        }
        Metric::InnerProduct => -dot_unchecked(a, b),
    })
}

pub fn l2_normalize(v: &[f32]) -> Result<Vector> {
    let norm = norm_unchecked(v);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateInput(
            "cannot normalize a zero vector".into(),
        ));
    }
    Vector::new(v.iter().map(|&x| (f64::from(x) / norm) as f32).collect())
}

/// Candidate entry ordered by `(distance, id)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scored {
    pub dist: f64,
    pub id: usize,
}

impl PartialEq for Scored {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scored {}

impl PartialOrd for Scored {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scored {
    fn cmp(&self, other: &Self) -> Ordering {
        // distances are finite, so partial_cmp never fails; -0.0 == 0.0 falls through to the id
        self.dist
            .partial_cmp(&other.dist)
            .unwrap_or(Ordering::Equal)
            .then(self.id.cmp(&other.id))
    }
}

/// Bounded max-heap keeping the `k` smallest `(distance, id)` pairs.
pub(crate) struct TopKSelector {
    k: usize,
    heap: BinaryHeap<Scored>,
}

impl TopKSelector {
    pub fn new(k: usize) -> Self {
        TopKSelector {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    #[inline]
    pub fn push(&mut self, dist: f64, id: usize) {
        let entry = Scored { dist, id };
        if self.heap.len() < self.k {
            self.heap.push(entry);
        } else if let Some(worst) = self.heap.peek() {
            if entry < *worst {
                self.heap.pop();
                self.heap.push(entry);
            }
        }
    }

    #[cfg_attr(not(feature = "parallel"), allow(dead_code))]
    pub fn merge(&mut self, other: TopKSelector) {
        for e in other.heap {
            self.push(e.dist, e.id);
        }
    }

    pub fn into_result(self) -> TopKResult {
        let sorted = self.heap.into_sorted_vec();
        TopKResult {
            ids: sorted.iter().map(|e| e.id).collect(),
            scores: sorted.iter().map(|e| e.dist).collect(),
        }
    }
}

/// Distance kernel without dimension checks; caller validated dims.
fn kernel(metric: Metric, q: &[f32], q_norm: f64) -> impl Fn(&[f32]) -> Result<f64> + Sync + '_ {
    move |x: &[f32]| -> Result<f64> {
        Ok(match metric {
            Metric::InnerProduct => -dot_unchecked(q, x),
            Metric::L2 => squared_l2_unchecked(q, x).sqrt(),
            Metric::L1 => q
                .iter()
                .zip(x)
                .map(|(&a, &b)| (f64::from(a) - f64::from(b)).abs())
                .sum(),
            Metric::Cosine => {
                let nx = norm_unchecked(x);
                if nx == 0.0 {
                    return Err(Error::DegenerateInput(
                        "cosine distance is undefined for a zero vector".into(),
                    ));
                }
                1.0 - dot_unchecked(q, x) / (q_norm * nx)
            }
        })
    }
}

const PARALLEL_MIN_FLOATS: usize = 1 << 18;

/// Exhaustive top-k scan: the `min(k, |X|)` ids with the smallest distance
/// to `q`, ties broken by ascending id.
pub fn exact_top_k(q: &[f32], docs: &VectorSet, k: usize, metric: Metric) -> Result<TopKResult> {
    docs.check_dim(q)?;
    if k == 0 {
        return Err(Error::InvalidParam("k must be >= 1".into()));
    }
    let q_norm = norm_unchecked(q);
    if metric == Metric::Cosine && q_norm == 0.0 {
        return Err(Error::DegenerateInput(
            "cosine distance is undefined for a zero query".into(),
        ));
    }
    let dist = kernel(metric, q, q_norm);
    let k = k.min(docs.len());

    let scan = |start: usize, rows: &[f32]| -> Result<TopKSelector> {
        let mut sel = TopKSelector::new(k);
        for (offset, x) in rows.chunks_exact(docs.dim()).enumerate() {
            sel.push(dist(x)?, start + offset);
        }
        Ok(sel)
    };

    #[cfg(feature = "parallel")]
    if docs.as_slice().len() >= PARALLEL_MIN_FLOATS {
        use rayon::prelude::*;
        let rows_per_chunk = (PARALLEL_MIN_FLOATS / 4 / docs.dim()).max(1);
        let parts = docs
            .as_slice()
            .par_chunks(rows_per_chunk * docs.dim())
            .enumerate()
            .map(|(c, rows)| scan(c * rows_per_chunk, rows))
            .collect::<Result<Vec<_>>>()?;
        let mut merged = TopKSelector::new(k);
        for part in parts {
            merged.merge(part);
        }
        return Ok(merged.into_result());
    }
    #[cfg(not(feature = "parallel"))]
    let _ = PARALLEL_MIN_FLOATS;

    Ok(scan(0, docs.as_slice())?.into_result())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_examples() {
        assert_eq!(dot(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(dot(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(dot(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap(), 32.0);
        assert!(matches!(
            dot(&[1.0], &[1.0, 2.0]),
            Err(Error::Dimension {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(&[1.0, 2.0], &[4.0, 6.0], Metric::L1).unwrap(), 7.0);
        assert_eq!(distance(&[0.0, 0.0], &[3.0, 4.0], Metric::L2).unwrap(), 5.0);
        assert_eq!(
            distance(&[1.0, 0.0], &[0.0, 1.0], Metric::Cosine).unwrap(),
            1.0
        );
        assert_eq!(
            distance(&[1.0, 2.0], &[3.0, 4.0], Metric::InnerProduct).unwrap(),
            -11.0
        );
    }

    #[test]
    fn cosine_rejects_zero_vector() {
        assert!(matches!(
            distance(&[0.0, 0.0], &[1.0, 0.0], Metric::Cosine),
            Err(Error::DegenerateInput(_))
        ));
        let docs = VectorSet::from_rows(&[[1.0f32, 0.0], [0.0, 0.0]]).unwrap();
        assert!(exact_top_k(&[1.0, 1.0], &docs, 1, Metric::Cosine).is_err());
    }

    #[test]
    fn normalize_examples() {
        let v = l2_normalize(&[3.0, 4.0]).unwrap();
        assert!((v[0] - 0.6).abs() < 1e-7 && (v[1] - 0.8).abs() < 1e-7);
        assert_eq!(
            l2_normalize(&[1.0, 0.0, 0.0]).unwrap().as_slice(),
            &[1.0, 0.0, 0.0]
        );
        let v = l2_normalize(&[2.0, 2.0]).unwrap();
        let h = std::f32::consts::FRAC_1_SQRT_2;
        assert!((v[0] - h).abs() < 1e-7 && (v[1] - h).abs() < 1e-7);
        assert!(l2_normalize(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn top1_of_coinciding_point() {
        let docs = VectorSet::from_rows(&[[1.0f32, 0.0], [0.0, 1.0]]).unwrap();
        let r = exact_top_k(&[1.0, 0.0], &docs, 1, Metric::InnerProduct).unwrap();
        assert_eq!(r.ids, vec![0]);
        assert_eq!(r.scores, vec![-1.0]);
    }

    #[test]
    fn ties_resolve_to_lower_id() {
        let docs = VectorSet::from_rows(&[[1.0f32], [2.0], [2.0], [1.0]]).unwrap();
        let r = exact_top_k(&[1.0], &docs, 4, Metric::InnerProduct).unwrap();
        assert_eq!(r.ids, vec![1, 2, 0, 3]);
    }

    #[test]
    fn k_larger_than_set_is_truncated() {
        let docs = VectorSet::from_rows(&[[1.0f32], [3.0], [2.0]]).unwrap();
        let r = exact_top_k(&[1.0], &docs, 10, Metric::L2).unwrap();
        assert_eq!(r.ids, vec![0, 2, 1]);
        assert!(exact_top_k(&[1.0], &docs, 0, Metric::L2).is_err());
        assert!(exact_top_k(&[1.0, 2.0], &docs, 1, Metric::L2).is_err());
    }

    #[test]
    fn constructors_validate() {
        assert!(Vector::new(vec![]).is_err());
        assert!(Vector::new(vec![f32::NAN]).is_err());
        assert!(VectorSet::new(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(VectorSet::new(2, vec![]).is_err());
        assert!(VectorSet::from_rows(&[vec![1.0f32], vec![1.0, 2.0]]).is_err());
        assert!(VectorSet::new(1, vec![f32::INFINITY]).is_err());
    }
}
