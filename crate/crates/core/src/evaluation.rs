//! Routing quality: top-k accuracy under top-ell routing, ell sweeps, MRR,
//! McNemar's test and report files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ivf::{top_clusters, IvfIndex, Router};
use crate::learning::TrainingPair;
use crate::vectorspace::{exact_top_k, Metric, VectorSet};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Exact inner-product top-k document ids for every query.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    k: usize,
    ids: Vec<Vec<usize>>,
}

impl GroundTruth {
    pub fn compute(docs: &VectorSet, queries: &VectorSet, k: usize) -> Result<Self> {
        if queries.dim() != docs.dim() {
            return Err(Error::dim(docs.dim(), queries.dim()));
        }
        let top = |q: &[f32]| exact_top_k(q, docs, k, Metric::InnerProduct).map(|r| r.ids);
        #[cfg(feature = "parallel")]
        let ids = queries
            .as_slice()
            .par_chunks_exact(queries.dim())
            .map(top)
            .collect::<Result<_>>()?;
        #[cfg(not(feature = "parallel"))]
        let ids = queries.rows().map(top).collect::<Result<_>>()?;
        Ok(GroundTruth { k, ids })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self, query: usize) -> &[usize] {
        &self.ids[query]
    }
}

/// Position of every cluster in the router's descending score order.
fn cluster_positions(router: &Router, q: &[f32]) -> Result<Vec<usize>> {
    let scores = router.score(q)?;
    let order = top_clusters(&scores, scores.len());
    let mut pos = vec![0; order.len()];
    for (rank, c) in order.into_iter().enumerate() {
        pos[c] = rank;
    }
    Ok(pos)
}

fn check_router(idx: &IvfIndex, router: &Router) -> Result<()> {
    if router.num_clusters() != idx.num_clusters() {
        return Err(Error::InvalidParam(format!(
            "router scores {} clusters but the index has {}",
            router.num_clusters(),
            idx.num_clusters()
        )));
    }
    Ok(())
}

/// Fraction of each query's exact top-k documents whose clusters are within
/// the routed top `ell`, for every `ell` in `ells`. Output is `[ell][query]`.
fn fractions(
    idx: &IvfIndex,
    router: &Router,
    queries: &VectorSet,
    truth: &GroundTruth,
    ells: &[usize],
) -> Result<Vec<Vec<f64>>> {
    check_router(idx, router)?;
    if truth.len() != queries.len() {
        return Err(Error::InvalidParam(format!(
            "ground truth covers {} queries, {} given",
            truth.len(),
            queries.len()
        )));
    }
    let per_query = |(qi, q): (usize, &[f32])| -> Result<Vec<f64>> {
        let pos = cluster_positions(router, q)?;
        let top = truth.ids(qi);
        Ok(ells
            .iter()
            .map(|&ell| {
                let hits = top
                    .iter()
                    .filter(|&&d| pos[idx.cluster_of(d)] < ell)
                    .count();
                hits as f64 / top.len() as f64
            })
            .collect())
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = queries
        .as_slice()
        .par_chunks_exact(queries.dim())
        .enumerate()
        .map(per_query)
        .collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = queries
        .rows()
        .enumerate()
        .map(per_query)
        .collect::<Result<_>>()?;

    Ok((0..ells.len())
        .map(|e| rows.iter().map(|r| r[e]).collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Accuracy {
    pub mean: f64,
    pub per_query: Vec<f64>,
}

impl Accuracy {
    fn from_fractions(per_query: Vec<f64>) -> Self {
        let mean = per_query.iter().sum::<f64>() / per_query.len() as f64;
        Accuracy { mean, per_query }
    }

    /// Per-query "all top-k documents reached" flags; for `k = 1` these are
    /// the hit indicators McNemar's test compares.
    pub fn hits(&self) -> Vec<bool> {
        self.per_query.iter().map(|&f| f >= 1.0).collect()
    }
}

/// Mean fraction of exact top-k documents held by the routed top-`ell`
/// partitions.
pub fn topk_accuracy(
    idx: &IvfIndex,
    router: &Router,
    queries: &VectorSet,
    k: usize,
    ell: usize,
) -> Result<Accuracy> {
    let truth = GroundTruth::compute(idx.docs(), queries, k)?;
    topk_accuracy_with_truth(idx, router, queries, &truth, ell)
}

pub fn topk_accuracy_with_truth(
    idx: &IvfIndex,
    router: &Router,
    queries: &VectorSet,
    truth: &GroundTruth,
    ell: usize,
) -> Result<Accuracy> {
    if ell == 0 {
        return Err(Error::InvalidParam("ell must be >= 1".into()));
    }
    let mut f = fractions(idx, router, queries, truth, &[ell])?;
    Ok(Accuracy::from_fractions(f.remove(0)))
}

/// Ten evenly spaced integers from `max(1, ceil(L/1000))` to `ceil(L/100)`.
/// When that range holds fewer than ten integers it is extended upward
/// (capped at `L`) so the grid still has ten points where possible.
pub fn default_ell_grid(clusters: usize) -> Vec<usize> {
    let lo = clusters.div_ceil(1000).max(1).min(clusters.max(1));
    let mut hi = clusters.div_ceil(100).max(lo);
    if hi - lo + 1 < 10 {
        hi = (lo + 9).min(clusters.max(1));
    }
    let mut grid: Vec<usize> = (0..10)
        .map(|i| lo + ((hi - lo) as f64 * i as f64 / 9.0).round() as usize)
        .collect();
    grid.dedup();
    grid
}

/// The two ell values the headline comparison uses: `max(1, ceil(L/1000))`
/// and `ceil(L/100)`.
pub fn headline_ells(clusters: usize) -> (usize, usize) {
    (
        clusters.div_ceil(1000).max(1),
        clusters.div_ceil(100).max(1),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: String,
    pub ell: usize,
    pub accuracy: f64,
}

/// Accuracy of several routers over an ell grid; rows grouped by method in
/// input order, ell ascending within each.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    pub k: usize,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn method<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.method == name)
    }

    pub fn accuracy(&self, name: &str, ell: usize) -> Option<f64> {
        self.method(name).find(|r| r.ell == ell).map(|r| r.accuracy)
    }
}

pub fn accuracy_sweep(
    idx: &IvfIndex,
    routers: &[(&str, &Router)],
    queries: &VectorSet,
    k: usize,
    ell_grid: &[usize],
) -> Result<SweepTable> {
    let truth = GroundTruth::compute(idx.docs(), queries, k)?;
    accuracy_sweep_with_truth(idx, routers, queries, &truth, ell_grid)
}

pub fn accuracy_sweep_with_truth(
    idx: &IvfIndex,
    routers: &[(&str, &Router)],
    queries: &VectorSet,
    truth: &GroundTruth,
    ell_grid: &[usize],
) -> Result<SweepTable> {
    if ell_grid.is_empty() {
        return Err(Error::InvalidParam("ell grid is empty".into()));
    }
    if ell_grid[0] == 0 || ell_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParam(
            "ell grid must be positive and strictly increasing".into(),
        ));
    }
    let mut rows = Vec::with_capacity(routers.len() * ell_grid.len());
    for (name, router) in routers {
        for (&ell, per_query) in ell_grid
            .iter()
            .zip(fractions(idx, router, queries, truth, ell_grid)?)
        {
            rows.push(SweepRow {
                method: name.to_string(),
                ell,
                accuracy: Accuracy::from_fractions(per_query).mean,
            });
        }
    }
    Ok(SweepTable { k: truth.k(), rows })
}

/// Mean reciprocal rank.
pub fn mrr(ranks: &[usize]) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::InvalidParam("no ranks given".into()));
    }
    if ranks.contains(&0) {
        return Err(Error::InvalidParam("ranks are 1-based".into()));
    }
    Ok(ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / ranks.len() as f64)
}

/// 1-based position of each pair's labelled cluster in the router's score
/// order (ties by ascending id).
pub fn router_ranks(router: &Router, pairs: &[TrainingPair]) -> Result<Vec<usize>> {
    pairs
        .iter()
        .map(|p| {
            let label = p.label()?;
            if p.relevance.len() != router.num_clusters() {
                return Err(Error::InvalidLabel(format!(
                    "label has {} entries, router scores {} clusters",
                    p.relevance.len(),
                    router.num_clusters()
                )));
            }
            Ok(cluster_positions(router, &p.query)?[label] + 1)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McNemarMethod {
    ExactBinomial,
    ChiSquared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemar {
    /// Queries A got right and B got wrong.
    pub b: usize,
    /// Queries A got wrong and B got right.
    pub c: usize,
    /// `(|b - c| - 1)^2 / (b + c)`, or 0 when there are no discordant pairs.
    pub statistic: f64,
    pub p_value: f64,
    pub method: McNemarMethod,
}

/// Below this many discordant pairs the exact binomial test is used.
pub const MCNEMAR_EXACT_BELOW: usize = 25;

/// McNemar's test on paired per-query outcomes.
pub fn mcnemar(flags_a: &[bool], flags_b: &[bool]) -> Result<McNemar> {
    if flags_a.len() != flags_b.len() {
        return Err(Error::InvalidParam(format!(
            "{} outcomes for A but {} for B",
            flags_a.len(),
            flags_b.len()
        )));
    }
    let b = flags_a
        .iter()
        .zip(flags_b)
        .filter(|&(&a, &b)| a && !b)
        .count();
    let c = flags_a
        .iter()
        .zip(flags_b)
        .filter(|&(&a, &b)| !a && b)
        .count();
    Ok(mcnemar_from_counts(b, c))
}

pub fn mcnemar_from_counts(b: usize, c: usize) -> McNemar {
    let n = b + c;
    let statistic = if n == 0 {
        0.0
    } else {
        let d = b.abs_diff(c) as f64 - 1.0;
        d * d / n as f64
    };
    if n < MCNEMAR_EXACT_BELOW {
        McNemar {
            b,
            c,
            statistic,
            p_value: binomial_two_sided(b.min(c), n),
            method: McNemarMethod::ExactBinomial,
        }
    } else {
        McNemar {
            b,
            c,
            statistic,
            p_value: chi2_sf_1dof(statistic),
            method: McNemarMethod::ChiSquared,
        }
    }
}

/// `min(1, 2 * P[X <= m])` for `X ~ Binomial(n, 1/2)`.
fn binomial_two_sided(m: usize, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut coeff = 1.0f64;
    let mut tail = 0.0f64;
    for i in 0..=m {
        if i > 0 {
            coeff *= (n - i + 1) as f64 / i as f64;
        }
        tail += coeff;
    }
    (2.0 * tail * 0.5f64.powi(n as i32)).min(1.0)
}

/// Upper tail of the chi-squared distribution with one degree of freedom.
pub fn chi2_sf_1dof(x: f64) -> f64 {
    libm::erfc((x / 2.0).sqrt())
}

/// One line of an accuracy report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub dataset: String,
    pub clustering: String,
    pub router: String,
    pub k: usize,
    pub ell: usize,
    pub accuracy: f64,
}

/// Pairwise significance of two routers at top-1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceRecord {
    pub dataset: String,
    pub clustering: String,
    pub router_a: String,
    pub router_b: String,
    pub ell: usize,
    pub b: usize,
    pub c: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub method: McNemarMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidParam(format!(
                "unknown report format {other:?}"
            ))),
        }
    }
}

fn sort_records(records: &mut [EvalRecord]) {
    records.sort_by(|a, b| {
        (&a.dataset, &a.clustering, &a.router, a.k, a.ell)
            .cmp(&(&b.dataset, &b.clustering, &b.router, b.k, b.ell))
            .then(a.accuracy.total_cmp(&b.accuracy))
    });
}

/// Writes records sorted by every key column.
pub fn emit_report(records: &[EvalRecord], path: &Path, format: ReportFormat) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidParam("no records to report".into()));
    }
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    write_rows(&sorted, path, format)
}

pub fn emit_significance(
    records: &[SignificanceRecord],
    path: &Path,
    format: ReportFormat,
) -> Result<()> {
    write_rows(records, path, format)
}

fn write_rows<T: Serialize>(rows: &[T], path: &Path, format: ReportFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(BufWriter::new(file));
            for row in rows {
                w.serialize(row)?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        ReportFormat::Json => {
            let mut w = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut w, rows)?;
            w.write_all(b"\n")
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}

pub fn read_report<T: DeserializeOwned>(path: &Path, format: ReportFormat) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        ReportFormat::Csv => {
            let mut r = csv::Reader::from_reader(file);
            r.deserialize()
                .map(|row| row.map_err(Error::from))
                .collect()
        }
        ReportFormat::Json => Ok(serde_json::from_reader(std::io::BufReader::new(file))?),
    }
}
