//! Partitioning algorithms: Lloyd's KMeans, spherical KMeans and the
//! one-pass shallow variant.
//!
//! All three return a [`ClusteringResult`] whose member lists partition the
//! input ids. Lloyd and spherical iterate with `f64` representatives and only
//! round to `f32` on return.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::vectorspace::{dot_unchecked, l2_normalize, norm_unchecked, VectorSet};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub const DEFAULT_MAX_ITERS: usize = 100;
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusteringKind {
    Standard,
    Spherical,
    Shallow,
}

impl ClusteringKind {
    pub const ALL: [ClusteringKind; 3] = [Self::Standard, Self::Spherical, Self::Shallow];

    pub fn name(self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::Spherical => "spherical",
            Self::Shallow => "shallow",
        }
    }
}

impl fmt::Display for ClusteringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClusteringKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" => Ok(Self::Standard),
            "spherical" => Ok(Self::Spherical),
            "shallow" => Ok(Self::Shallow),
            other => Err(Error::InvalidParam(format!(
                "unknown clustering {other:?} (expected standard, spherical or shallow)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub clusters: usize,
    pub max_iters: usize,
    /// Stop once the objective changes by less than this between iterations.
    pub epsilon: f64,
    pub seed: u64,
}

impl KMeansParams {
    pub fn new(clusters: usize, seed: u64) -> Self {
        KMeansParams {
            clusters,
            max_iters: DEFAULT_MAX_ITERS,
            epsilon: DEFAULT_EPSILON,
            seed,
        }
    }

    fn validate(&self, n_points: usize) -> Result<()> {
        if self.clusters == 0 {
            return Err(Error::InvalidParam(
                "number of clusters must be >= 1".into(),
            ));
        }
        if self.clusters > n_points {
            return Err(Error::InvalidParam(format!(
                "{} clusters requested for {n_points} points",
                self.clusters
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParam("max_iters must be >= 1".into()));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::InvalidParam("epsilon must be nonnegative".into()));
        }
        Ok(())
    }
}

/// `ceil(sqrt(p))`, the default number of partitions for `p` documents.
pub fn default_num_clusters(p: usize) -> usize {
    let r = p.isqrt();
    if r * r == p {
        r
    } else {
        r + 1
    }
}

/// Partition of a vector set into `L` clusters plus one representative each.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    assignments: Vec<usize>,
    representatives: VectorSet,
    members: Vec<Vec<usize>>,
}

impl ClusteringResult {
    /// Validates that every assignment names a representative row.
    pub fn new(assignments: Vec<usize>, representatives: VectorSet) -> Result<Self> {
        let l = representatives.len();
        let mut members = vec![Vec::new(); l];
        for (id, &c) in assignments.iter().enumerate() {
            if c >= l {
                return Err(Error::InconsistentClustering(format!(
                    "point {id} assigned to cluster {c} but only {l} representatives exist"
                )));
            }
            members[c].push(id);
        }
        Ok(ClusteringResult {
            assignments,
            representatives,
            members,
        })
    }

    /// Rebuilds from explicit member lists; every id in `0..n` must appear once.
    pub fn from_members(
        members: Vec<Vec<usize>>,
        representatives: VectorSet,
        n: usize,
    ) -> Result<Self> {
        if members.len() != representatives.len() {
            return Err(Error::InconsistentClustering(format!(
                "{} member lists for {} representatives",
                members.len(),
                representatives.len()
            )));
        }
        let mut assignments = vec![usize::MAX; n];
        for (c, list) in members.iter().enumerate() {
            for &id in list {
                if id >= n {
                    return Err(Error::InconsistentClustering(format!(
                        "cluster {c} lists id {id} outside 0..{n}"
                    )));
                }
                if assignments[id] != usize::MAX {
                    return Err(Error::InconsistentClustering(format!(
                        "id {id} appears in clusters {} and {c}",
                        assignments[id]
                    )));
                }
                assignments[id] = c;
            }
        }
        if let Some(id) = assignments.iter().position(|&c| c == usize::MAX) {
            return Err(Error::InconsistentClustering(format!(
                "id {id} is in no cluster"
            )));
        }
        Ok(ClusteringResult {
            assignments,
            representatives,
            members,
        })
    }

    pub fn num_clusters(&self) -> usize {
        self.members.len()
    }

    pub fn num_points(&self) -> usize {
        self.assignments.len()
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn representatives(&self) -> &VectorSet {
        &self.representatives
    }

    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn cluster_of(&self, id: usize) -> usize {
        self.assignments[id]
    }
}

/// Per-iteration snapshot handed to an observer.
#[derive(Debug)]
pub struct IterationStats<'a> {
    /// 0 for the initial assignment, then one per update step.
    pub iteration: usize,
    /// Inertia for Lloyd, summed best inner product for spherical.
    pub objective: f64,
    /// Flat `L x dim` representatives used for this assignment.
    pub representatives: &'a [f64],
    pub assignments: &'a [usize],
}

/// Sum of squared L2 distances from each point to its nearest representative.
pub fn inertia(x: &VectorSet, reps: &VectorSet) -> Result<f64> {
    if reps.dim() != x.dim() {
        return Err(Error::dim(x.dim(), reps.dim()));
    }
    let reps64: Vec<f64> = reps.as_slice().iter().map(|&v| f64::from(v)).collect();
    Ok(assign(x, &reps64, Mode::Euclidean).1.iter().sum())
}

/// Sum over points of the largest inner product with any representative.
/// Points and representatives must be unit norm within 1e-6.
pub fn spherical_objective(x: &VectorSet, reps: &VectorSet) -> Result<f64> {
    if reps.dim() != x.dim() {
        return Err(Error::dim(x.dim(), reps.dim()));
    }
    check_unit(x)?;
    check_unit(reps)?;
    let reps64: Vec<f64> = reps.as_slice().iter().map(|&v| f64::from(v)).collect();
    Ok(assign(x, &reps64, Mode::InnerProduct).1.iter().sum())
}

fn check_unit(set: &VectorSet) -> Result<()> {
    for (index, row) in set.rows().enumerate() {
        let norm = norm_unchecked(row);
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::NonUnitNorm { index, norm });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// argmin squared L2; value = squared distance.
    Euclidean,
    /// argmax inner product; value = inner product.
    InnerProduct,
}

fn sq_dist64(x: &[f32], rep: &[f64]) -> f64 {
    x.iter()
        .zip(rep)
        .map(|(&a, &b)| {
            let d = f64::from(a) - b;
            d * d
        })
        .sum()
}

fn dot64(x: &[f32], rep: &[f64]) -> f64 {
    x.iter().zip(rep).map(|(&a, &b)| f64::from(a) * b).sum()
}

fn nearest(x: &[f32], reps: &[f64], mode: Mode) -> (usize, f64) {
    let dim = x.len();
    let mut best = (0, 0.0);
    for (c, rep) in reps.chunks_exact(dim).enumerate() {
        match mode {
            Mode::Euclidean => {
                let d = sq_dist64(x, rep);
                if c == 0 || d < best.1 {
                    best = (c, d);
                }
            }
            Mode::InnerProduct => {
                let s = dot64(x, rep);
                if c == 0 || s > best.1 {
                    best = (c, s);
                }
            }
        }
    }
    best
}

fn assign(x: &VectorSet, reps: &[f64], mode: Mode) -> (Vec<usize>, Vec<f64>) {
    #[cfg(feature = "parallel")]
    let pairs: Vec<(usize, f64)> = x
        .as_slice()
        .par_chunks_exact(x.dim())
        .map(|row| nearest(row, reps, mode))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let pairs: Vec<(usize, f64)> = x.rows().map(|row| nearest(row, reps, mode)).collect();
    pairs.into_iter().unzip()
}

/// How far a point sits from its representative; larger is worse.
fn badness(value: f64, mode: Mode) -> f64 {
    match mode {
        Mode::Euclidean => value,
        Mode::InnerProduct => -value,
    }
}

fn counts(assignments: &[usize], l: usize) -> Vec<usize> {
    let mut counts = vec![0; l];
    for &c in assignments {
        counts[c] += 1;
    }
    counts
}

/// Worst-placed point whose cluster can spare a member, lowest id on ties.
fn pick_donor(
    values: &[f64],
    assignments: &[usize],
    counts: &[usize],
    taken: &[bool],
    mode: Mode,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (id, (&v, &c)) in values.iter().zip(assignments).enumerate() {
        if taken[id] || counts[c] < 2 {
            continue;
        }
        let b = badness(v, mode);
        if best.is_none_or(|(_, bb)| b > bb) {
            best = Some((id, b));
        }
    }
    best.map(|(id, _)| id)
}

fn set_rep(reps: &mut [f64], c: usize, x: &[f32]) {
    let dim = x.len();
    for (r, &v) in reps[c * dim..(c + 1) * dim].iter_mut().zip(x) {
        *r = f64::from(v);
    }
}

/// Reseeds clusters that are empty (or flagged in `reseed`) at the worst
/// placed points, then reassigns. Repeats until no cluster is empty or no
/// donor remains; as a last resort moves donors directly.
fn assign_with_repair(
    x: &VectorSet,
    reps: &mut [f64],
    mode: Mode,
    mut reseed: Vec<bool>,
) -> (Vec<usize>, Vec<f64>) {
    let l = reseed.len();
    let (mut assignments, mut values) = assign(x, reps, mode);
    for _ in 0..=l {
        let cnt = counts(&assignments, l);
        for (c, flag) in reseed.iter_mut().enumerate() {
            *flag |= cnt[c] == 0;
        }
        if !reseed.iter().any(|&f| f) {
            return (assignments, values);
        }
        let mut cnt = cnt;
        let mut taken = vec![false; x.len()];
        let mut moved = false;
        for c in 0..l {
            if !reseed[c] {
                continue;
            }
            if let Some(p) = pick_donor(&values, &assignments, &cnt, &taken, mode) {
                taken[p] = true;
                cnt[assignments[p]] -= 1;
                cnt[c] += 1;
                set_rep(reps, c, x.row(p));
                moved = true;
            }
        }
        reseed.iter_mut().for_each(|f| *f = false);
        let next = assign(x, reps, mode);
        assignments = next.0;
        values = next.1;
        if !moved {
            break;
        }
    }

    // Duplicate-heavy inputs can keep a reseeded cluster empty through ties.
    let mut cnt = counts(&assignments, l);
    let mut taken = vec![false; x.len()];
    for c in 0..l {
        if cnt[c] > 0 {
            continue;
        }
        if let Some(p) = pick_donor(&values, &assignments, &cnt, &taken, mode) {
            taken[p] = true;
            cnt[assignments[p]] -= 1;
            cnt[c] += 1;
            assignments[p] = c;
            set_rep(reps, c, x.row(p));
            values[p] = match mode {
                Mode::Euclidean => 0.0,
                Mode::InnerProduct => dot_unchecked(x.row(p), x.row(p)),
            };
        }
    }
    (assignments, values)
}

fn sample_seeds(n: usize, l: usize, seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(seed);
    index::sample(&mut rng, n, l).into_vec()
}

fn init_reps(x: &VectorSet, seeds: &[usize]) -> Vec<f64> {
    seeds
        .iter()
        .flat_map(|&id| x.row(id).iter().map(|&v| f64::from(v)))
        .collect()
}

fn cluster_means(x: &VectorSet, assignments: &[usize], l: usize) -> (Vec<f64>, Vec<usize>) {
    let dim = x.dim();
    let mut sums = vec![0.0f64; l * dim];
    let mut cnt = vec![0usize; l];
    for (row, &c) in x.rows().zip(assignments) {
        cnt[c] += 1;
        for (s, &v) in sums[c * dim..(c + 1) * dim].iter_mut().zip(row) {
            *s += f64::from(v);
        }
    }
    for (c, &n) in cnt.iter().enumerate() {
        if n > 0 {
            let inv = 1.0 / n as f64;
            sums[c * dim..(c + 1) * dim]
                .iter_mut()
                .for_each(|s| *s *= inv);
        }
    }
    (sums, cnt)
}

fn finish(assignments: Vec<usize>, reps: &[f64], dim: usize) -> Result<ClusteringResult> {
    let reps = VectorSet::new(dim, reps.iter().map(|&v| v as f32).collect())?;
    ClusteringResult::new(assignments, reps)
}

type Observer<'o> = &'o mut dyn FnMut(&IterationStats<'_>);

/// Lloyd's algorithm seeded with `L` distinct data points.
pub fn standard_kmeans(x: &VectorSet, params: &KMeansParams) -> Result<ClusteringResult> {
    standard_kmeans_observed(x, params, &mut |_| {})
}

/// [`standard_kmeans`] reporting inertia after every assignment step.
pub fn standard_kmeans_observed(
    x: &VectorSet,
    params: &KMeansParams,
    observer: Observer<'_>,
) -> Result<ClusteringResult> {
    params.validate(x.len())?;
    let l = params.clusters;
    let mut reps = init_reps(x, &sample_seeds(x.len(), l, params.seed));
    lloyd(x, &mut reps, l, params, Mode::Euclidean, observer)
}

/// Spherical KMeans: inputs and centroids live on the unit sphere and
/// points join the representative with the largest inner product.
pub fn spherical_kmeans(x: &VectorSet, params: &KMeansParams) -> Result<ClusteringResult> {
    spherical_kmeans_observed(x, params, &mut |_| {})
}

pub fn spherical_kmeans_observed(
    x: &VectorSet,
    params: &KMeansParams,
    observer: Observer<'_>,
) -> Result<ClusteringResult> {
    params.validate(x.len())?;
    let mut unit = Vec::with_capacity(x.as_slice().len());
    for (id, row) in x.rows().enumerate() {
        let v = l2_normalize(row)
            .map_err(|_| Error::DegenerateInput(format!("point {id} is a zero vector")))?;
        unit.extend_from_slice(&v);
    }
    let unit = VectorSet::new(x.dim(), unit)?;
    let l = params.clusters;
    let mut reps = init_reps(&unit, &sample_seeds(x.len(), l, params.seed));
    // seeds came from rounded f32 rows; put them exactly on the sphere
    normalize_rows(&mut reps, x.dim());
    lloyd(&unit, &mut reps, l, params, Mode::InnerProduct, observer)
}

/// Normalizes each row in place; returns the rows whose norm vanished.
fn normalize_rows(reps: &mut [f64], dim: usize) -> Vec<bool> {
    reps.chunks_exact_mut(dim)
        .map(|row| {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-12 {
                row.iter_mut().for_each(|v| *v /= norm);
                false
            } else {
                true
            }
        })
        .collect()
}

fn lloyd(
    x: &VectorSet,
    reps: &mut [f64],
    l: usize,
    params: &KMeansParams,
    mode: Mode,
    observer: Observer<'_>,
) -> Result<ClusteringResult> {
    let dim = x.dim();
    let (mut assignments, values) = assign_with_repair(x, reps, mode, vec![false; l]);
    let mut objective: f64 = values.iter().sum();
    observer(&IterationStats {
        iteration: 0,
        objective,
        representatives: reps,
        assignments: &assignments,
    });

    for iteration in 1..=params.max_iters {
        let (mut means, cnt) = cluster_means(x, &assignments, l);
        let mut reseed: Vec<bool> = cnt.iter().map(|&n| n == 0).collect();
        if mode == Mode::InnerProduct {
            for (flag, degenerate) in reseed.iter_mut().zip(normalize_rows(&mut means, dim)) {
                *flag |= degenerate;
            }
        }
        for (c, flag) in reseed.iter().enumerate() {
            if *flag {
                // keep the old representative until the repair picks a point
                means[c * dim..(c + 1) * dim].copy_from_slice(&reps[c * dim..(c + 1) * dim]);
            }
        }
        reps.copy_from_slice(&means);

        let (next, values) = assign_with_repair(x, reps, mode, reseed);
        assignments = next;
        let updated: f64 = values.iter().sum();
        observer(&IterationStats {
            iteration,
            objective: updated,
            representatives: reps,
            assignments: &assignments,
        });
        let delta = (objective - updated).abs();
        objective = updated;
        if delta < params.epsilon {
            break;
        }
    }
    finish(assignments, reps, dim)
}

/// One assignment pass against `L` randomly drawn data points under
/// inner-product distance. The seeds are kept as representatives.
///
/// Unlike the iterative variants, a seed can lose every point (itself
/// included) to a seed with a larger inner product, so clusters may be
/// empty.
pub fn shallow_kmeans(x: &VectorSet, params: &KMeansParams) -> Result<ClusteringResult> {
    params.validate(x.len())?;
    shallow_kmeans_with_seeds(x, &sample_seeds(x.len(), params.clusters, params.seed))
}

pub fn shallow_kmeans_with_seeds(x: &VectorSet, seeds: &[usize]) -> Result<ClusteringResult> {
    if seeds.is_empty() {
        return Err(Error::InvalidParam("at least one seed is required".into()));
    }
    if let Some(&bad) = seeds.iter().find(|&&s| s >= x.len()) {
        return Err(Error::InvalidParam(format!("seed id {bad} out of range")));
    }
    let reps = init_reps(x, seeds);
    let (assignments, _) = assign(x, &reps, Mode::InnerProduct);
    ClusteringResult::new(assignments, x.select(seeds)?)
}

/// Runs the selected algorithm and reports its final objective
/// (inertia, or the spherical/inner-product objective).
pub fn run_clustering(
    kind: ClusteringKind,
    x: &VectorSet,
    params: &KMeansParams,
) -> Result<(ClusteringResult, f64)> {
    let mut last = f64::NAN;
    let result = match kind {
        ClusteringKind::Standard => {
            standard_kmeans_observed(x, params, &mut |s| last = s.objective)?
        }
        ClusteringKind::Spherical => {
            spherical_kmeans_observed(x, params, &mut |s| last = s.objective)?
        }
        ClusteringKind::Shallow => {
            let r = shallow_kmeans(x, params)?;
            last = x
                .rows()
                .zip(r.assignments())
                .map(|(row, &c)| dot_unchecked(row, r.representatives().row(c)))
                .sum();
            r
        }
    };
    Ok((result, last))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(rows: &[&[f32]]) -> VectorSet {
        VectorSet::from_rows(rows).unwrap()
    }

    #[test]
    fn ceil_sqrt_rule() {
        assert_eq!(default_num_clusters(10_000), 100);
        assert_eq!(default_num_clusters(20_000), 142);
        assert_eq!(default_num_clusters(1), 1);
        assert_eq!(default_num_clusters(2), 2);
    }

    #[test]
    fn inertia_examples() {
        let x = set(&[&[0.0, 0.0], &[2.0, 0.0]]);
        assert_eq!(inertia(&x, &set(&[&[1.0, 0.0]])).unwrap(), 2.0);
        assert_eq!(inertia(&x, &x).unwrap(), 0.0);
        assert!(inertia(&x, &set(&[&[1.0]])).is_err());
    }

    #[test]
    fn spherical_objective_examples() {
        let x = set(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(spherical_objective(&x, &x).unwrap(), 2.0);
        assert_eq!(
            spherical_objective(&set(&[&[1.0, 0.0]]), &set(&[&[0.0, 1.0]])).unwrap(),
            0.0
        );
        assert!(matches!(
            spherical_objective(&set(&[&[2.0, 0.0]]), &x),
            Err(Error::NonUnitNorm { index: 0, .. })
        ));
    }

    #[test]
    fn one_cluster_is_the_mean() {
        let x = set(&[&[0.0, 1.0], &[2.0, 3.0], &[4.0, -1.0]]);
        let r = standard_kmeans(&x, &KMeansParams::new(1, 3)).unwrap();
        assert_eq!(r.representatives().row(0), &[2.0, 1.0]);
        assert_eq!(r.members(), &[vec![0, 1, 2]]);
    }

    #[test]
    fn singleton_clusters_have_zero_inertia() {
        let x = set(&[&[0.0, 1.0], &[2.0, 3.0], &[4.0, -1.0], &[5.0, 5.0]]);
        let r = standard_kmeans(&x, &KMeansParams::new(4, 11)).unwrap();
        assert!(r.members().iter().all(|m| m.len() == 1));
        assert_eq!(inertia(&x, r.representatives()).unwrap(), 0.0);
    }

    #[test]
    fn too_many_clusters_rejected() {
        let x = set(&[&[0.0], &[1.0]]);
        assert!(matches!(
            standard_kmeans(&x, &KMeansParams::new(3, 0)),
            Err(Error::InvalidParam(_))
        ));
        assert!(spherical_kmeans(&x, &KMeansParams::new(3, 0)).is_err());
        assert!(shallow_kmeans(&x, &KMeansParams::new(3, 0)).is_err());
        assert!(standard_kmeans(&x, &KMeansParams::new(0, 0)).is_err());
    }

    #[test]
    fn duplicates_never_leave_empty_clusters() {
        let x = set(&[&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0], &[0.0, 5.0]]);
        for seed in 0..10 {
            let r = standard_kmeans(&x, &KMeansParams::new(3, seed)).unwrap();
            assert!(r.members().iter().all(|m| !m.is_empty()), "seed {seed}");
            let r = spherical_kmeans(&x, &KMeansParams::new(3, seed)).unwrap();
            assert!(r.members().iter().all(|m| !m.is_empty()), "seed {seed}");
        }
    }

    #[test]
    fn spherical_rejects_zero_vector() {
        let x = set(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(matches!(
            spherical_kmeans(&x, &KMeansParams::new(1, 0)),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn spherical_singletons_reach_objective_n() {
        let x = set(&[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0]]);
        let r = spherical_kmeans(&x, &KMeansParams::new(3, 5)).unwrap();
        assert!(r.members().iter().all(|m| m.len() == 1));
        assert_eq!(spherical_objective(&x, r.representatives()).unwrap(), 3.0);
    }

    #[test]
    fn antipodal_groups_separate() {
        let mut rows = Vec::new();
        for i in 0..10 {
            let a = 0.05 * i as f32;
            rows.push(vec![a.cos(), a.sin()]);
            rows.push(vec![-a.cos(), -a.sin()]);
        }
        let x = VectorSet::from_rows(&rows).unwrap();
        // both seeds can land in one group; the best of several restarts must separate them
        let r = (0..8)
            .map(|seed| spherical_kmeans(&x, &KMeansParams::new(2, seed)).unwrap())
            .max_by(|a, b| {
                let oa = spherical_objective(&x, a.representatives()).unwrap();
                let ob = spherical_objective(&x, b.representatives()).unwrap();
                oa.total_cmp(&ob)
            })
            .unwrap();
        for i in 0..10 {
            assert_eq!(r.cluster_of(2 * i), r.cluster_of(0));
            assert_eq!(r.cluster_of(2 * i + 1), r.cluster_of(1));
        }
        assert_ne!(r.cluster_of(0), r.cluster_of(1));
    }

    #[test]
    fn shallow_fixed_seeds() {
        let x = set(&[&[2.0, 0.0], &[0.0, 2.0], &[1.9, 0.1]]);
        let r = shallow_kmeans_with_seeds(&x, &[0, 1]).unwrap();
        assert_eq!(r.assignments(), &[0, 1, 0]);
        assert_eq!(r.representatives().row(0), &[2.0, 0.0]);
    }

    #[test]
    fn shallow_seed_can_join_another_cluster() {
        // <[1,0],[2,0]> = 2 beats <[1,0],[1,0]> = 1
        let x = set(&[&[1.0, 0.0], &[2.0, 0.0]]);
        let r = shallow_kmeans_with_seeds(&x, &[0, 1]).unwrap();
        assert_eq!(r.assignments(), &[1, 1]);
        assert!(r.members()[0].is_empty());
    }

    #[test]
    fn from_members_rejects_overlap_and_gaps() {
        let reps = set(&[&[0.0], &[1.0]]);
        assert!(
            ClusteringResult::from_members(vec![vec![0], vec![0, 1]], reps.clone(), 2).is_err()
        );
        assert!(ClusteringResult::from_members(vec![vec![0], vec![]], reps.clone(), 2).is_err());
        assert!(ClusteringResult::from_members(vec![vec![0], vec![2]], reps.clone(), 2).is_err());
        assert!(ClusteringResult::from_members(vec![vec![1], vec![0]], reps, 2).is_ok());
    }

    #[test]
    fn kind_parses() {
        assert_eq!(
            "Spherical".parse::<ClusteringKind>().unwrap(),
            ClusteringKind::Spherical
        );
        assert!("tree".parse::<ClusteringKind>().is_err());
    }
}
