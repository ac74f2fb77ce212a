//! Seeded synthetic corpora: documents from a mixture of anisotropic
//! Gaussian blobs, queries as noisy copies of random documents.

use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::seed;
use crate::vectorspace::VectorSet;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_docs: usize,
    pub n_queries: usize,
    pub dim: usize,
    pub n_blobs: usize,
    pub seed: u64,
    /// Standard deviation of blob centres around the origin, per coordinate.
    pub center_scale: f64,
    /// Typical within-blob standard deviation.
    pub blob_scale: f64,
    /// Per-axis scales of a blob are drawn log-uniformly from
    /// `[blob_scale / anisotropy, blob_scale * anisotropy]`; 1 gives
    /// isotropic blobs.
    pub anisotropy: f64,
    /// Standard deviation of the Gaussian noise added to a document to make
    /// a query.
    pub query_noise: f64,
}

impl SyntheticConfig {
    pub fn new(n_docs: usize, n_queries: usize, dim: usize, n_blobs: usize, seed: u64) -> Self {
        SyntheticConfig {
            n_docs,
            n_queries,
            dim,
            n_blobs,
            seed,
            center_scale: 1.0,
            blob_scale: 0.5,
            anisotropy: 3.0,
            query_noise: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub docs: VectorSet,
    pub queries: VectorSet,
    /// Blob each document was drawn from.
    pub doc_blobs: Vec<usize>,
    /// Document each query perturbs.
    pub query_sources: Vec<usize>,
}

struct Blob {
    center: Vec<f64>,
    /// `dim x dim` row-major mixing matrix: a random rotation-like basis
    /// with per-axis scales.
    mix: Vec<f64>,
}

pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticData> {
    if cfg.n_docs == 0 || cfg.n_queries == 0 || cfg.dim == 0 || cfg.n_blobs == 0 {
        return Err(Error::InvalidParam(
            "synthetic sizes must be positive".into(),
        ));
    }
    let scales = [cfg.center_scale, cfg.blob_scale, cfg.query_noise];
    if scales.iter().any(|s| !s.is_finite() || *s < 0.0)
        || cfg.anisotropy.is_nan()
        || cfg.anisotropy < 1.0
    {
        return Err(Error::InvalidParam(
            "scales must be finite and nonnegative, anisotropy >= 1".into(),
        ));
    }
    let dim = cfg.dim;
    let mut rng = seed::rng(cfg.seed);
    let log_a = cfg.anisotropy.ln();

    let blobs: Vec<Blob> = (0..cfg.n_blobs)
        .map(|_| {
            let center = (0..dim)
                .map(|_| cfg.center_scale * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let axis: Vec<f64> = (0..dim)
                .map(|_| cfg.blob_scale * rng.random_range(-log_a..=log_a).exp())
                .collect();
            let inv_sqrt_dim = 1.0 / (dim as f64).sqrt();
            let mix = (0..dim * dim)
                .map(|i| axis[i % dim] * inv_sqrt_dim * rng.sample::<f64, _>(StandardNormal))
                .collect();
            Blob { center, mix }
        })
        .collect();

    let mut docs = Vec::with_capacity(cfg.n_docs * dim);
    let mut doc_blobs = Vec::with_capacity(cfg.n_docs);
    let mut z = vec![0.0f64; dim];
    for _ in 0..cfg.n_docs {
        let b = rng.random_range(0..cfg.n_blobs);
        let blob = &blobs[b];
        z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
        for (row, c) in blob.mix.chunks_exact(dim).zip(&blob.center) {
            let offset: f64 = row.iter().zip(&z).map(|(m, z)| m * z).sum();
            docs.push((c + offset) as f32);
        }
        doc_blobs.push(b);
    }
    let docs = VectorSet::new(dim, docs)?;

    let noise =
        Normal::new(0.0, cfg.query_noise).map_err(|e| Error::InvalidParam(e.to_string()))?;
    let mut queries = Vec::with_capacity(cfg.n_queries * dim);
    let mut query_sources = Vec::with_capacity(cfg.n_queries);
    for _ in 0..cfg.n_queries {
        let src = rng.random_range(0..cfg.n_docs);
        for &v in docs.row(src) {
            queries.push((f64::from(v) + noise.sample(&mut rng)) as f32);
        }
        query_sources.push(src);
    }

    Ok(SyntheticData {
        docs,
        queries: VectorSet::new(dim, queries)?,
        doc_blobs,
        query_sources,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_shaped() {
        let cfg = SyntheticConfig::new(50, 7, 3, 4, 11);
        let a = generate(&cfg).unwrap();
        assert_eq!(a, generate(&cfg).unwrap());
        assert_eq!((a.docs.len(), a.docs.dim()), (50, 3));
        assert_eq!(a.queries.len(), 7);
        assert!(a.doc_blobs.iter().all(|&b| b < 4));
        assert_ne!(a, generate(&SyntheticConfig { seed: 12, ..cfg }).unwrap());
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(generate(&SyntheticConfig::new(0, 1, 2, 1, 0)).is_err());
        let mut cfg = SyntheticConfig::new(10, 1, 2, 1, 0);
        cfg.anisotropy = 0.5;
        assert!(generate(&cfg).is_err());
    }
}
