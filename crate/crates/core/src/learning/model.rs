//! Router models: exported `f32` forms used for routing, and the `f64`
//! parameter vectors they are trained in.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::learning::loss::{grad_scores, weighted_ce};
use crate::seed::Rng;
use crate::vectorspace::{dot_unchecked, VectorSet};

/// Linear router `s = W q` with `W` of shape `L x n`, no bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRouterModel {
    weights: VectorSet,
}

impl LinearRouterModel {
    pub fn new(weights: VectorSet) -> Self {
        LinearRouterModel { weights }
    }

    pub fn weights(&self) -> &VectorSet {
        &self.weights
    }

    pub fn num_clusters(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.weights.dim()
    }

    pub fn param_count(&self) -> usize {
        self.num_clusters() * self.dim()
    }

    pub fn scores(&self, q: &[f32]) -> Vec<f64> {
        self.weights
            .rows()
            .map(|row| dot_unchecked(row, q))
            .collect()
    }
}

/// One-hidden-layer router `s = W2 relu(W1 q + b1) + b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpRouterModel {
    w1: VectorSet,
    b1: Vec<f32>,
    w2: VectorSet,
    b2: Vec<f32>,
}

impl MlpRouterModel {
    /// `w1` is `h x n`, `w2` is `L x h`.
    pub fn new(w1: VectorSet, b1: Vec<f32>, w2: VectorSet, b2: Vec<f32>) -> Result<Self> {
        if b1.len() != w1.len() {
            return Err(Error::dim(w1.len(), b1.len()));
        }
        if w2.dim() != w1.len() {
            return Err(Error::dim(w1.len(), w2.dim()));
        }
        if b2.len() != w2.len() {
            return Err(Error::dim(w2.len(), b2.len()));
        }
        if b1.iter().chain(&b2).any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput("non-finite bias".into()));
        }
        Ok(MlpRouterModel { w1, b1, w2, b2 })
    }

    pub fn num_clusters(&self) -> usize {
        self.w2.len()
    }

    pub fn dim(&self) -> usize {
        self.w1.dim()
    }

    pub fn hidden(&self) -> usize {
        self.w1.len()
    }

    pub fn parts(&self) -> (&VectorSet, &[f32], &VectorSet, &[f32]) {
        (&self.w1, &self.b1, &self.w2, &self.b2)
    }

    pub fn param_count(&self) -> usize {
        mlp_param_count(self.dim(), self.hidden(), self.num_clusters())
    }

    pub fn scores(&self, q: &[f32]) -> Vec<f64> {
        let hidden: Vec<f64> = self
            .w1
            .rows()
            .zip(&self.b1)
            .map(|(row, &b)| (dot_unchecked(row, q) + f64::from(b)).max(0.0))
            .collect();
        self.w2
            .rows()
            .zip(&self.b2)
            .map(|(row, &b)| {
                row.iter()
                    .zip(&hidden)
                    .map(|(&w, &a)| f64::from(w) * a)
                    .sum::<f64>()
                    + f64::from(b)
            })
            .collect()
    }
}

/// `h*n + h + L*h + L`.
pub fn mlp_param_count(n: usize, h: usize, l: usize) -> usize {
    h * n + h + l * h + l
}

/// A query with its target distribution over clusters.
#[derive(Debug, Clone, Copy)]
pub struct Example<'a> {
    pub query: &'a [f32],
    pub target: &'a [f64],
}

/// Flat `f64` parameters with a mean weighted cross-entropy objective.
pub trait RouterParams {
    fn params(&self) -> &[f64];
    fn params_mut(&mut self) -> &mut [f64];
    fn scores(&self, q: &[f32]) -> Vec<f64>;

    /// Mean loss over `batch` and its gradient, accumulated into `grad`
    /// (which is zeroed first).
    fn loss_and_grad(&self, batch: &[Example<'_>], grad: &mut [f64]) -> f64;

    fn loss(&self, batch: &[Example<'_>]) -> f64 {
        let total: f64 = batch
            .iter()
            .map(|ex| weighted_ce(&self.scores(ex.query), ex.target))
            .sum();
        total / batch.len() as f64
    }
}

fn uniform_init(rng: &mut Rng, len: usize, fan_in: usize) -> Vec<f64> {
    let bound = 1.0 / (fan_in as f64).sqrt();
    (0..len).map(|_| rng.random_range(-bound..=bound)).collect()
}

fn to_f32(v: &[f64]) -> Vec<f32> {
    v.iter().map(|&x| x as f32).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearParams {
    clusters: usize,
    dim: usize,
    w: Vec<f64>,
}

impl LinearParams {
    /// Uniform in `[-1/sqrt(n), 1/sqrt(n)]`.
    pub fn init(clusters: usize, dim: usize, rng: &mut Rng) -> Self {
        LinearParams {
            clusters,
            dim,
            w: uniform_init(rng, clusters * dim, dim),
        }
    }

    pub fn from_flat(clusters: usize, dim: usize, w: Vec<f64>) -> Result<Self> {
        if w.len() != clusters * dim {
            return Err(Error::dim(clusters * dim, w.len()));
        }
        Ok(LinearParams { clusters, dim, w })
    }

    pub fn to_model(&self) -> Result<LinearRouterModel> {
        Ok(LinearRouterModel::new(VectorSet::new(
            self.dim,
            to_f32(&self.w),
        )?))
    }
}

impl RouterParams for LinearParams {
    fn params(&self) -> &[f64] {
        &self.w
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.w
    }

    fn scores(&self, q: &[f32]) -> Vec<f64> {
        self.w
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(q).map(|(&w, &x)| w * f64::from(x)).sum())
            .collect()
    }

    fn loss_and_grad(&self, batch: &[Example<'_>], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let inv_n = 1.0 / batch.len() as f64;
        let mut total = 0.0;
        for ex in batch {
            let s = self.scores(ex.query);
            total += weighted_ce(&s, ex.target);
            for (ds, grow) in grad_scores(&s, ex.target)
                .iter()
                .zip(grad.chunks_exact_mut(self.dim))
            {
                let ds = ds * inv_n;
                for (g, &x) in grow.iter_mut().zip(ex.query) {
                    *g += ds * f64::from(x);
                }
            }
        }
        total * inv_n
    }
}

/// Flat layout: `W1 (h x n) | b1 (h) | W2 (L x h) | b2 (L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    clusters: usize,
    dim: usize,
    hidden: usize,
    theta: Vec<f64>,
}

impl MlpParams {
    /// Weights uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, zero biases.
    pub fn init(clusters: usize, dim: usize, hidden: usize, rng: &mut Rng) -> Self {
        let mut theta = uniform_init(rng, hidden * dim, dim);
        theta.extend(std::iter::repeat_n(0.0, hidden));
        theta.extend(uniform_init(rng, clusters * hidden, hidden));
        theta.extend(std::iter::repeat_n(0.0, clusters));
        MlpParams {
            clusters,
            dim,
            hidden,
            theta,
        }
    }

    pub fn from_flat(clusters: usize, dim: usize, hidden: usize, theta: Vec<f64>) -> Result<Self> {
        let expected = mlp_param_count(dim, hidden, clusters);
        if theta.len() != expected {
            return Err(Error::dim(expected, theta.len()));
        }
        Ok(MlpParams {
            clusters,
            dim,
            hidden,
            theta,
        })
    }

    fn offsets(&self) -> [usize; 4] {
        let b1 = self.hidden * self.dim;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.clusters * self.hidden;
        [0, b1, w2, b2]
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        let [_, b1, w2, b2] = self.offsets();
        let (w1, rest) = self.theta.split_at(b1);
        let (bias1, rest) = rest.split_at(w2 - b1);
        let (weights2, bias2) = rest.split_at(b2 - w2);
        (w1, bias1, weights2, bias2)
    }

    /// Pre-activations of the hidden layer, then output scores.
    fn forward(&self, q: &[f32]) -> (Vec<f64>, Vec<f64>) {
        let (w1, b1, w2, b2) = self.split();
        let pre: Vec<f64> = w1
            .chunks_exact(self.dim)
            .zip(b1)
            .map(|(row, &b)| {
                row.iter()
                    .zip(q)
                    .map(|(&w, &x)| w * f64::from(x))
                    .sum::<f64>()
                    + b
            })
            .collect();
        let act: Vec<f64> = pre.iter().map(|&z| z.max(0.0)).collect();
        let out = w2
            .chunks_exact(self.hidden)
            .zip(b2)
            .map(|(row, &b)| row.iter().zip(&act).map(|(w, a)| w * a).sum::<f64>() + b)
            .collect();
        (pre, out)
    }

    pub fn to_model(&self) -> Result<MlpRouterModel> {
        let (w1, b1, w2, b2) = self.split();
        MlpRouterModel::new(
            VectorSet::new(self.dim, to_f32(w1))?,
            to_f32(b1),
            VectorSet::new(self.hidden, to_f32(w2))?,
            to_f32(b2),
        )
    }
}

impl RouterParams for MlpParams {
    fn params(&self) -> &[f64] {
        &self.theta
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    fn scores(&self, q: &[f32]) -> Vec<f64> {
        self.forward(q).1
    }

    fn loss_and_grad(&self, batch: &[Example<'_>], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let [_, o_b1, o_w2, o_b2] = self.offsets();
        let (_, _, w2, _) = self.split();
        let (g_w1, rest) = grad.split_at_mut(o_b1);
        let (g_b1, rest) = rest.split_at_mut(o_w2 - o_b1);
        let (g_w2, g_b2) = rest.split_at_mut(o_b2 - o_w2);

        let inv_n = 1.0 / batch.len() as f64;
        let mut total = 0.0;
        let mut d_act = vec![0.0; self.hidden];
        for ex in batch {
            let (pre, s) = self.forward(ex.query);
            total += weighted_ce(&s, ex.target);
            let ds: Vec<f64> = grad_scores(&s, ex.target)
                .into_iter()
                .map(|g| g * inv_n)
                .collect();

            d_act.iter_mut().for_each(|d| *d = 0.0);
            for (((&d, g_row), w_row), gb) in ds
                .iter()
                .zip(g_w2.chunks_exact_mut(self.hidden))
                .zip(w2.chunks_exact(self.hidden))
                .zip(g_b2.iter_mut())
            {
                *gb += d;
                for (((g, &z), &w), da) in
                    g_row.iter_mut().zip(&pre).zip(w_row).zip(d_act.iter_mut())
                {
                    *g += d * z.max(0.0);
                    *da += d * w;
                }
            }
            for (((&z, &da), g_row), gb) in pre
                .iter()
                .zip(&d_act)
                .zip(g_w1.chunks_exact_mut(self.dim))
                .zip(g_b1.iter_mut())
            {
                if z <= 0.0 {
                    continue;
                }
                *gb += da;
                for (g, &x) in g_row.iter_mut().zip(ex.query) {
                    *g += da * f64::from(x);
                }
            }
        }
        total * inv_n
    }
}
