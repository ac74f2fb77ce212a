//! Mini-batch Adam training of routers with best-on-validation selection.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::learning::adam::{adam_step, AdamState};
use crate::learning::loss::topk_weights;
use crate::learning::model::{
    Example, LinearParams, LinearRouterModel, MlpParams, MlpRouterModel, RouterParams,
};
use crate::learning::pairs::{SplitDataset, TrainingPair};
use crate::seed::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossMode {
    /// Plain cross-entropy against a one-hot label.
    Top1,
    /// Weighted cross-entropy with fresh `gamma ~ U[0,1]` per batch entry.
    /// Labels may mark several clusters.
    TopK,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub loss_mode: LossMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            batch_size: 512,
            max_epochs: 100,
            seed: 0,
            loss_mode: LossMode::Top1,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParam("learning rate must be positive".into()));
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::InvalidParam(
                "batch size and epoch count must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome<M> {
    pub model: M,
    /// 1-based epoch whose weights were kept.
    pub best_epoch: usize,
    pub history: Vec<EpochLog>,
}

impl<M> TrainOutcome<M> {
    pub fn best_val_loss(&self) -> f64 {
        self.history[self.best_epoch - 1].val_loss
    }
}

pub fn train_linear_router(
    split: &SplitDataset,
    clusters: usize,
    dim: usize,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<LinearRouterModel>> {
    check_shapes(split, clusters, dim)?;
    cfg.validate()?;
    let params = LinearParams::init(
        clusters,
        dim,
        &mut seed::rng(seed::derive_seed(cfg.seed, "init")),
    );
    let (best, best_epoch, history) = fit(params, split, cfg)?;
    Ok(TrainOutcome {
        model: export(&best, LinearParams::to_model)?,
        best_epoch,
        history,
    })
}

pub fn train_mlp_router(
    split: &SplitDataset,
    clusters: usize,
    dim: usize,
    hidden: usize,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<MlpRouterModel>> {
    if hidden == 0 {
        return Err(Error::InvalidParam(
            "hidden layer must have >= 1 unit".into(),
        ));
    }
    check_shapes(split, clusters, dim)?;
    cfg.validate()?;
    let params = MlpParams::init(
        clusters,
        dim,
        hidden,
        &mut seed::rng(seed::derive_seed(cfg.seed, "init")),
    );
    let (best, best_epoch, history) = fit(params, split, cfg)?;
    Ok(TrainOutcome {
        model: export(&best, MlpParams::to_model)?,
        best_epoch,
        history,
    })
}

fn check_shapes(split: &SplitDataset, clusters: usize, dim: usize) -> Result<()> {
    if split.train.is_empty() {
        return Err(Error::InvalidParam("training split is empty".into()));
    }
    if split.val.is_empty() {
        return Err(Error::InvalidParam("validation split is empty".into()));
    }
    if clusters == 0 {
        return Err(Error::InvalidParam(
            "number of clusters must be >= 1".into(),
        ));
    }
    for p in split.train.iter().chain(&split.val) {
        if p.query.dim() != dim {
            return Err(Error::dim(dim, p.query.dim()));
        }
        if p.relevance.len() != clusters {
            return Err(Error::InvalidLabel(format!(
                "label has {} entries for {clusters} clusters",
                p.relevance.len()
            )));
        }
    }
    Ok(())
}

fn one_hot_target(p: &TrainingPair) -> Result<Vec<f64>> {
    let j = p.label()?;
    let mut t = vec![0.0; p.relevance.len()];
    t[j] = 1.0;
    Ok(t)
}

fn topk_target(p: &TrainingPair, rng: &mut Rng) -> Result<Vec<f64>> {
    let gamma: Vec<f64> = (0..p.relevance.len())
        .map(|_| rng.random::<f64>())
        .collect();
    topk_weights(&p.relevance, &gamma)
}

fn targets(pairs: &[&TrainingPair], mode: LossMode, rng: &mut Rng) -> Result<Vec<Vec<f64>>> {
    pairs
        .iter()
        .map(|p| match mode {
            LossMode::Top1 => one_hot_target(p),
            LossMode::TopK => topk_target(p, rng),
        })
        .collect()
}

fn examples<'a>(pairs: &[&'a TrainingPair], targets: &'a [Vec<f64>]) -> Vec<Example<'a>> {
    pairs
        .iter()
        .zip(targets)
        .map(|(p, t)| Example {
            query: p.query.as_slice(),
            target: t,
        })
        .collect()
}

/// Stored weights are `f32`; parameters that overflow it mean training diverged.
fn export<P: RouterParams, M>(params: &P, to_model: impl Fn(&P) -> Result<M>) -> Result<M> {
    if params.params().iter().any(|&w| !(w as f32).is_finite()) {
        return Err(Error::NumericFailure("trained weights overflow f32".into()));
    }
    to_model(params)
}

fn fit<P: RouterParams + Clone>(
    mut params: P,
    split: &SplitDataset,
    cfg: &TrainConfig,
) -> Result<(P, usize, Vec<EpochLog>)> {
    let mut shuffle_rng = seed::rng(seed::derive_seed(cfg.seed, "shuffle"));
    let mut gamma_rng = seed::rng(seed::derive_seed(cfg.seed, "gamma"));

    // validation targets are drawn once so epochs are compared on the same objective
    let val_refs: Vec<&TrainingPair> = split.val.iter().collect();
    let val_targets = targets(
        &val_refs,
        cfg.loss_mode,
        &mut seed::rng(seed::derive_seed(cfg.seed, "val-gamma")),
    )?;
    let val_examples = examples(&val_refs, &val_targets);

    let mut adam = AdamState::new(params.params().len());
    let mut grad = vec![0.0; params.params().len()];
    let mut order: Vec<usize> = (0..split.train.len()).collect();
    let mut history = Vec::with_capacity(cfg.max_epochs);
    let mut best: Option<(P, usize, f64)> = None;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut weighted = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&TrainingPair> = chunk.iter().map(|&i| &split.train[i]).collect();
            let batch_targets = targets(&batch, cfg.loss_mode, &mut gamma_rng)?;
            let loss = params.loss_and_grad(&examples(&batch, &batch_targets), &mut grad);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NumericFailure(format!(
                    "non-finite loss or gradient in epoch {epoch}"
                )));
            }
            weighted += loss * chunk.len() as f64;
            adam_step(params.params_mut(), &grad, &mut adam, cfg.learning_rate);
        }
        let train_loss = weighted / split.train.len() as f64;
        let val_loss = params.loss(&val_examples);
        if !val_loss.is_finite() {
            return Err(Error::NumericFailure(format!(
                "non-finite validation loss in epoch {epoch}"
            )));
        }
        history.push(EpochLog {
            epoch,
            train_loss,
            val_loss,
        });
        if best.as_ref().is_none_or(|(_, _, b)| val_loss < *b) {
            best = Some((params.clone(), epoch, val_loss));
        }
    }
    let (best, best_epoch, _) = best.expect("max_epochs >= 1");
    Ok((best, best_epoch, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::loss::softmax;
    use crate::vectorspace::Vector;

    fn pair(q: &[f32], rel: &[bool]) -> TrainingPair {
        TrainingPair {
            query: Vector::new(q.to_vec()).unwrap(),
            relevance: rel.to_vec(),
        }
    }

    #[test]
    fn separable_singleton_converges() {
        let p = pair(&[1.0, -0.5, 0.25], &[false, true]);
        let split = SplitDataset {
            train: vec![p.clone()],
            val: vec![p.clone()],
            test: vec![],
        };
        let cfg = TrainConfig {
            learning_rate: 0.05,
            max_epochs: 400,
            ..TrainConfig::default()
        };
        let out = train_linear_router(&split, 2, 3, &cfg).unwrap();
        let probs = softmax(&out.model.scores(p.query.as_slice()));
        assert!(probs[1] > 0.99, "{probs:?}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = pair(&[1.0, 0.0], &[true, false]);
        let split = SplitDataset {
            train: vec![p.clone()],
            val: vec![p.clone()],
            test: vec![],
        };
        assert!(train_linear_router(&split, 2, 3, &TrainConfig::default()).is_err());
        assert!(train_linear_router(&split, 3, 2, &TrainConfig::default()).is_err());
        assert!(train_mlp_router(&split, 2, 2, 0, &TrainConfig::default()).is_err());
        let cfg = TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        };
        assert!(train_linear_router(&split, 2, 2, &cfg).is_err());
        let multi = SplitDataset {
            train: vec![pair(&[1.0, 0.0], &[true, true])],
            val: vec![p],
            test: vec![],
        };
        assert!(matches!(
            train_linear_router(&multi, 2, 2, &TrainConfig::default()),
            Err(Error::InvalidLabel(_))
        ));
        let cfg = TrainConfig {
            loss_mode: LossMode::TopK,
            max_epochs: 2,
            ..TrainConfig::default()
        };
        assert!(train_linear_router(&multi, 2, 2, &cfg).is_ok());
    }

    #[test]
    fn huge_learning_rate_is_still_finite_or_reported() {
        let p = pair(&[1e30, -1e30], &[true, false]);
        let split = SplitDataset {
            train: vec![p.clone()],
            val: vec![p],
            test: vec![],
        };
        let cfg = TrainConfig {
            learning_rate: 1e300,
            max_epochs: 3,
            ..TrainConfig::default()
        };
        match train_linear_router(&split, 2, 2, &cfg) {
            Ok(out) => assert!(out.history.iter().all(|e| e.val_loss.is_finite())),
            Err(e) => assert!(matches!(e, Error::NumericFailure(_))),
        }
    }
}
