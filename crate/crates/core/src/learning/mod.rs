//! Learning the routing function.
//!
//! Queries are paired with the partitions containing their exact nearest
//! neighbours, and a router is fit to rank those partitions first under a
//! softmax cross-entropy objective optimised with Adam.

mod adam;
mod loss;
mod model;
mod pairs;
mod train;

pub use adam::{adam_step, AdamState};
pub use loss::{
    ce_loss, ce_loss_mean, grad_scores, log_softmax, softmax, topk_ce_loss, topk_weights,
    weighted_ce,
};
pub use model::{
    mlp_param_count, Example, LinearParams, LinearRouterModel, MlpParams, MlpRouterModel,
    RouterParams,
};
pub use pairs::{
    build_topk_training_pairs, build_training_pairs, split_dataset, split_sizes, SplitDataset,
    TrainingPair,
};
pub use train::{
    train_linear_router, train_mlp_router, EpochLog, LossMode, TrainConfig, TrainOutcome,
};
