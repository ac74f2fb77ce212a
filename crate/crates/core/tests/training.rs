use learnt_ivf::clustering::{standard_kmeans, KMeansParams};
use learnt_ivf::ivf::build_index;
use learnt_ivf::learning::{
    adam_step, build_training_pairs, train_linear_router, train_mlp_router, AdamState, Example,
    LinearParams, MlpParams, RouterParams, SplitDataset, TrainConfig,
};
use learnt_ivf::seed::rng;
use learnt_ivf::synth::{generate, SyntheticConfig};
use rand::Rng as _;

fn blob_split(seed: u64) -> (SplitDataset, usize) {
    let data = generate(&SyntheticConfig::new(1_500, 600, 16, 8, seed)).unwrap();
    let res = standard_kmeans(&data.docs, &KMeansParams::new(8, seed)).unwrap();
    let idx = build_index(data.docs, res).unwrap();
    let pairs = build_training_pairs(&data.queries, &idx).unwrap();
    (
        SplitDataset::from_pairs(&pairs, seed).unwrap(),
        idx.num_clusters(),
    )
}

fn cfg(seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: 1e-2,
        batch_size: 64,
        max_epochs: 15,
        seed,
        ..TrainConfig::default()
    }
}

#[test]
fn training_is_deterministic_and_makes_progress() {
    let (split, l) = blob_split(21);
    let a = train_linear_router(&split, l, 16, &cfg(4)).unwrap();
    let b = train_linear_router(&split, l, 16, &cfg(4)).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.history, b.history);
    assert!(a.best_val_loss() <= a.history[0].val_loss);
    assert!(
        a.best_val_loss() < a.history[0].val_loss,
        "no improvement in 15 epochs"
    );
    assert_ne!(
        train_linear_router(&split, l, 16, &cfg(5)).unwrap().model,
        a.model
    );

    let m = train_mlp_router(&split, l, 16, 12, &cfg(4)).unwrap();
    assert_eq!(
        m.model,
        train_mlp_router(&split, l, 16, 12, &cfg(4)).unwrap().model
    );
    assert!(m.best_val_loss() <= m.history[0].val_loss);
}

#[test]
fn adam_reduces_loss_on_random_problems() {
    // across many small problems, a few Adam steps should lower the loss
    // almost always
    let mut r = rng(8);
    let mut lowered = 0;
    for trial in 0..40 {
        let (l, n) = (r.random_range(2..=6), r.random_range(2..=5));
        let queries: Vec<Vec<f32>> = (0..16)
            .map(|_| (0..n).map(|_| r.random_range(-1.0f32..1.0)).collect())
            .collect();
        let targets: Vec<Vec<f64>> = (0..16)
            .map(|_| {
                let hot = r.random_range(0..l);
                (0..l).map(|j| if j == hot { 1.0 } else { 0.0 }).collect()
            })
            .collect();
        let batch: Vec<Example<'_>> = queries
            .iter()
            .zip(&targets)
            .map(|(q, t)| Example {
                query: q,
                target: t,
            })
            .collect();

        let mut lin = LinearParams::init(l, n, &mut rng(trial));
        let mut mlp = MlpParams::init(l, n, 4, &mut rng(trial));
        let before = (lin.loss(&batch), mlp.loss(&batch));
        for p in [&mut lin as &mut dyn RouterParams, &mut mlp] {
            let mut state = AdamState::new(p.params().len());
            let mut grad = vec![0.0; p.params().len()];
            for _ in 0..20 {
                p.loss_and_grad(&batch, &mut grad);
                adam_step(p.params_mut(), &grad, &mut state, 1e-2);
            }
        }
        lowered +=
            usize::from(lin.loss(&batch) < before.0) + usize::from(mlp.loss(&batch) < before.1);
    }
    assert!(lowered >= 78, "loss fell in only {lowered}/80 runs");
}
