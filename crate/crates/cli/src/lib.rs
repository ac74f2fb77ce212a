//! `livf`: build, train and evaluate learnt-routing IVF indexes from the
//! command line.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use learnt_ivf::clustering::{default_num_clusters, run_clustering, ClusteringKind, KMeansParams};
use learnt_ivf::evaluation::{
    accuracy_sweep_with_truth, default_ell_grid, emit_report, emit_significance, headline_ells,
    mcnemar, topk_accuracy_with_truth, EvalRecord, GroundTruth, ReportFormat, SignificanceRecord,
};
use learnt_ivf::formats::{self, RouterModel};
use learnt_ivf::ivf::build_index;
use learnt_ivf::learning::{
    build_topk_training_pairs, train_linear_router, train_mlp_router, EpochLog, LossMode,
    SplitDataset, TrainConfig, TrainingPair,
};
use learnt_ivf::seed::derive_seed;
use learnt_ivf::synth::{generate, SyntheticConfig};
use learnt_ivf::{Error, Router, Vector, VectorSet};

pub mod config;

use config::{parse_list, Config};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn from_core(e: Error, context: Option<&Path>) -> Self {
        let code = match &e {
            Error::InvalidParam(_) => EXIT_USAGE,
            Error::NumericFailure(_) => EXIT_NUMERIC,
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => EXIT_USAGE,
            Error::Io { .. } => 1,
            _ => EXIT_DATA,
        };
        let message = match context {
            Some(p) => format!("{}: {e}", p.display()),
            None => e.to_string(),
        };
        CliError { code, message }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::from_core(e, None)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

trait Context<T> {
    fn at(self, path: &Path) -> Result<T, CliError>;
}

impl<T> Context<T> for learnt_ivf::Result<T> {
    fn at(self, path: &Path) -> Result<T, CliError> {
        self.map_err(|e| CliError::from_core(e, Some(path)))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "livf",
    version,
    about = "Clustering-based MIPS index with learnt routing"
)]
pub struct Cli {
    /// Flat key = value file; command-line flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded synthetic corpus (docs.lvec, queries.lvec).
    GenSynthetic(GenArgs),
    /// Convert a whitespace/comma separated text matrix to LVEC.
    Convert(ConvertArgs),
    /// Cluster documents and write an LIVF index.
    Build(BuildArgs),
    /// Label queries with their nearest-neighbour partitions and split 60/20/20.
    MakePairs(PairsArgs),
    /// Train a linear (default) or MLP router on a pairs directory.
    Train(TrainArgs),
    /// Sweep top-k accuracy over ell for the baseline and learnt routers.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    n_docs: Option<usize>,
    #[arg(long)]
    n_queries: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    blobs: Option<usize>,
    #[arg(long)]
    center_scale: Option<f64>,
    #[arg(long)]
    blob_scale: Option<f64>,
    #[arg(long)]
    anisotropy: Option<f64>,
    #[arg(long)]
    query_noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long)]
    docs: Option<PathBuf>,
    /// standard, spherical or shallow
    #[arg(long)]
    clustering: Option<String>,
    /// Number of partitions; defaults to ceil(sqrt(#docs)).
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PairsArgs {
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Label every partition holding one of the exact top-k documents.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Directory written by make-pairs.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Hidden width; trains an MLP router instead of a linear one.
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// top1 or topk
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    index: Option<PathBuf>,
    /// Pairs directory; its test split is evaluated.
    #[arg(long, conflicts_with = "queries")]
    pairs: Option<PathBuf>,
    /// Evaluate an explicit LVEC query file instead of a test split.
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Learnt router model; repeat to compare several.
    #[arg(long)]
    model: Vec<PathBuf>,
    /// Comma-separated k values.
    #[arg(long)]
    k: Option<String>,
    /// Comma-separated ell values; defaults to a 10-point grid.
    #[arg(long)]
    ell: Option<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    dataset: Option<String>,
    /// Label written into the report's clustering column.
    #[arg(long)]
    clustering: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return Ok(());
        }
        Err(e) => {
            let text = e.to_string();
            let text = text.strip_prefix("error: ").unwrap_or(&text);
            return Err(CliError::usage(text.trim_end()));
        }
    };
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match cli.command {
        Command::GenSynthetic(a) => gen_synthetic(a, &cfg),
        Command::Convert(a) => convert(a),
        Command::Build(a) => build(a, &cfg),
        Command::MakePairs(a) => make_pairs(a, &cfg),
        Command::Train(a) => train(a, &cfg),
        Command::Eval(a) => eval(a, &cfg),
    }
}

/// Caps rayon's worker count from `LIVF_THREADS` (0 or unset = automatic).
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("LIVF_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        CliError::usage(format!(
            "LIVF_THREADS must be a non-negative integer, got {raw:?}"
        ))
    })?;
    if n > 0 {
        // only fails if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

fn gen_synthetic(a: GenArgs, cfg: &Config) -> Result<(), CliError> {
    let seed = cfg.or(a.seed, "seed", 0)?;
    let mut sc = SyntheticConfig::new(
        cfg.require(a.n_docs, "n-docs")?,
        cfg.require(a.n_queries, "n-queries")?,
        cfg.require(a.dim, "dim")?,
        cfg.or(a.blobs, "blobs", 8)?,
        derive_seed(seed, "gen-synthetic"),
    );
    sc.center_scale = cfg.or(a.center_scale, "center-scale", sc.center_scale)?;
    sc.blob_scale = cfg.or(a.blob_scale, "blob-scale", sc.blob_scale)?;
    sc.anisotropy = cfg.or(a.anisotropy, "anisotropy", sc.anisotropy)?;
    sc.query_noise = cfg.or(a.query_noise, "query-noise", sc.query_noise)?;
    let out_dir: PathBuf = cfg.require(a.out_dir, "out-dir")?;
    create_dir(&out_dir)?;

    let data = generate(&sc)?;
    let docs = out_dir.join("docs.lvec");
    let queries = out_dir.join("queries.lvec");
    formats::write_vectors(&docs, &data.docs).at(&docs)?;
    formats::write_vectors(&queries, &data.queries).at(&queries)?;
    println!(
        "wrote {} docs to {} and {} queries to {}",
        data.docs.len(),
        docs.display(),
        data.queries.len(),
        queries.display()
    );
    Ok(())
}

fn convert(a: ConvertArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.input).map_err(|e| {
        CliError::from_core(
            Error::Io {
                path: a.input.clone(),
                source: e,
            },
            None,
        )
    })?;
    let set = formats::parse_text_matrix(&text).map_err(|e| CliError {
        code: EXIT_DATA,
        message: format!("{}: {e}", a.input.display()),
    })?;
    formats::write_vectors(&a.output, &set).at(&a.output)?;
    println!(
        "wrote {} vectors of dim {} to {}",
        set.len(),
        set.dim(),
        a.output.display()
    );
    Ok(())
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| {
        CliError::from_core(
            Error::Io {
                path: dir.to_path_buf(),
                source: e,
            },
            None,
        )
    })
}

fn build(a: BuildArgs, cfg: &Config) -> Result<(), CliError> {
    let docs_path: PathBuf = cfg.require(a.docs, "docs")?;
    let kind: ClusteringKind = cfg
        .or(a.clustering, "clustering", "standard".into())?
        .parse()?;
    let seed = cfg.or(a.seed, "seed", 0)?;
    let out: PathBuf = cfg.require(a.out, "out")?;

    let docs = formats::read_vectors(&docs_path).at(&docs_path)?;
    let clusters = cfg.or(a.clusters, "clusters", default_num_clusters(docs.len()))?;
    let mut params = KMeansParams::new(clusters, derive_seed(seed, "build"));
    params.max_iters = cfg.or(a.max_iters, "max-iters", params.max_iters)?;
    params.epsilon = cfg.or(a.epsilon, "epsilon", params.epsilon)?;

    let (clustering, objective) = run_clustering(kind, &docs, &params)?;
    let idx = build_index(docs, clustering)?;
    formats::write_index(&out, &idx).at(&out)?;
    let empty = idx
        .clustering()
        .members()
        .iter()
        .filter(|m| m.is_empty())
        .count();
    let label = match kind {
        ClusteringKind::Standard => "inertia",
        ClusteringKind::Spherical => "spherical_objective",
        ClusteringKind::Shallow => "inner_product_objective",
    };
    println!("clustering={kind} L={clusters} {label}={objective} empty_clusters={empty}");
    println!("wrote {}", out.display());
    Ok(())
}

fn split_paths(dir: &Path, split: &str) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{split}.lvec")),
        dir.join(format!("{split}.llab")),
    )
}

fn write_split(
    dir: &Path,
    name: &str,
    pairs: &[TrainingPair],
    clusters: usize,
) -> Result<(), CliError> {
    if pairs.is_empty() {
        return Err(CliError::usage(format!("{name} split is empty")));
    }
    let (qp, lp) = split_paths(dir, name);
    let rows: Vec<&[f32]> = pairs.iter().map(|p| p.query.as_slice()).collect();
    formats::write_vectors(&qp, &VectorSet::from_rows(&rows)?).at(&qp)?;
    let labels: Vec<Vec<bool>> = pairs.iter().map(|p| p.relevance.clone()).collect();
    formats::write_labels(&lp, &labels, clusters).at(&lp)?;
    Ok(())
}

fn read_split(dir: &Path, name: &str) -> Result<Vec<TrainingPair>, CliError> {
    let (qp, lp) = split_paths(dir, name);
    let queries = formats::read_vectors(&qp).at(&qp)?;
    let labels = formats::read_labels(&lp).at(&lp)?;
    if labels.len() != queries.len() {
        return Err(CliError {
            code: EXIT_DATA,
            message: format!(
                "{}: {} label rows for {} queries",
                lp.display(),
                labels.len(),
                queries.len()
            ),
        });
    }
    queries
        .rows()
        .zip(labels)
        .map(|(q, relevance)| {
            Ok(TrainingPair {
                query: Vector::new(q.to_vec())?,
                relevance,
            })
        })
        .collect()
}

fn make_pairs(a: PairsArgs, cfg: &Config) -> Result<(), CliError> {
    let index_path: PathBuf = cfg.require(a.index, "index")?;
    let queries_path: PathBuf = cfg.require(a.queries, "queries")?;
    let k = cfg.or(a.k, "k", 1)?;
    let seed = cfg.or(a.seed, "seed", 0)?;
    let out_dir: PathBuf = cfg.require(a.out_dir, "out-dir")?;

    let idx = formats::read_index(&index_path).at(&index_path)?;
    let queries = formats::read_vectors(&queries_path).at(&queries_path)?;
    let pairs = build_topk_training_pairs(&queries, &idx, k)?;
    let split = SplitDataset::from_pairs(&pairs, derive_seed(seed, "make-pairs"))?;
    create_dir(&out_dir)?;
    for (name, part) in [
        ("train", &split.train),
        ("val", &split.val),
        ("test", &split.test),
    ] {
        write_split(&out_dir, name, part, idx.num_clusters())?;
    }
    println!(
        "k={k} train={} val={} test={} L={}",
        split.train.len(),
        split.val.len(),
        split.test.len(),
        idx.num_clusters()
    );
    Ok(())
}

fn parse_loss(s: &str) -> Result<LossMode, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "top1" => Ok(LossMode::Top1),
        "topk" => Ok(LossMode::TopK),
        other => Err(CliError::usage(format!(
            "unknown loss {other:?} (expected top1 or topk)"
        ))),
    }
}

fn print_history(history: &[EpochLog]) {
    println!("epoch,train_loss,val_loss");
    for e in history {
        println!("{},{},{}", e.epoch, e.train_loss, e.val_loss);
    }
}

fn train(a: TrainArgs, cfg: &Config) -> Result<(), CliError> {
    let dir: PathBuf = cfg.require(a.pairs, "pairs")?;
    let out: PathBuf = cfg.require(a.out, "out")?;
    let defaults = TrainConfig::default();
    let tc = TrainConfig {
        learning_rate: cfg.or(a.learning_rate, "learning-rate", defaults.learning_rate)?,
        batch_size: cfg.or(a.batch_size, "batch-size", defaults.batch_size)?,
        max_epochs: cfg.or(a.epochs, "epochs", defaults.max_epochs)?,
        seed: derive_seed(cfg.or(a.seed, "seed", 0)?, "train"),
        loss_mode: parse_loss(&cfg.or(a.loss, "loss", "top1".to_string())?)?,
    };
    let hidden: Option<usize> = cfg.pick(a.hidden, "hidden")?;

    let split = SplitDataset {
        train: read_split(&dir, "train")?,
        val: read_split(&dir, "val")?,
        test: Vec::new(),
    };
    let clusters = split.train[0].relevance.len();
    let dim = split.train[0].query.dim();

    let (model, best_epoch) = match hidden {
        None => {
            let o = train_linear_router(&split, clusters, dim, &tc)?;
            print_history(&o.history);
            (RouterModel::Linear(o.model), o.best_epoch)
        }
        Some(h) => {
            let o = train_mlp_router(&split, clusters, dim, h, &tc)?;
            print_history(&o.history);
            (RouterModel::Mlp(o.model), o.best_epoch)
        }
    };
    formats::write_model(&out, &model).at(&out)?;
    println!("best_epoch={best_epoch}");
    println!("wrote {}", out.display());
    Ok(())
}

fn router_name(model: &RouterModel) -> String {
    match model {
        RouterModel::Linear(_) => "learnt".to_string(),
        RouterModel::Mlp(m) => format!("learnt-mlp{}", m.hidden()),
    }
}

fn significance_path(out: &Path, format: ReportFormat) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    out.with_file_name(format!("{stem}.significance.{}", format.extension()))
}

fn eval(a: EvalArgs, cfg: &Config) -> Result<(), CliError> {
    let index_path: PathBuf = cfg.require(a.index, "index")?;
    let out: PathBuf = cfg.require(a.out, "out")?;
    let format: ReportFormat = cfg.or(a.format, "format", "csv".to_string())?.parse()?;
    let dataset = cfg.or(a.dataset, "dataset", "dataset".to_string())?;
    let clustering = cfg.or(a.clustering, "clustering", "unspecified".to_string())?;
    let ks: Vec<usize> = parse_list(&cfg.or(a.k, "k", "1".to_string())?)?;
    if ks.is_empty() || ks.contains(&0) {
        return Err(CliError::usage("k values must be >= 1"));
    }

    let idx = formats::read_index(&index_path).at(&index_path)?;
    let ell_grid: Vec<usize> = match cfg.pick(a.ell, "ell")? {
        Some(list) => parse_list::<String>(&list)?
            .iter()
            .map(|s| {
                if s == "L" {
                    Ok(idx.num_clusters())
                } else {
                    s.parse()
                        .map_err(|_| CliError::usage(format!("bad ell {s:?}")))
                }
            })
            .collect::<Result<_, _>>()?,
        None => default_ell_grid(idx.num_clusters()),
    };

    let queries = match (a.queries, cfg.pick::<PathBuf>(a.pairs, "pairs")?) {
        (Some(q), _) => formats::read_vectors(&q).at(&q)?,
        (None, Some(dir)) => {
            let (qp, _) = split_paths(&dir, "test");
            formats::read_vectors(&qp).at(&qp)?
        }
        (None, None) => return Err(CliError::usage("eval needs --pairs or --queries")),
    };

    let mut routers: Vec<(String, Router)> = vec![("baseline".to_string(), idx.baseline_router())];
    let models: Vec<PathBuf> = if a.model.is_empty() {
        cfg.get::<PathBuf>("model")?.into_iter().collect()
    } else {
        a.model
    };
    for path in &models {
        let model = formats::read_model(path).at(path)?;
        let router = model.clone().into_router();
        if router.num_clusters() != idx.num_clusters() || router.dim() != idx.dim() {
            return Err(CliError {
                code: EXIT_DATA,
                message: format!(
                    "{}: model routes {} clusters of dim {}, index has {} of dim {}",
                    path.display(),
                    router.num_clusters(),
                    router.dim(),
                    idx.num_clusters(),
                    idx.dim()
                ),
            });
        }
        let mut name = router_name(&model);
        if routers.iter().any(|(n, _)| *n == name) {
            name = format!("{name}-{}", routers.len());
        }
        routers.push((name, router));
    }
    let named: Vec<(&str, &Router)> = routers.iter().map(|(n, r)| (n.as_str(), r)).collect();

    let mut records = Vec::new();
    for &k in &ks {
        let truth = GroundTruth::compute(idx.docs(), &queries, k)?;
        let table = accuracy_sweep_with_truth(&idx, &named, &queries, &truth, &ell_grid)?;
        for row in table.rows {
            records.push(EvalRecord {
                dataset: dataset.clone(),
                clustering: clustering.clone(),
                router: row.method,
                k,
                ell: row.ell,
                accuracy: row.accuracy,
            });
        }
    }
    emit_report(&records, &out, format).at(&out)?;
    println!("wrote {} rows to {}", records.len(), out.display());

    if routers.len() > 1 {
        let truth = GroundTruth::compute(idx.docs(), &queries, 1)?;
        let (lo, hi) = headline_ells(idx.num_clusters());
        let mut ells = vec![lo, hi];
        ells.dedup();
        let mut sig = Vec::new();
        for ell in ells {
            let base = topk_accuracy_with_truth(&idx, &routers[0].1, &queries, &truth, ell)?.hits();
            for (name, router) in &routers[1..] {
                let hits = topk_accuracy_with_truth(&idx, router, &queries, &truth, ell)?.hits();
                let t = mcnemar(&base, &hits)?;
                println!(
                    "mcnemar baseline vs {name} ell={ell}: b={} c={} statistic={} p={}",
                    t.b, t.c, t.statistic, t.p_value
                );
                sig.push(SignificanceRecord {
                    dataset: dataset.clone(),
                    clustering: clustering.clone(),
                    router_a: "baseline".into(),
                    router_b: name.clone(),
                    ell,
                    b: t.b,
                    c: t.c,
                    statistic: t.statistic,
                    p_value: t.p_value,
                    method: t.method,
                });
            }
        }
        let sp = significance_path(&out, format);
        emit_significance(&sig, &sp, format).at(&sp)?;
        println!("wrote {}", sp.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(
            CliError::from(Error::InvalidParam("x".into())).code,
            EXIT_USAGE
        );
        assert_eq!(
            CliError::from(Error::NumericFailure("x".into())).code,
            EXIT_NUMERIC
        );
        let fmt = Error::Format {
            kind: "LVEC",
            offset: 12,
            message: "bad".into(),
        };
        let e = CliError::from_core(fmt, Some(Path::new("a.lvec")));
        assert_eq!(e.code, EXIT_DATA);
        assert!(e.message.starts_with("a.lvec: ") && e.message.contains("byte offset 12"));
    }

    #[test]
    fn significance_file_sits_next_to_report() {
        let p = significance_path(Path::new("out/run.csv"), ReportFormat::Csv);
        assert_eq!(p, Path::new("out/run.significance.csv"));
        let p = significance_path(Path::new("r"), ReportFormat::Json);
        assert_eq!(p, Path::new("r.significance.json"));
    }

    #[test]
    fn loss_names() {
        assert_eq!(parse_loss("TopK").unwrap(), LossMode::TopK);
        assert_eq!(parse_loss("top1").unwrap(), LossMode::Top1);
        assert_eq!(parse_loss("top5").unwrap_err().code, EXIT_USAGE);
    }
}
