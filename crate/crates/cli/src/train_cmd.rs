//! `train` subcommand: one run, one output directory.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::SeedableRng;
use serde::Serialize;
use signgraph::graph::Graph;
use signgraph::io::write_edge_list;
use signgraph::metrics::{FinalStats, RunRecord};
use signgraph::model::{
    prob_decode, sign_decode, train, ArchitectureSpec, Checkpoint, LossMask, Model,
    OptimizerKind, TrainConfig,
};

use crate::config::{build_spec, read_features, ExperimentDoc, GraphSource};

#[derive(Args)]
pub struct TrainArgs {
    /// Experiment JSON; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Graph file path or generator spec (grid:3,3 | chain:6x10 | star:5)
    #[arg(long)]
    graph: Option<String>,
    /// Architecture: gae, dgae, 2gae, 4gae, cgae
    #[arg(long)]
    arch: Option<String>,
    /// Hidden width; defaults to 2*h2
    #[arg(long)]
    h1: Option<usize>,
    /// Latent width
    #[arg(long)]
    h2: Option<usize>,
    #[arg(long)]
    normalize_adjacency: bool,
    /// Headerless CSV of node features; defaults to the one-hot identity
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// adam or gd
    #[arg(long)]
    optimizer: Option<String>,
    /// all or offdiag
    #[arg(long)]
    loss_mask: Option<String>,
    #[arg(long)]
    record_every: Option<usize>,
    /// Run directory for checkpoint, metrics, summary, and reconstructions
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct Summary<'a> {
    architecture: String,
    spec: &'a ArchitectureSpec,
    learning_rate: f64,
    lambda: f64,
    epochs: usize,
    seed: u64,
    graph_nodes: usize,
    graph_edges: usize,
    epochs_run: usize,
    diverged: bool,
    faithful: bool,
    final_stats: &'a FinalStats,
    prob_decode_seed: u64,
}

pub struct ResolvedRun {
    pub graph: Graph,
    pub spec: ArchitectureSpec,
    pub train_cfg: TrainConfig,
    pub features: Option<nalgebra::DMatrix<f64>>,
}

pub fn resolve(
    doc: ExperimentDoc,
    graph: Option<&str>,
    arch: Option<&str>,
    h1: Option<usize>,
    h2: Option<usize>,
    normalize: bool,
    features: Option<&PathBuf>,
) -> Result<ResolvedRun> {
    let source = match graph {
        Some(text) => GraphSource::parse(text)?,
        None => doc.graph.clone().context("no graph given (flag --graph or config field)")?,
    };
    let arch = arch
        .map(str::to_owned)
        .or(doc.arch.clone())
        .context("no architecture given (flag --arch or config field)")?;
    let h2 = h2.or(doc.h2).context("no latent width given (flag --h2 or config field)")?;
    let h1 = h1.or(doc.h1);
    let spec = build_spec(&arch, h1, h2, normalize || doc.normalize_adjacency)?;
    let features = match features.or(doc.features.as_ref()) {
        Some(path) => Some(read_features(path)?),
        None => None,
    };
    Ok(ResolvedRun {
        graph: source.load()?,
        spec,
        train_cfg: doc.train.unwrap_or_default(),
        features,
    })
}

pub fn run(args: TrainArgs) -> Result<i32> {
    let doc = match &args.config {
        Some(path) => ExperimentDoc::load(path)?,
        None => ExperimentDoc::default(),
    };
    let mut resolved = resolve(
        doc,
        args.graph.as_deref(),
        args.arch.as_deref(),
        args.h1,
        args.h2,
        args.normalize_adjacency,
        args.features.as_ref(),
    )?;
    let cfg = &mut resolved.train_cfg;
    if let Some(epochs) = args.epochs {
        cfg.epochs = epochs;
    }
    if let Some(lr) = args.lr {
        cfg.learning_rate = lr;
    }
    if let Some(lambda) = args.lambda {
        cfg.lambda = lambda;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(opt) = &args.optimizer {
        cfg.optimizer = match opt.as_str() {
            "adam" => OptimizerKind::adam(),
            "gd" => OptimizerKind::PlainGd,
            other => bail!("unknown optimizer {other:?} (expected adam or gd)"),
        };
    }
    if let Some(mask) = &args.loss_mask {
        cfg.loss_mask = match mask.as_str() {
            "all" => LossMask::AllEntries,
            "offdiag" => LossMask::OffDiagonal,
            other => bail!("unknown loss mask {other:?} (expected all or offdiag)"),
        };
    }
    if let Some(every) = args.record_every {
        cfg.record_every = every;
    }

    let (model, record) = train(
        &resolved.graph,
        &resolved.spec,
        &resolved.train_cfg,
        resolved.features.as_ref(),
    )?;
    write_run_dir(&args.out, &resolved, &model, &record)?;
    if record.diverged {
        eprintln!(
            "training diverged at epoch {}; last checkpoint written to {}",
            record.epochs_run,
            args.out.display()
        );
        return Ok(2);
    }
    println!(
        "run complete: faithful={} sign_errors={} log_norm_distance={:.6}",
        record.final_stats.faithful,
        record.final_stats.sign_errors,
        record.final_stats.log_norm_distance
    );
    Ok(0)
}

pub fn write_run_dir(
    out: &PathBuf,
    resolved: &ResolvedRun,
    model: &Model,
    record: &RunRecord,
) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let checkpoint = Checkpoint::new(model, &resolved.train_cfg, record.epochs_run);
    fs::write(out.join("checkpoint.json"), serde_json::to_string_pretty(&checkpoint)?)?;

    let mut metrics = csv::Writer::from_path(out.join("metrics.csv"))?;
    metrics.write_record(["epoch", "loss", "log_norm_distance"])?;
    for point in &record.series {
        metrics.write_record([
            point.epoch.to_string(),
            format!("{}", point.loss),
            format!("{}", point.log_norm_distance),
        ])?;
    }
    metrics.flush()?;

    let atilde = model.score_for_graph(&resolved.graph, resolved.features.as_ref())?;
    let signed = sign_decode(&atilde)?;
    fs::write(out.join("recon_sign.edges"), write_edge_list(&signed))?;
    let prob_seed = resolved.train_cfg.seed;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(prob_seed);
    let sampled = prob_decode(&atilde, &mut rng, true)?;
    fs::write(out.join("recon_prob.edges"), write_edge_list(&sampled))?;

    let summary = Summary {
        architecture: resolved.spec.name(),
        spec: &resolved.spec,
        learning_rate: resolved.train_cfg.learning_rate,
        lambda: resolved.train_cfg.lambda,
        epochs: resolved.train_cfg.epochs,
        seed: resolved.train_cfg.seed,
        graph_nodes: resolved.graph.node_count(),
        graph_edges: resolved.graph.edge_count(),
        epochs_run: record.epochs_run,
        diverged: record.diverged,
        faithful: record.final_stats.faithful,
        final_stats: &record.final_stats,
        prob_decode_seed: prob_seed,
    };
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}
