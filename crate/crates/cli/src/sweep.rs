//! `sweep` subcommand: architectures x latent widths x seeds, merged into a
//! deterministic CSV. Failed rows become data, not crashes.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use signgraph::model::{train, TrainConfig};

use crate::config::{build_spec, read_features, GraphSource};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepDoc {
    pub graph: GraphSource,
    pub architectures: Vec<String>,
    pub h2: Vec<usize>,
    /// Fixed hidden width; when absent every run uses h1 = 2 * h2
    pub h1: Option<usize>,
    #[serde(default)]
    pub normalize_adjacency: bool,
    /// Explicit seed list; alternatively base_seed plus repetitions
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub base_seed: u64,
    pub repetitions: Option<usize>,
    pub features: Option<PathBuf>,
    pub train: Option<TrainConfig>,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Sweep JSON document
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path
    #[arg(short, long, default_value = "sweep.csv")]
    out: PathBuf,
    /// Worker threads (defaults to the rayon global pool)
    #[arg(long)]
    jobs: Option<usize>,
}

struct Row {
    architecture: String,
    h2: usize,
    seed: u64,
    log_norm_distance: Option<f64>,
    sign_errors: Option<usize>,
    computed_rank: Option<usize>,
    status: String,
}

pub fn run(args: SweepArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let doc: SweepDoc = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.config.display()))?;
    if doc.architectures.is_empty() || doc.h2.is_empty() {
        anyhow::bail!("sweep needs nonempty architecture and h2 lists");
    }
    let seeds: Vec<u64> = match (&doc.seeds, doc.repetitions) {
        (Some(list), _) => list.clone(),
        (None, Some(reps)) => (0..reps as u64).map(|i| doc.base_seed + i).collect(),
        (None, None) => vec![doc.base_seed],
    };
    let graph = doc.graph.load()?;
    let features = match &doc.features {
        Some(path) => Some(read_features(path)?),
        None => None,
    };
    let base_train = doc.train.clone().unwrap_or_default();

    let mut jobs = Vec::new();
    for arch in &doc.architectures {
        for &h2 in &doc.h2 {
            for &seed in &seeds {
                jobs.push((arch.clone(), h2, seed));
            }
        }
    }

    if let Some(n) = args.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }

    let mut rows: Vec<Row> = jobs
        .par_iter()
        .map(|(arch, h2, seed)| {
            let cfg = TrainConfig { seed: *seed, ..base_train.clone() };
            let outcome = build_spec(arch, doc.h1, *h2, doc.normalize_adjacency)
                .and_then(|spec| Ok(train(&graph, &spec, &cfg, features.as_ref())?));
            match outcome {
                Ok((_, record)) => Row {
                    architecture: arch.clone(),
                    h2: *h2,
                    seed: *seed,
                    log_norm_distance: Some(record.final_stats.log_norm_distance),
                    sign_errors: Some(record.final_stats.sign_errors),
                    computed_rank: Some(record.final_stats.computed_rank),
                    status: if record.diverged {
                        format!("diverged at epoch {}", record.epochs_run)
                    } else {
                        "ok".into()
                    },
                },
                Err(err) => Row {
                    architecture: arch.clone(),
                    h2: *h2,
                    seed: *seed,
                    log_norm_distance: None,
                    sign_errors: None,
                    computed_rank: None,
                    status: format!("error: {err:#}"),
                },
            }
        })
        .collect();

    rows.sort_by(|a, b| {
        (&a.architecture, a.h2, a.seed).cmp(&(&b.architecture, b.h2, b.seed))
    });

    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut writer = csv::Writer::from_path(&args.out)?;
    writer.write_record([
        "architecture",
        "h2",
        "seed",
        "log_norm_distance",
        "sign_errors",
        "computed_rank",
        "status",
    ])?;
    let mut any_failed = false;
    for row in &rows {
        if row.status != "ok" {
            any_failed = true;
        }
        writer.write_record([
            row.architecture.clone(),
            row.h2.to_string(),
            row.seed.to_string(),
            row.log_norm_distance.map(|v| format!("{v}")).unwrap_or_default(),
            row.sign_errors.map(|v| v.to_string()).unwrap_or_default(),
            row.computed_rank.map(|v| v.to_string()).unwrap_or_default(),
            row.status.clone(),
        ])?;
    }
    writer.flush()?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(if any_failed { 2 } else { 0 })
}
