//! Shared experiment configuration: graph sources, feature files, and the
//! JSON experiment document that flags can override.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use signgraph::graph::{chain_of_cycles, grid_graph, star_graph, Graph};
use signgraph::io::read_edge_list;
use signgraph::model::{ArchitectureSpec, TrainConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GraphSource {
    Grid { dims: Vec<usize> },
    Chain { cycles: Vec<usize> },
    Star { leaves: usize },
    File { path: PathBuf },
}

impl GraphSource {
    /// Accepts either a file path or a generator spec of the form
    /// `grid:3,3`, `chain:6x10`, `star:5`.
    pub fn parse(text: &str) -> Result<Self> {
        let Some((kind, rest)) = text.split_once(':') else {
            return Ok(GraphSource::File { path: PathBuf::from(text) });
        };
        match kind {
            "grid" => Ok(GraphSource::Grid { dims: parse_dims(rest)? }),
            "chain" => Ok(GraphSource::Chain { cycles: parse_cycles(rest)? }),
            "star" => Ok(GraphSource::Star {
                leaves: rest.parse().with_context(|| format!("bad leaf count {rest:?}"))?,
            }),
            other => bail!("unknown graph source kind {other:?}"),
        }
    }

    pub fn load(&self) -> Result<Graph> {
        let g = match self {
            GraphSource::Grid { dims } => grid_graph(dims)?,
            GraphSource::Chain { cycles } => chain_of_cycles(cycles)?,
            GraphSource::Star { leaves } => star_graph(*leaves)?,
            GraphSource::File { path } => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                read_edge_list(&text).with_context(|| format!("parsing {}", path.display()))?
            }
        };
        Ok(g)
    }
}

/// `3,3,3,3`
pub fn parse_dims(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|d| d.trim().parse().with_context(|| format!("bad grid dim {d:?}")))
        .collect()
}

/// Comma-separated entries, each `SIZE` or `SIZExCOUNT`: `4x45,6x80,12x45`.
pub fn parse_cycles(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for entry in text.split(',') {
        let entry = entry.trim();
        if let Some((size, count)) = entry.split_once('x') {
            let size: usize = size.parse().with_context(|| format!("bad cycle size {size:?}"))?;
            let count: usize =
                count.parse().with_context(|| format!("bad cycle count {count:?}"))?;
            out.extend(std::iter::repeat_n(size, count));
        } else {
            out.push(entry.parse().with_context(|| format!("bad cycle size {entry:?}"))?);
        }
    }
    Ok(out)
}

/// Headerless CSV of floats, one row per node.
pub fn read_features(path: &Path) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row: Vec<f64> = record
            .iter()
            .map(|v| v.parse().with_context(|| format!("bad feature value {v:?}")))
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("feature file {} is empty", path.display());
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        bail!("feature rows have inconsistent widths");
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(DMatrix::from_row_slice(flat.len() / cols, cols, &flat))
}

/// Architecture by short name, with the h1 = 2 h2 default when unset.
pub fn build_spec(arch: &str, h1: Option<usize>, h2: usize, normalize: bool) -> Result<ArchitectureSpec> {
    let h1 = h1.unwrap_or(2 * h2);
    let mut spec = match arch {
        "gae" => ArchitectureSpec::gae(h1, h2),
        "dgae" => ArchitectureSpec::dgae(h1, h2),
        "2gae" => ArchitectureSpec::mgae2(h1, h2),
        "4gae" => ArchitectureSpec::mgae4(h1, h2),
        "cgae" => ArchitectureSpec::cgae(h1, h2),
        other => bail!("unknown architecture {other:?} (expected gae, dgae, 2gae, 4gae, or cgae)"),
    };
    spec.normalize_adjacency = normalize;
    spec.validate()?;
    Ok(spec)
}

/// One-run experiment document; every field can be overridden by a flag.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ExperimentDoc {
    pub graph: Option<GraphSource>,
    pub arch: Option<String>,
    pub h1: Option<usize>,
    pub h2: Option<usize>,
    #[serde(default)]
    pub normalize_adjacency: bool,
    pub features: Option<PathBuf>,
    pub train: Option<TrainConfig>,
}

impl ExperimentDoc {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// FNV-1a over the off-diagonal pattern bits; stable across platforms.
pub fn pattern_hash(n: usize, key: &[bool]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    let mut eat = |byte: u8| {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    };
    for byte in (n as u64).to_le_bytes() {
        eat(byte);
    }
    for chunk in key.chunks(8) {
        let mut byte = 0u8;
        for (i, &bit) in chunk.iter().enumerate() {
            if bit {
                byte |= 1 << i;
            }
        }
        eat(byte);
    }
    hash
}
