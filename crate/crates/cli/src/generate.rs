//! `generate` subcommands: deterministic graph files plus DOT exports.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Subcommand};
use signgraph::graph::{chain_of_cycles, grid_graph, star_graph, Graph};
use signgraph::io::{to_dot, write_edge_list};
use signgraph::lowrank::{sweep, KRule, SweepConfig};

use crate::config::{parse_cycles, parse_dims, pattern_hash};

#[derive(Subcommand)]
pub enum GenerateCmd {
    /// Cartesian grid graph over the given extents
    Grid(GridArgs),
    /// Cycles joined in a chain by single bridge edges
    Chain(ChainArgs),
    /// One center adjacent to the given number of leaves
    Star(StarArgs),
    /// Distinct connected sign patterns of a trigonometric embedding sweep
    Lowrank(LowrankArgs),
}

#[derive(Args)]
pub struct GridArgs {
    /// Comma-separated extents, e.g. 3,3,3,3
    #[arg(long)]
    dims: String,
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
pub struct ChainArgs {
    /// Comma-separated cycle sizes, each SIZE or SIZExCOUNT, e.g. 4x45,6x80
    #[arg(long)]
    cycles: String,
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
pub struct StarArgs {
    #[arg(long)]
    leaves: usize,
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
pub struct LowrankArgs {
    /// Node count
    #[arg(long)]
    n: usize,
    /// Sweep interval start
    #[arg(long)]
    a: f64,
    /// Sweep interval end
    #[arg(long)]
    b: f64,
    /// Number of equispaced sweep points
    #[arg(long)]
    m: usize,
    /// Embedding rank, 2 or 3
    #[arg(long)]
    rank: u8,
    /// Frequency rule
    #[arg(long, value_parser = ["index", "sqrt-prime"], default_value = "index")]
    k_rule: String,
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
}

fn write_graph(out: &Path, name: &str, g: &Graph) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let edges = out.join(format!("{name}.edges"));
    fs::write(&edges, write_edge_list(g))?;
    let dot = out.join(format!("{name}.dot"));
    fs::write(&dot, to_dot(g))?;
    println!("wrote {} ({} nodes, {} edges)", edges.display(), g.node_count(), g.edge_count());
    println!("wrote {}", dot.display());
    Ok(())
}

pub fn run(cmd: GenerateCmd) -> Result<i32> {
    match cmd {
        GenerateCmd::Grid(args) => {
            let dims = parse_dims(&args.dims)?;
            let g = grid_graph(&dims)?;
            let name = format!(
                "grid{}",
                dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x")
            );
            write_graph(&args.out, &name, &g)?;
        }
        GenerateCmd::Chain(args) => {
            let cycles = parse_cycles(&args.cycles)?;
            let g = chain_of_cycles(&cycles)?;
            // run-length encode the sizes for a compact stable name
            let mut parts: Vec<String> = Vec::new();
            let mut iter = cycles.iter().peekable();
            while let Some(&size) = iter.next() {
                let mut count = 1;
                while iter.peek() == Some(&&size) {
                    iter.next();
                    count += 1;
                }
                parts.push(if count == 1 {
                    size.to_string()
                } else {
                    format!("{size}x{count}")
                });
            }
            write_graph(&args.out, &format!("chain{}", parts.join("_")), &g)?;
        }
        GenerateCmd::Star(args) => {
            let g = star_graph(args.leaves)?;
            write_graph(&args.out, &format!("star{}", args.leaves), &g)?;
        }
        GenerateCmd::Lowrank(args) => {
            let cfg = SweepConfig {
                n: args.n,
                a: args.a,
                b: args.b,
                m: args.m,
                rank: args.rank,
                k_rule: if args.k_rule == "sqrt-prime" {
                    KRule::SqrtPrime
                } else {
                    KRule::IndexOverN
                },
            };
            let output = sweep(&cfg)?;
            fs::create_dir_all(&args.out)
                .with_context(|| format!("creating {}", args.out.display()))?;
            let mut index = csv::Writer::from_path(args.out.join("index.csv"))?;
            index.write_record(["x", "edges", "pattern_hash", "file"])?;
            for (i, hit) in output.hits.iter().enumerate() {
                let g = hit.pattern.to_graph();
                let name = format!("pattern_{i:04}.edges");
                fs::write(args.out.join(&name), write_edge_list(&g))?;
                fs::write(args.out.join(format!("pattern_{i:04}.dot")), to_dot(&g))?;
                index.write_record([
                    format!("{}", hit.x),
                    g.edge_count().to_string(),
                    format!("{:016x}", pattern_hash(args.n, &hit.pattern.key())),
                    name,
                ])?;
            }
            index.flush()?;
            println!(
                "wrote {} distinct patterns to {} ({} disconnected dropped)",
                output.hits.len(),
                args.out.display(),
                output.dropped_disconnected
            );
        }
    }
    Ok(0)
}
