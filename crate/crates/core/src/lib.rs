//! Graph embedding laboratory: low-rank sign-pattern generators, sign-rank
//! bounds and witnesses, cutoff-augmented inner-product decoders, and a
//! deterministic training loop for reconstructing adjacencies from latent
//! embeddings.

pub mod error;
pub mod graph;
pub mod io;
pub mod lowrank;
pub mod metrics;
pub mod model;
pub mod rank;

pub use error::{Error, Result};
pub use graph::{chain_of_cycles, grid_graph, induced_subgraph, star_graph, Graph, SignPattern};
pub use rank::Embedding;
