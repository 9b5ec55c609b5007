//! Encoder/decoder architectures over real and complex latent spaces, their
//! parameters, and the versioned checkpoint format.

mod decoder;
mod encoder;
mod train;

pub use decoder::{
    decode_diag, decode_inner, decode_multi, decode_scalar_cutoff, prob_decode, sign_decode,
    CutoffBand,
};
pub use encoder::{gcn_encode, gcn_encode_complex, normalized_adjacency, to_complex};
pub use train::{
    finite_difference, grad_check, loss, max_relative_error, train, Gradients, LossMask,
    OptimizerKind, RealTermGrads, TrainConfig,
};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decoder family. The multi-term decoder sums alternating-sign Gram terms
/// with optional diagonal weights in four positions per term:
/// left (n), inner-left (f), inner-right (f), right (n).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum Variant {
    /// Plain inner-product decoder, Atilde = Z Zᵀ.
    Gae,
    /// Single encoder with a learnable signed diagonal, Atilde = Z C Zᵀ.
    Dgae,
    /// m encoders with alternating signs; `active` flags the learnable
    /// diagonal positions per term.
    Mgae { terms: usize, active: Vec<[bool; 4]> },
    /// Complex counterpart of the plain decoder with split ReLU;
    /// Atilde = Re(Z Zᵀ).
    Cgae,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    #[serde(flatten)]
    pub variant: Variant,
    pub h1: usize,
    pub h2: usize,
    pub normalize_adjacency: bool,
}

impl ArchitectureSpec {
    pub fn gae(h1: usize, h2: usize) -> Self {
        Self { variant: Variant::Gae, h1, h2, normalize_adjacency: false }
    }

    pub fn dgae(h1: usize, h2: usize) -> Self {
        Self { variant: Variant::Dgae, h1, h2, normalize_adjacency: false }
    }

    /// All cutoffs inactive: Atilde = Z0 Z0ᵀ - Z1 Z1ᵀ.
    pub fn mgae2(h1: usize, h2: usize) -> Self {
        Self {
            variant: Variant::Mgae { terms: 2, active: vec![[false; 4]; 2] },
            h1,
            h2,
            normalize_adjacency: false,
        }
    }

    /// Four terms, only the inner-left diagonal learnable in each.
    pub fn mgae4(h1: usize, h2: usize) -> Self {
        Self {
            variant: Variant::Mgae { terms: 4, active: vec![[false, true, false, false]; 4] },
            h1,
            h2,
            normalize_adjacency: false,
        }
    }

    pub fn cgae(h1: usize, h2: usize) -> Self {
        Self { variant: Variant::Cgae, h1, h2, normalize_adjacency: false }
    }

    /// Short stable name used in file names and CSV rows.
    pub fn name(&self) -> String {
        match &self.variant {
            Variant::Gae => "gae".into(),
            Variant::Dgae => "dgae".into(),
            Variant::Mgae { terms, .. } => format!("{terms}gae"),
            Variant::Cgae => "cgae".into(),
        }
    }

    /// Latent width of each decoder term.
    pub fn term_width(&self) -> usize {
        match &self.variant {
            Variant::Gae | Variant::Dgae => self.h2,
            Variant::Mgae { terms, .. } => self.h2 / terms,
            Variant::Cgae => self.h2 / 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.h1 < 1 || self.h2 < 1 {
            return Err(Error::invalid("hidden and latent dims must be at least 1"));
        }
        match &self.variant {
            Variant::Gae | Variant::Dgae => Ok(()),
            Variant::Mgae { terms, active } => {
                if *terms < 1 {
                    return Err(Error::invalid("multi-term decoder needs at least one term"));
                }
                if active.len() != *terms {
                    return Err(Error::invalid("active mask must have one entry per term"));
                }
                if !self.h2.is_multiple_of(*terms) {
                    return Err(Error::invalid(format!(
                        "latent dim {} must split evenly across {terms} terms",
                        self.h2
                    )));
                }
                Ok(())
            }
            Variant::Cgae => {
                if !self.h1.is_multiple_of(2) || !self.h2.is_multiple_of(2) {
                    return Err(Error::invalid(
                        "complex architecture needs even hidden and latent dims",
                    ));
                }
                Ok(())
            }
        }
    }
}

/// One encoder/decoder term of a real-valued architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTerm {
    pub w0: DMatrix<f64>,
    pub w1: DMatrix<f64>,
    /// Diagonal cutoffs in decoder positions [left, inner-left, inner-right, right].
    pub cutoffs: [Option<DVector<f64>>; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Real { terms: Vec<RealTerm> },
    Complex { w0_re: DMatrix<f64>, w0_im: DMatrix<f64>, w1_re: DMatrix<f64>, w1_im: DMatrix<f64> },
}

/// A parameterized architecture bound to a node count and feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub spec: ArchitectureSpec,
    pub params: ModelParams,
    pub n_nodes: usize,
    pub feature_dim: usize,
}

fn glorot(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let data: Vec<f64> = (0..rows * cols)
        .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * limit)
        .collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

/// Alternating +1/-1 vector. Cutoffs in a position with no structural sign
/// alternation start indefinite, otherwise gradient flow never leaves the
/// positive-semidefinite regime once the latents shrink.
fn alternating_ones(len: usize) -> DVector<f64> {
    DVector::from_fn(len, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 })
}

impl Model {
    /// Deterministic initialization: Glorot-uniform weights drawn row-major
    /// from a seeded stream, term by term; cutoff diagonals start at one
    /// except the single-term signed diagonal, which alternates +1/-1.
    pub fn init(spec: ArchitectureSpec, n_nodes: usize, feature_dim: usize, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let params = match &spec.variant {
            Variant::Gae => ModelParams::Real {
                terms: vec![RealTerm {
                    w0: glorot(&mut rng, feature_dim, spec.h1),
                    w1: glorot(&mut rng, spec.h1, spec.h2),
                    cutoffs: [None, None, None, None],
                }],
            },
            Variant::Dgae => ModelParams::Real {
                terms: vec![RealTerm {
                    w0: glorot(&mut rng, feature_dim, spec.h1),
                    w1: glorot(&mut rng, spec.h1, spec.h2),
                    cutoffs: [None, Some(alternating_ones(spec.h2)), None, None],
                }],
            },
            Variant::Mgae { terms, active } => {
                let width = spec.term_width();
                let terms = (0..*terms)
                    .map(|t| {
                        let w0 = glorot(&mut rng, feature_dim, spec.h1);
                        let w1 = glorot(&mut rng, spec.h1, width);
                        let len_for = |pos: usize| if pos == 0 || pos == 3 { n_nodes } else { width };
                        let cutoffs = std::array::from_fn(|pos| {
                            active[t][pos].then(|| DVector::from_element(len_for(pos), 1.0))
                        });
                        RealTerm { w0, w1, cutoffs }
                    })
                    .collect();
                ModelParams::Real { terms }
            }
            Variant::Cgae => {
                let (hc, fc) = (spec.h1 / 2, spec.h2 / 2);
                ModelParams::Complex {
                    w0_re: glorot(&mut rng, feature_dim, hc),
                    w0_im: glorot(&mut rng, feature_dim, hc),
                    w1_re: glorot(&mut rng, hc, fc),
                    w1_im: glorot(&mut rng, hc, fc),
                }
            }
        };
        Ok(Model { spec, params, n_nodes, feature_dim })
    }
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::invalid("checkpoint matrix has no rows"));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::invalid("checkpoint matrix rows are ragged or empty"));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(nrows, ncols, &flat))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointTerm {
    pub w0: Vec<Vec<f64>>,
    pub w1: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_left: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_right: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "field", rename_all = "lowercase")]
pub enum CheckpointMatrices {
    Real { terms: Vec<CheckpointTerm> },
    Complex {
        w0_re: Vec<Vec<f64>>,
        w0_im: Vec<Vec<f64>>,
        w1_re: Vec<Vec<f64>>,
        w1_im: Vec<Vec<f64>>,
    },
}

/// On-disk training state, format version 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: u32,
    pub spec: ArchitectureSpec,
    pub config: TrainConfig,
    pub epoch: usize,
    pub n_nodes: usize,
    pub feature_dim: usize,
    pub matrices: CheckpointMatrices,
}

pub const CHECKPOINT_FORMAT: u32 = 1;

impl Checkpoint {
    pub fn new(model: &Model, config: &TrainConfig, epoch: usize) -> Self {
        let matrices = match &model.params {
            ModelParams::Real { terms } => CheckpointMatrices::Real {
                terms: terms
                    .iter()
                    .map(|t| CheckpointTerm {
                        w0: matrix_rows(&t.w0),
                        w1: matrix_rows(&t.w1),
                        left: t.cutoffs[0].as_ref().map(|v| v.as_slice().to_vec()),
                        inner_left: t.cutoffs[1].as_ref().map(|v| v.as_slice().to_vec()),
                        inner_right: t.cutoffs[2].as_ref().map(|v| v.as_slice().to_vec()),
                        right: t.cutoffs[3].as_ref().map(|v| v.as_slice().to_vec()),
                    })
                    .collect(),
            },
            ModelParams::Complex { w0_re, w0_im, w1_re, w1_im } => CheckpointMatrices::Complex {
                w0_re: matrix_rows(w0_re),
                w0_im: matrix_rows(w0_im),
                w1_re: matrix_rows(w1_re),
                w1_im: matrix_rows(w1_im),
            },
        };
        Checkpoint {
            format: CHECKPOINT_FORMAT,
            spec: model.spec.clone(),
            config: config.clone(),
            epoch,
            n_nodes: model.n_nodes,
            feature_dim: model.feature_dim,
            matrices,
        }
    }

    pub fn into_model(self) -> Result<Model> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(Error::invalid(format!(
                "unsupported checkpoint format {}",
                self.format
            )));
        }
        self.spec.validate()?;
        let params = match self.matrices {
            CheckpointMatrices::Real { terms } => ModelParams::Real {
                terms: terms
                    .iter()
                    .map(|t| {
                        Ok(RealTerm {
                            w0: matrix_from_rows(&t.w0)?,
                            w1: matrix_from_rows(&t.w1)?,
                            cutoffs: [
                                t.left.as_deref().map(DVector::from_row_slice),
                                t.inner_left.as_deref().map(DVector::from_row_slice),
                                t.inner_right.as_deref().map(DVector::from_row_slice),
                                t.right.as_deref().map(DVector::from_row_slice),
                            ],
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            },
            CheckpointMatrices::Complex { w0_re, w0_im, w1_re, w1_im } => ModelParams::Complex {
                w0_re: matrix_from_rows(&w0_re)?,
                w0_im: matrix_from_rows(&w0_im)?,
                w1_re: matrix_from_rows(&w1_re)?,
                w1_im: matrix_from_rows(&w1_im)?,
            },
        };
        Ok(Model {
            spec: self.spec,
            params,
            n_nodes: self.n_nodes,
            feature_dim: self.feature_dim,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(ArchitectureSpec::gae(4, 2).validate().is_ok());
        assert!(ArchitectureSpec::cgae(4, 2).validate().is_ok());
        assert!(ArchitectureSpec::cgae(3, 2).validate().is_err());
        assert!(ArchitectureSpec::mgae4(4, 8).validate().is_ok());
        assert!(ArchitectureSpec::mgae4(4, 6).validate().is_err());
        assert!(ArchitectureSpec::gae(0, 2).validate().is_err());
    }

    #[test]
    fn init_is_deterministic_and_shaped() {
        let spec = ArchitectureSpec::dgae(6, 4);
        let a = Model::init(spec.clone(), 5, 5, 7).unwrap();
        let b = Model::init(spec, 5, 5, 7).unwrap();
        assert_eq!(a, b);

        let ModelParams::Real { terms } = &a.params else { panic!() };
        assert_eq!(terms[0].w0.shape(), (5, 6));
        assert_eq!(terms[0].w1.shape(), (6, 4));
        let cutoff = terms[0].cutoffs[1].as_ref().unwrap();
        assert_eq!(cutoff.as_slice(), &[1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn different_seeds_differ() {
        let spec = ArchitectureSpec::gae(6, 4);
        let a = Model::init(spec.clone(), 5, 5, 0).unwrap();
        let b = Model::init(spec, 5, 5, 1).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn mgae_term_widths() {
        let spec = ArchitectureSpec::mgae4(10, 8);
        assert_eq!(spec.term_width(), 2);
        let m = Model::init(spec, 6, 6, 0).unwrap();
        let ModelParams::Real { terms } = &m.params else { panic!() };
        assert_eq!(terms.len(), 4);
        for t in terms {
            assert_eq!(t.w1.shape(), (10, 2));
            assert_eq!(t.cutoffs[1].as_ref().unwrap().len(), 2);
            assert!(t.cutoffs[0].is_none());
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        for spec in [
            ArchitectureSpec::gae(4, 3),
            ArchitectureSpec::dgae(4, 3),
            ArchitectureSpec::mgae2(4, 4),
            ArchitectureSpec::cgae(4, 2),
        ] {
            let model = Model::init(spec, 5, 5, 3).unwrap();
            let cfg = TrainConfig::default();
            let ckpt = Checkpoint::new(&model, &cfg, 17);
            let json = serde_json::to_string(&ckpt).unwrap();
            let parsed: Checkpoint = serde_json::from_str(&json).unwrap();
            assert_eq!(parsed.epoch, 17);
            assert_eq!(parsed.format, 1);
            let restored = parsed.into_model().unwrap();
            assert_eq!(restored, model);
        }
    }

    #[test]
    fn checkpoint_rejects_unknown_format() {
        let model = Model::init(ArchitectureSpec::gae(2, 2), 3, 3, 0).unwrap();
        let mut ckpt = Checkpoint::new(&model, &TrainConfig::default(), 0);
        ckpt.format = 9;
        assert!(ckpt.into_model().is_err());
    }
}
