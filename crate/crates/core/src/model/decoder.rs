//! Decoders from latent embeddings to symmetric score matrices, and the two
//! edge-decoding rules (deterministic sign, probabilistic Bernoulli).

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::sigmoid;
use crate::rank::{sign_of, Embedding};

/// Re(Z Zᵀ) with the plain transpose; for real Z this is Z Zᵀ.
pub fn decode_inner(z: &Embedding) -> DMatrix<f64> {
    z.gram_real()
}

/// Z Zᵀ - c 1 1ᵀ: one shared cutoff subtracted from every score.
pub fn decode_scalar_cutoff(z: &DMatrix<f64>, c: f64) -> DMatrix<f64> {
    let mut gram = z * z.transpose();
    gram.apply(|v| *v -= c);
    gram
}

/// Z1 diag(c1) Z1ᵀ - Z2 diag(c2) Z2ᵀ.
pub fn decode_diag(
    z1: &DMatrix<f64>,
    c1: &DVector<f64>,
    z2: &DMatrix<f64>,
    c2: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    if z1.nrows() != z2.nrows() {
        return Err(Error::shape("embeddings differ in node count"));
    }
    if z1.ncols() != c1.len() || z2.ncols() != c2.len() {
        return Err(Error::shape("cutoff length must match embedding width"));
    }
    Ok(scaled_gram(z1, c1) - scaled_gram(z2, c2))
}

fn scaled_gram(z: &DMatrix<f64>, c: &DVector<f64>) -> DMatrix<f64> {
    let mut scaled = z.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= c[k];
    }
    scaled * z.transpose()
}

/// Sparse banded decoder weight. Only the diagonal form is implemented; the
/// banded forms are accepted by the type and rejected on use.
#[derive(Debug, Clone, PartialEq)]
pub enum CutoffBand {
    Diagonal(DVector<f64>),
    UpperBidiagonal { main: DVector<f64>, upper: DVector<f64> },
    LowerBidiagonal { main: DVector<f64>, lower: DVector<f64> },
    Tridiagonal { main: DVector<f64>, upper: DVector<f64>, lower: DVector<f64> },
}

impl CutoffBand {
    fn diagonal(&self) -> Result<&DVector<f64>> {
        match self {
            CutoffBand::Diagonal(d) => Ok(d),
            other => Err(Error::invalid(format!(
                "unsupported band structure {:?}; only diagonal weights are implemented",
                std::mem::discriminant(other)
            ))),
        }
    }
}

/// Alternating-sign sum over terms n of
/// C_{4n} Z_n C_{4n+1} C_{4n+2} Z_nᵀ C_{4n+3}, with `None` meaning identity.
/// `cutoffs` is flat with four entries per embedding.
pub fn decode_multi(zs: &[DMatrix<f64>], cutoffs: &[Option<CutoffBand>]) -> Result<DMatrix<f64>> {
    if zs.is_empty() {
        return Err(Error::invalid("decoder needs at least one embedding"));
    }
    if cutoffs.len() != 4 * zs.len() {
        return Err(Error::shape(format!(
            "expected {} cutoff slots for {} embeddings, got {}",
            4 * zs.len(),
            zs.len(),
            cutoffs.len()
        )));
    }
    let n = zs[0].nrows();
    let mut acc = DMatrix::zeros(n, n);
    for (t, z) in zs.iter().enumerate() {
        if z.nrows() != n {
            return Err(Error::shape("embeddings differ in node count"));
        }
        let slot = |pos: usize| -> Result<Option<&DVector<f64>>> {
            match &cutoffs[4 * t + pos] {
                None => Ok(None),
                Some(band) => {
                    let d = band.diagonal()?;
                    let expected = if pos == 0 || pos == 3 { n } else { z.ncols() };
                    if d.len() != expected {
                        return Err(Error::shape(format!(
                            "cutoff {} of term {t} has length {}, expected {expected}",
                            4 * t + pos,
                            d.len()
                        )));
                    }
                    Ok(Some(d))
                }
            }
        };
        let (left, inner_l, inner_r, right) = (slot(0)?, slot(1)?, slot(2)?, slot(3)?);
        let term = gram_term(z, left, inner_l, inner_r, right);
        if t % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// D_left · Z · D_il · D_ir · Zᵀ · D_right with missing diagonals as identity.
pub(crate) fn gram_term(
    z: &DMatrix<f64>,
    left: Option<&DVector<f64>>,
    inner_left: Option<&DVector<f64>>,
    inner_right: Option<&DVector<f64>>,
    right: Option<&DVector<f64>>,
) -> DMatrix<f64> {
    let mut scaled = z.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        let mut s = 1.0;
        if let Some(c) = inner_left {
            s *= c[k];
        }
        if let Some(c) = inner_right {
            s *= c[k];
        }
        col *= s;
    }
    let mut term = scaled * z.transpose();
    if let Some(c) = left {
        for (i, mut row) in term.row_iter_mut().enumerate() {
            row *= c[i];
        }
    }
    if let Some(c) = right {
        for (j, mut col) in term.column_iter_mut().enumerate() {
            col *= c[j];
        }
    }
    term
}

/// Deterministic decode: edge iff the score is strictly positive (after the
/// zero snap); the diagonal is ignored.
pub fn sign_decode(atilde: &DMatrix<f64>) -> Result<Graph> {
    Ok(sign_of(atilde)?.to_graph())
}

/// Probabilistic decode. With `symmetrize`, every ordered pair is sampled
/// Bernoulli(sigma(score)) in row-major order and an edge appears if either
/// direction fired, matching the artificial symmetrization rule. Without it,
/// each unordered pair is sampled once.
pub fn prob_decode<R: Rng>(atilde: &DMatrix<f64>, rng: &mut R, symmetrize: bool) -> Result<Graph> {
    if atilde.nrows() != atilde.ncols() {
        return Err(Error::invalid("score matrix must be square"));
    }
    let n = atilde.nrows();
    let mut g = Graph::empty(n)?;
    if symmetrize {
        let mut fired = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    fired[i * n + j] = rng.gen::<f64>() < sigmoid(atilde[(i, j)]);
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if fired[i * n + j] || fired[j * n + i] {
                    g.add_edge(i, j)?;
                }
            }
        }
    } else {
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen::<f64>() < sigmoid(atilde[(i, j)]) {
                    g.add_edge(i, j)?;
                }
            }
        }
    }
    Ok(g)
}
