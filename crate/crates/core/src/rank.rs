//! Sign patterns of Gram products, embedding verification, star rank bounds,
//! the exact rank-2 witness search, and numerical matrix rank.
//!
//! Sign convention used everywhere: an entry maps to Plus iff it is strictly
//! positive after the zero snap; values in (-ZERO_SNAP, ZERO_SNAP] count as
//! zero and map to Minus. One convention has to be fixed for byte-stable
//! outputs, and snapping kills platform-dependent signs at trigonometric
//! zeros.

use nalgebra::{Complex, DMatrix, DVector};
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::graph::{Graph, SignPattern};

/// Magnitudes at or below this count as zero when taking signs.
pub const ZERO_SNAP: f64 = 1e-12;

/// Default node cap for the exact induced-star search.
pub const STAR_SEARCH_CAP: usize = 64;

/// Node cap for the exhaustive rank-2 angle search.
pub const RANK2_NODE_CAP: usize = 7;

/// True iff `v` maps to Plus under the sign convention.
#[inline]
pub fn is_plus(v: f64) -> bool {
    v > ZERO_SNAP
}

/// Elementwise sign pattern of a symmetric matrix.
pub fn sign_of(m: &DMatrix<f64>) -> Result<SignPattern> {
    if m.nrows() != m.ncols() {
        return Err(Error::invalid(format!(
            "sign pattern needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "matrix not symmetric at ({i}, {j}): {} vs {}",
                    m[(i, j)],
                    m[(j, i)]
                )));
            }
        }
    }
    let mut plus = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            // symmetrize explicitly so the stored pattern is exactly symmetric
            let v = if i <= j { m[(i, j)] } else { m[(j, i)] };
            plus[i * n + j] = is_plus(v);
        }
    }
    SignPattern::new(n, plus)
}

/// Real or complex latent embedding, rows are per-node vectors.
#[derive(Debug, Clone)]
pub enum Embedding {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex<f64>>),
}

impl Embedding {
    pub fn nrows(&self) -> usize {
        match self {
            Embedding::Real(z) => z.nrows(),
            Embedding::Complex(z) => z.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Embedding::Real(z) => z.ncols(),
            Embedding::Complex(z) => z.ncols(),
        }
    }

    /// Re(Z Zᵀ) with the plain transpose, no conjugation.
    pub fn gram_real(&self) -> DMatrix<f64> {
        match self {
            Embedding::Real(z) => z * z.transpose(),
            Embedding::Complex(z) => (z * z.transpose()).map(|c| c.re),
        }
    }
}

impl From<DMatrix<f64>> for Embedding {
    fn from(z: DMatrix<f64>) -> Self {
        Embedding::Real(z)
    }
}

impl From<DMatrix<Complex<f64>>> for Embedding {
    fn from(z: DMatrix<Complex<f64>>) -> Self {
        Embedding::Complex(z)
    }
}

/// True iff the signed real Gram of `z` reproduces the graph's pattern on all
/// off-diagonal entries.
pub fn verify_embedding(g: &Graph, z: &Embedding) -> Result<bool> {
    if z.nrows() != g.node_count() {
        return Err(Error::shape(format!(
            "embedding has {} rows for a {}-node graph",
            z.nrows(),
            g.node_count()
        )));
    }
    let pattern = sign_of(&z.gram_real())?;
    Ok(pattern == g.sign_pattern())
}

/// Lower bound on the real sign rank of an (N-1)-star on `total_nodes` nodes,
/// as the exact rational (N+1)/2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarRankBound {
    pub bound: Ratio<u64>,
    /// Set for N = 2: the bound formula is stated for stars with at least two
    /// leaves, and a single edge is already rank 1.
    pub single_edge_caveat: bool,
}

pub fn star_rank_lower_bound(total_nodes: u64) -> Result<StarRankBound> {
    if total_nodes < 2 {
        return Err(Error::invalid("a star needs at least 2 nodes"));
    }
    Ok(StarRankBound {
        bound: Ratio::new(total_nodes + 1, 2),
        single_edge_caveat: total_nodes == 2,
    })
}

/// Largest induced star: a center plus a maximum independent set within its
/// neighborhood.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedStar {
    pub center: usize,
    pub leaves: Vec<usize>,
}

fn neighbor_masks(g: &Graph) -> Vec<u64> {
    let n = g.node_count();
    let mut masks = vec![0u64; n];
    for (u, mask) in masks.iter_mut().enumerate() {
        for v in g.neighbors(u) {
            *mask |= 1 << v;
        }
    }
    masks
}

/// Size of a maximum independent set within `candidates`, by branch and bound.
fn mis_size(masks: &[u64], candidates: u64, best_so_far: usize, current: usize) -> usize {
    if candidates == 0 {
        return current.max(best_so_far);
    }
    if current + (candidates.count_ones() as usize) <= best_so_far {
        return best_so_far;
    }
    let v = candidates.trailing_zeros() as usize;
    let rest = candidates & !(1 << v);
    // include v, excluding its neighborhood
    let with_v = mis_size(masks, rest & !masks[v], best_so_far, current + 1);
    let best = with_v.max(best_so_far);
    // exclude v
    mis_size(masks, rest, best, current)
}

/// Lexicographically smallest maximum independent set within `candidates`.
fn lex_smallest_mis(masks: &[u64], mut candidates: u64) -> Vec<u64> {
    let target = mis_size(masks, candidates, 0, 0);
    let mut chosen = Vec::new();
    let mut remaining = target;
    while remaining > 0 {
        let v = candidates.trailing_zeros() as u64;
        let without_nv = candidates & !(1 << v) & !masks[v as usize];
        if mis_size(masks, without_nv, 0, 0) + 1 == remaining {
            chosen.push(v);
            remaining -= 1;
            candidates = without_nv;
        } else {
            candidates &= !(1 << v);
        }
    }
    chosen
}

/// Exact search with the default node cap.
pub fn largest_induced_star(g: &Graph) -> Result<InducedStar> {
    largest_induced_star_with_cap(g, STAR_SEARCH_CAP)
}

/// Exact search: for each candidate center, a maximum independent set of its
/// neighborhood; the center with the most leaves wins. Ties break toward the
/// lowest center index (the per-center leaf set is already lexicographically
/// smallest).
pub fn largest_induced_star_with_cap(g: &Graph, cap: usize) -> Result<InducedStar> {
    let n = g.node_count();
    if n > cap.min(64) {
        return Err(Error::SizeLimit { n, cap: cap.min(64) });
    }
    let masks = neighbor_masks(g);
    let mut best: Option<InducedStar> = None;
    for center in 0..n {
        let leaves = lex_smallest_mis(&masks, masks[center]);
        let better = match &best {
            None => true,
            Some(b) => leaves.len() > b.leaves.len(),
        };
        if better {
            best = Some(InducedStar {
                center,
                leaves: leaves.into_iter().map(|v| v as usize).collect(),
            });
        }
    }
    best.ok_or_else(|| Error::invalid("graph has no nodes"))
}

/// Greedy fallback for graphs above the exact-search cap: ascending-index
/// greedy independent set in each neighborhood.
pub fn largest_induced_star_greedy(g: &Graph) -> Result<InducedStar> {
    let n = g.node_count();
    let mut best: Option<InducedStar> = None;
    for center in 0..n {
        let mut leaves: Vec<usize> = Vec::new();
        for v in g.neighbors(center) {
            if leaves.iter().all(|&u| !g.has_edge(u, v)) {
                leaves.push(v);
            }
        }
        let better = best.as_ref().is_none_or(|b| leaves.len() > b.leaves.len());
        if better {
            best = Some(InducedStar { center, leaves });
        }
    }
    best.ok_or_else(|| Error::invalid("graph has no nodes"))
}

/// Minimum latent dimension any faithful real encoding of `g` must have:
/// ceil((N_H + 1) / 2) for N_H the node count of the largest induced star.
pub fn dimension_lower_bound(g: &Graph) -> Result<usize> {
    let star = largest_induced_star(g)?;
    let n_h = star.leaves.len() + 1;
    Ok((n_h + 2) / 2)
}

/// Rank-1 complex embedding of the star on `leaves + 1` nodes: unit-modulus
/// entries with the center at angle -pi/4 and leaves fanned across
/// (pi/4, pi/2), so Re(z_i z_j) = cos(theta_i + theta_j) is positive exactly
/// on center-leaf pairs.
pub fn complex_star_embedding(leaves: usize) -> DVector<Complex<f64>> {
    let quarter = std::f64::consts::FRAC_PI_4;
    let step = quarter / (leaves as f64 + 1.0);
    DVector::from_fn(leaves + 1, |i, _| {
        let theta = if i == 0 { -quarter } else { quarter + i as f64 * step };
        Complex::new(theta.cos(), theta.sin())
    })
}

/// Outcome of a rank certificate query.
#[derive(Debug, Clone)]
pub enum RankCertificate {
    /// Explicit embedding whose signed Gram reproduces the graph.
    Witness { embedding: DMatrix<f64> },
    /// Analytic lower bound without a witness.
    BoundOnly { bound: Ratio<u64> },
    /// Exhaustive grid search at this resolution found nothing.
    NotFoundAtResolution { resolution: usize },
}

impl RankCertificate {
    pub fn is_witness(&self) -> bool {
        matches!(self, RankCertificate::Witness { .. })
    }
}

/// Exhaustive rank-2 realizability search over unit-circle angles.
///
/// Rows of a rank-2 embedding normalize onto the circle without changing any
/// sign, so a witness exists iff some assignment of angles puts every edge at
/// a strictly acute separation and every non-edge at a right-or-obtuse one.
/// theta_0 is pinned to 0 by rotational symmetry and the remaining angles
/// scan a uniform grid of `resolution` points over [0, 2pi). Backtracking in
/// lexicographic order returns the lowest witness tuple first.
pub fn rank2_witness_search(g: &Graph, resolution: usize) -> Result<RankCertificate> {
    let n = g.node_count();
    if n > RANK2_NODE_CAP {
        return Err(Error::SizeLimit { n, cap: RANK2_NODE_CAP });
    }
    if resolution < 8 {
        return Err(Error::invalid("resolution must be at least 8"));
    }
    let step = std::f64::consts::TAU / resolution as f64;
    let mut thetas = vec![0.0f64; n];

    fn consistent(g: &Graph, thetas: &[f64], upto: usize) -> bool {
        let j = upto;
        for i in 0..j {
            let plus = is_plus((thetas[i] - thetas[j]).cos());
            if plus != g.has_edge(i, j) {
                return false;
            }
        }
        true
    }

    fn assign(g: &Graph, thetas: &mut Vec<f64>, next: usize, resolution: usize, step: f64) -> bool {
        if next == thetas.len() {
            return true;
        }
        for k in 0..resolution {
            thetas[next] = k as f64 * step;
            if consistent(g, thetas, next) && assign(g, thetas, next + 1, resolution, step) {
                return true;
            }
        }
        false
    }

    if assign(g, &mut thetas, 1, resolution, step) {
        let embedding = DMatrix::from_fn(n, 2, |i, c| {
            if c == 0 {
                thetas[i].cos()
            } else {
                thetas[i].sin()
            }
        });
        Ok(RankCertificate::Witness { embedding })
    } else {
        Ok(RankCertificate::NotFoundAtResolution { resolution })
    }
}

/// Number of singular values above tol * sigma_max.
pub fn matrix_rank(m: &DMatrix<f64>, tol: f64) -> Result<usize> {
    if tol <= 0.0 {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let svals = m.singular_values();
    let max = svals.iter().cloned().fold(0.0f64, f64::max);
    Ok(svals.iter().filter(|&&s| s > tol * max).count())
}
