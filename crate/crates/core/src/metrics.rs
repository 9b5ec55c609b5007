//! Reconstruction metrics and the per-run record.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rank::is_plus;

/// Sigmoid probabilities are clamped into [PROB_CLAMP, 1 - PROB_CLAMP]
/// before any logarithm.
pub const PROB_CLAMP: f64 = 1e-12;

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

fn check_same_square(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() || a.shape() != b.shape() {
        return Err(Error::shape(format!(
            "expected matching square matrices, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// log(||A - sigma(Atilde)||_F^2 / N^2), natural log, diagonal included in
/// the normalization.
pub fn log_norm_distance(a: &DMatrix<f64>, atilde: &DMatrix<f64>) -> Result<f64> {
    check_same_square(a, atilde)?;
    let n = a.nrows() as f64;
    let mut sum = 0.0;
    for (av, tv) in a.iter().zip(atilde.iter()) {
        let d = av - clamp_prob(sigmoid(*tv));
        sum += d * d;
    }
    Ok((sum / (n * n)).ln())
}

/// ||A - Ahat||_F^2 for 0/1 matrices: twice the number of mispredicted
/// unordered pairs.
pub fn squared_frob_error(a: &Graph, ahat: &Graph) -> Result<f64> {
    if a.node_count() != ahat.node_count() {
        return Err(Error::shape("graphs differ in node count"));
    }
    let n = a.node_count();
    let mut mispredicted = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            if a.has_edge(i, j) != ahat.has_edge(i, j) {
                mispredicted += 1;
            }
        }
    }
    Ok(2.0 * mispredicted as f64)
}

/// Off-diagonal ordered pairs where the sign of Atilde disagrees with the
/// graph's pattern.
pub fn sign_errors(a: &Graph, atilde: &DMatrix<f64>) -> Result<usize> {
    if atilde.nrows() != a.node_count() || atilde.ncols() != a.node_count() {
        return Err(Error::shape("matrix size does not match graph"));
    }
    let n = a.node_count();
    let mut errors = 0;
    for i in 0..n {
        for j in 0..n {
            if i != j && is_plus(atilde[(i, j)]) != a.has_edge(i, j) {
                errors += 1;
            }
        }
    }
    Ok(errors)
}

/// Exact sign reconstruction: no off-diagonal sign errors.
pub fn faithful(a: &Graph, atilde: &DMatrix<f64>) -> Result<bool> {
    Ok(sign_errors(a, atilde)? == 0)
}

/// One recorded point of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetric {
    pub epoch: usize,
    pub loss: f64,
    pub log_norm_distance: f64,
}

/// Final reconstruction statistics of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalStats {
    pub sign_errors: usize,
    pub frob_error: f64,
    pub computed_rank: usize,
    pub faithful: bool,
    pub log_norm_distance: f64,
    pub loss: f64,
}

/// Everything recorded about one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub epochs_run: usize,
    pub diverged: bool,
    pub series: Vec<EpochMetric>,
    pub final_stats: FinalStats,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{star_graph, Graph};
    use approx::assert_relative_eq;

    #[test]
    fn lnd_zero_matrices() {
        let a = DMatrix::zeros(4, 4);
        let t = DMatrix::zeros(4, 4);
        assert_relative_eq!(log_norm_distance(&a, &t).unwrap(), 0.25f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn lnd_saturated_is_finite() {
        let a = DMatrix::zeros(3, 3);
        let t = DMatrix::from_element(3, 3, -1e3);
        let d = log_norm_distance(&a, &t).unwrap();
        assert!(d.is_finite());
        // every residual is clamped to at least 1e-12, so the floor is ln(1e-24)
        assert!(d < -50.0, "{d}");
        assert!(d >= 1e-24f64.ln(), "{d}");
    }

    #[test]
    fn lnd_matches_scalar_loop() {
        let a = DMatrix::from_fn(4, 4, |i, j| ((i * 7 + j * 3) % 2) as f64);
        let t = DMatrix::from_fn(4, 4, |i, j| (i as f64 - j as f64) * 0.3);
        let mut sum = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let p = 1.0 / (1.0 + (-t[(i, j)]).exp());
                sum += (a[(i, j)] - p).powi(2);
            }
        }
        assert_relative_eq!(
            log_norm_distance(&a, &t).unwrap(),
            (sum / 16.0).ln(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn frob_error_counts_doubled_flips() {
        let a = star_graph(3).unwrap();
        assert_eq!(squared_frob_error(&a, &a).unwrap(), 0.0);

        let mut b = a.clone();
        b.add_edge(1, 2).unwrap();
        assert_eq!(squared_frob_error(&a, &b).unwrap(), 2.0);
    }

    #[test]
    fn frob_error_matches_symmetric_difference() {
        // deterministic pseudo-random pair of 5-node graphs
        let mut a = Graph::empty(5).unwrap();
        let mut b = Graph::empty(5).unwrap();
        for (i, j, in_a, in_b) in [
            (0usize, 1usize, true, true),
            (0, 2, true, false),
            (1, 3, false, true),
            (2, 4, true, true),
            (3, 4, true, false),
            (1, 2, false, true),
        ] {
            if in_a {
                a.add_edge(i, j).unwrap();
            }
            if in_b {
                b.add_edge(i, j).unwrap();
            }
        }
        let sym_diff = a
            .edges()
            .filter(|&(u, v)| !b.has_edge(u, v))
            .count()
            + b.edges().filter(|&(u, v)| !a.has_edge(u, v)).count();
        assert_eq!(squared_frob_error(&a, &b).unwrap(), 2.0 * sym_diff as f64);
    }

    #[test]
    fn sign_error_counts() {
        let star = star_graph(3).unwrap();
        let a = star.adjacency_matrix();
        assert_eq!(sign_errors(&star, &a).unwrap(), 0);
        assert!(faithful(&star, &a).unwrap());

        // negating the adjacency flips every edge while non-edges (value 0)
        // still map to Minus and match
        let neg = -a;
        assert_eq!(sign_errors(&star, &neg).unwrap(), 2 * star.edge_count());
        assert!(!faithful(&star, &neg).unwrap());
    }

    #[test]
    fn lnd_decreases_toward_target_sign() {
        // moving one entry toward its target sign lowers the distance
        let star = star_graph(2).unwrap();
        let a = star.adjacency_matrix();
        let mut t = DMatrix::zeros(3, 3);
        let before = log_norm_distance(&a, &t).unwrap();
        t[(0, 1)] = 2.0;
        t[(1, 0)] = 2.0;
        let after = log_norm_distance(&a, &t).unwrap();
        assert!(after < before);
    }
}
