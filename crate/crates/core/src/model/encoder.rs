//! Two-layer graph-convolutional encoder, real and complex.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

/// D^{-1/2} A D^{-1/2} over the raw 0/1 adjacency. Degree-zero rows scale
/// to zero.
pub fn normalized_adjacency(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|i| {
            let d: f64 = a.row(i).iter().sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| a[(i, j)] * inv_sqrt_deg[i] * inv_sqrt_deg[j])
}

fn relu(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.map(|v| v.max(0.0))
}

fn check_shapes(
    a: &DMatrix<f64>,
    x: &DMatrix<f64>,
    w0_rows: usize,
    w0_cols: usize,
    w1_rows: usize,
) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::shape("adjacency must be square"));
    }
    if x.nrows() != a.nrows() {
        return Err(Error::shape(format!(
            "features have {} rows for {} nodes",
            x.nrows(),
            a.nrows()
        )));
    }
    if x.ncols() != w0_rows {
        return Err(Error::shape(format!(
            "feature dim {} does not match first layer input {}",
            x.ncols(),
            w0_rows
        )));
    }
    if w0_cols != w1_rows {
        return Err(Error::shape(format!(
            "hidden dims disagree: {w0_cols} vs {w1_rows}"
        )));
    }
    Ok(())
}

/// Z = A relu(A X W0) W1.
pub fn gcn_encode(
    a: &DMatrix<f64>,
    x: &DMatrix<f64>,
    w0: &DMatrix<f64>,
    w1: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_shapes(a, x, w0.nrows(), w0.ncols(), w1.nrows())?;
    let h = relu(&(a * x * w0));
    Ok(a * h * w1)
}

/// Complex two-layer pass with split ReLU acting independently on the real
/// and imaginary parts. Inputs A and X are real; weights are complex, given
/// as (re, im) pairs. Returns (Z_re, Z_im).
#[allow(clippy::too_many_arguments)]
pub fn gcn_encode_complex(
    a: &DMatrix<f64>,
    x: &DMatrix<f64>,
    w0_re: &DMatrix<f64>,
    w0_im: &DMatrix<f64>,
    w1_re: &DMatrix<f64>,
    w1_im: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_shapes(a, x, w0_re.nrows(), w0_re.ncols(), w1_re.nrows())?;
    if w0_re.shape() != w0_im.shape() || w1_re.shape() != w1_im.shape() {
        return Err(Error::shape("real and imaginary weight shapes differ"));
    }
    let ax = a * x;
    let h_re = relu(&(&ax * w0_re));
    let h_im = relu(&(&ax * w0_im));
    let s_re = a * h_re;
    let s_im = a * h_im;
    Ok((&s_re * w1_re - &s_im * w1_im, &s_re * w1_im + &s_im * w1_re))
}

/// (Z_re, Z_im) as one complex matrix.
pub fn to_complex(re: &DMatrix<f64>, im: &DMatrix<f64>) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| Complex::new(re[(i, j)], im[(i, j)]))
}
