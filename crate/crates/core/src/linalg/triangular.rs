use crate::error::{Error, Result};
use crate::linalg::blas;
use crate::matrix::RealMatrix;

fn check_square(op: &'static str, t: &RealMatrix, b: &[f64]) -> Result<()> {
    if t.rows() != t.cols() {
        return Err(Error::shape(op, "square matrix", format!("{}x{}", t.rows(), t.cols())));
    }
    if b.len() != t.rows() {
        return Err(Error::shape(
            op,
            format!("rhs of length {}", t.rows()),
            format!("length {}", b.len()),
        ));
    }
    Ok(())
}

#[inline]
fn usable_pivot(d: f64) -> bool {
    d.abs() >= f64::MIN_POSITIVE
}

/// Solves `R y = b` for square upper-triangular `R`. Entries below the
/// diagonal are ignored.
pub fn back_substitute(r: &RealMatrix, b: &[f64]) -> Result<Vec<f64>> {
    check_square("back_substitute", r, b)?;
    let mut y = b.to_vec();
    solve_upper_leading(r, &mut y)?;
    Ok(y)
}

/// Solves `L y = b` for square lower-triangular `L`. Entries above the
/// diagonal are ignored.
pub fn forward_substitute(l: &RealMatrix, b: &[f64]) -> Result<Vec<f64>> {
    check_square("forward_substitute", l, b)?;
    let n = b.len();
    let mut y = b.to_vec();
    for j in 0..n {
        let d = l[(j, j)];
        if !usable_pivot(d) {
            return Err(Error::Singular { index: j });
        }
        y[j] /= d;
        let yj = y[j];
        if yj != 0.0 {
            blas::axpy(-yj, &l.col(j)[j + 1..], &mut y[j + 1..]);
        }
    }
    Ok(y)
}

/// Back substitution against the leading `k x k` upper triangle of `r`
/// (`k = y.len()`), which may be a packed QR factor with more rows and
/// columns than `k`.
pub(crate) fn solve_upper_leading(r: &RealMatrix, y: &mut [f64]) -> Result<()> {
    let k = y.len();
    debug_assert!(k <= r.rows() && k <= r.cols());
    for j in (0..k).rev() {
        let d = r[(j, j)];
        if !usable_pivot(d) {
            return Err(Error::Singular { index: j });
        }
        y[j] /= d;
        let yj = y[j];
        if yj != 0.0 {
            blas::axpy(-yj, &r.col(j)[..j], &mut y[..j]);
        }
    }
    Ok(())
}
