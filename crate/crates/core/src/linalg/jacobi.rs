//! One-sided (Hestenes) Jacobi SVD.
//!
//! Column pairs are rotated until every pair is numerically orthogonal.
//! The method delivers small singular values to high relative accuracy when
//! the matrix is a column scaling of a well-conditioned one, which is why it
//! serves as the reference SVD for the diagnostics.

use crate::error::{Error, Result};
use crate::linalg::blas;
use crate::linalg::householder::house_qrcp;
use crate::matrix::RealMatrix;

pub const MAX_SWEEPS: usize = 30;

#[derive(Clone, Debug)]
pub struct SvdResult {
    /// Non-increasing, non-negative.
    pub sigma: Vec<f64>,
    /// `m x n` left singular vectors.
    pub u: Option<RealMatrix>,
    /// `n x n` right singular vectors.
    pub v: Option<RealMatrix>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct JacobiOptions {
    pub want_vectors: bool,
    /// Factor `A P = QR` first and run Jacobi on `R^T`.
    pub precondition: bool,
}

/// One-sided Jacobi SVD of `a` (`m >= n`).
pub fn jacobi_svd(a: &RealMatrix, want_vectors: bool) -> Result<SvdResult> {
    jacobi_svd_with(
        a,
        JacobiOptions {
            want_vectors,
            precondition: false,
        },
    )
}

pub fn jacobi_svd_with(a: &RealMatrix, opts: JacobiOptions) -> Result<SvdResult> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::invalid(format!("SVD of an empty {m}x{n} matrix")));
    }
    if m < n {
        return Err(Error::invalid(format!(
            "jacobi_svd needs rows >= cols, got {m}x{n}; factor the transpose"
        )));
    }
    if !opts.precondition {
        return hestenes(a.clone(), opts.want_vectors);
    }

    let f = house_qrcp(a)?;
    let rt = f.r().transpose();
    let inner = hestenes(rt, opts.want_vectors)?;
    if !opts.want_vectors {
        return Ok(inner);
    }
    // R^T = X S Y^T  =>  A = (Q Y) S (P X)^T
    let x = inner.u.expect("vectors requested");
    let y = inner.v.expect("vectors requested");
    let mut qy = RealMatrix::zeros(m, n);
    for j in 0..n {
        qy.col_mut(j)[..n].copy_from_slice(y.col(j));
    }
    let u = f.apply_q(&qy)?;
    let perm = f.perm().expect("pivoted factorization");
    let v = x.transpose().scatter_cols(perm).transpose();
    Ok(SvdResult {
        sigma: inner.sigma,
        u: Some(u),
        v: Some(v),
    })
}

/// Singular values of a matrix of any orientation.
pub fn singular_values(a: &RealMatrix) -> Result<Vec<f64>> {
    if a.rows() >= a.cols() {
        Ok(jacobi_svd(a, false)?.sigma)
    } else {
        Ok(jacobi_svd(&a.transpose(), false)?.sigma)
    }
}

/// Spectral norm via the Jacobi SVD.
pub fn norm2(a: &RealMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

fn hestenes(mut w: RealMatrix, want_vectors: bool) -> Result<SvdResult> {
    let (m, n) = w.shape();
    // Cosines below this are treated as orthogonal. The sqrt(m) term is the
    // rounding floor of a length-m dot product; without it narrow, tall
    // inputs can stall above an n*eps threshold.
    let tol = f64::EPSILON * (n as f64).max((m as f64).sqrt().ceil());
    let mut v = want_vectors.then(|| RealMatrix::identity(n));

    let mut converged = n == 1;
    let mut worst = 0.0;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        worst = 0.0f64;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (wp, wq) = w.two_cols_mut(p, q);
                let alpha = blas::sum_sq(wp);
                let beta = blas::sum_sq(wq);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = blas::dot(wp, wq);
                let cosine = gamma.abs() / (alpha.sqrt() * beta.sqrt());
                worst = worst.max(cosine);
                if cosine <= tol {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 { 1.0 } else { -1.0 } / (zeta.abs() + 1.0f64.hypot(zeta));
                let c = 1.0 / 1.0f64.hypot(t);
                let s = c * t;
                rotate(wp, wq, c, s);
                if let Some(v) = v.as_mut() {
                    let (vp, vq) = v.two_cols_mut(p, q);
                    rotate(vp, vq, c, s);
                }
            }
        }
        converged = worst <= tol;
    }
    if !converged {
        return Err(Error::Convergence {
            sweeps,
            residual: worst,
        });
    }

    let norms = w.column_norms();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();

    let (u, v) = if want_vectors {
        let mut u = RealMatrix::zeros(m, n);
        let v_in = v.expect("allocated above");
        let mut v_out = RealMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            let s = norms[src];
            if s > 0.0 {
                for (ui, wi) in u.col_mut(dst).iter_mut().zip(w.col(src)) {
                    *ui = wi / s;
                }
            }
            v_out.col_mut(dst).copy_from_slice(v_in.col(src));
        }
        (Some(u), Some(v_out))
    } else {
        (None, None)
    };
    Ok(SvdResult { sigma, u, v })
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let a = *xi;
        let b = *yi;
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}
