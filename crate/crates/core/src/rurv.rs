//! Randomized URV and VLU factorizations.
//!
//! `A = U R V` with `V` a random orthogonal mixing: a dense Haar sample or an
//! implicit ROS operator. Mixing spreads column mass so that unpivoted
//! Householder QR of `A V^T` reveals rank like pivoted QR does.

use crate::error::{Error, Result};
use crate::linalg::{blas, house_qr, house_qr_steps, HouseholderQR, QShape};
use crate::matgen::gaussian_matrix;
use crate::matrix::{Permutation, RealMatrix};
use crate::rng::Rng;
use crate::transforms::{ros_apply, ros_sample, RosMode, RosOperator};

/// The mixing `V` of a factorization.
#[derive(Clone, Debug)]
pub enum MixingHandle {
    Ros(RosOperator),
    Dense(RealMatrix),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UrvKind {
    Haar,
    Ros,
}

#[derive(Clone, Debug)]
pub struct UrvFactorization {
    /// Implicit `U`; after a partial factorization its packed trailing block
    /// holds the unfactored remainder.
    pub u: HouseholderQR,
    /// `rank_used x n` upper trapezoidal.
    pub r: RealMatrix,
    pub v: MixingHandle,
    pub kind: UrvKind,
    pub rank_used: usize,
}

#[derive(Clone, Debug)]
pub struct VluFactorization {
    pub v: MixingHandle,
    /// Lower triangular (trapezoidal when `m > n`).
    pub l: RealMatrix,
    /// QR of `(V A)^T`; `U` is the transpose of its thin `Q`.
    pub u: HouseholderQR,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RosOptions {
    pub num_mixes: usize,
    /// Reorder mixed columns by decreasing norm before factoring.
    pub presort: bool,
}

impl Default for RosOptions {
    fn default() -> Self {
        Self {
            num_mixes: 1,
            presort: true,
        }
    }
}

impl MixingHandle {
    pub fn dim(&self) -> usize {
        match self {
            MixingHandle::Ros(v) => v.n(),
            MixingHandle::Dense(v) => v.rows(),
        }
    }

    /// `A V^T`, `A V`, `V A` or `V^T A` according to `mode`.
    pub fn apply(&self, a: &RealMatrix, mode: RosMode) -> Result<RealMatrix> {
        match self {
            MixingHandle::Ros(v) => ros_apply(v, a, mode),
            MixingHandle::Dense(v) => match mode {
                RosMode::RightTranspose => a.matmul_t(v),
                RosMode::Right => a.matmul(v),
                RosMode::Left => v.matmul(a),
                RosMode::LeftTranspose => v.t_matmul(a),
            },
        }
    }

    /// `x <- V x` or `x <- V^T x`.
    pub fn apply_vec(&self, x: &mut [f64], transpose: bool) -> Result<()> {
        match self {
            MixingHandle::Ros(v) if transpose => v.apply_t_vec(x),
            MixingHandle::Ros(v) => v.apply_vec(x),
            MixingHandle::Dense(v) => {
                let y = if transpose { v.t_matvec(x)? } else { v.matvec(x)? };
                x.copy_from_slice(&y);
                Ok(())
            }
        }
    }

    pub fn to_dense(&self) -> Result<RealMatrix> {
        match self {
            MixingHandle::Ros(v) => v.materialize(),
            MixingHandle::Dense(v) => Ok(v.clone()),
        }
    }
}

/// Haar-distributed `n x n` orthogonal matrix.
pub fn haar_sample(n: usize, rng: &mut Rng) -> Result<RealMatrix> {
    if n == 0 {
        return Err(Error::invalid("Haar sample of dimension 0"));
    }
    Ok(haar_columns(n, n, rng))
}

/// First `p` columns of a Haar-distributed `m x m` orthogonal matrix
/// (`1 <= p <= m`): the sign-normalized thin `Q` of an `m x p` Gaussian matrix.
pub fn haar_columns(m: usize, p: usize, rng: &mut Rng) -> RealMatrix {
    assert!(p >= 1 && p <= m, "haar_columns needs 1 <= p <= m, got p={p}, m={m}");
    let b = gaussian_matrix(m, p, rng);
    let f = house_qr(&b).expect("non-empty Gaussian matrix");
    let mut q = f.form_q(QShape::Thin);
    let packed = f.packed();
    for j in 0..p {
        // R(j, j) < 0 flips column j so that the implied R has a non-negative diagonal.
        if packed[(j, j)] < 0.0 {
            blas::scal(-1.0, q.col_mut(j));
        }
    }
    q
}

pub fn rurv_haar(a: &RealMatrix, rng: &mut Rng) -> Result<UrvFactorization> {
    let (m, n) = a.shape();
    check_nonempty(m, n)?;
    let v = haar_sample(n, rng)?;
    let mixed = a.matmul_t(&v)?;
    let u = house_qr(&mixed)?;
    Ok(UrvFactorization {
        r: u.r(),
        u,
        v: MixingHandle::Dense(v),
        kind: UrvKind::Haar,
        rank_used: m.min(n),
    })
}

pub fn rurv_ros(a: &RealMatrix, num_mixes: usize, rng: &mut Rng) -> Result<UrvFactorization> {
    rurv_ros_with(
        a,
        RosOptions {
            num_mixes,
            presort: true,
        },
        rng,
    )
}

pub fn rurv_ros_with(a: &RealMatrix, opts: RosOptions, rng: &mut Rng) -> Result<UrvFactorization> {
    let (m, n) = a.shape();
    check_nonempty(m, n)?;
    ros_factor(a, m.min(n), opts, rng)
}

/// Mixing and pre-sort as in `rurv_ros`, then only `k` Householder steps.
pub fn rurv_ros_partial(
    a: &RealMatrix,
    k: usize,
    num_mixes: usize,
    rng: &mut Rng,
) -> Result<UrvFactorization> {
    let (m, n) = a.shape();
    check_nonempty(m, n)?;
    if k == 0 || k > m.min(n) {
        return Err(Error::invalid(format!(
            "target rank must satisfy 1 <= k <= {}, got {k}",
            m.min(n)
        )));
    }
    ros_factor(
        a,
        k,
        RosOptions {
            num_mixes,
            presort: true,
        },
        rng,
    )
}

/// Mixed matrix `A V^T` with its columns in decreasing-norm order, and the
/// operator with the sorting permutation attached.
pub(crate) fn mix_and_sort(
    a: &RealMatrix,
    opts: RosOptions,
    rng: &mut Rng,
) -> Result<(RealMatrix, RosOperator)> {
    let mut v = ros_sample(a.cols(), opts.num_mixes, rng)?;
    let mixed = ros_apply(&v, a, RosMode::RightTranspose)?;
    if !opts.presort {
        return Ok((mixed, v));
    }
    let perm = presort_permutation(&mixed.column_norms());
    let sorted = mixed.gather_cols(&perm);
    v.set_presort(Some(perm))?;
    Ok((sorted, v))
}

/// Stable decreasing order of `norms`; equal norms keep their original order.
pub fn presort_permutation(norms: &[f64]) -> Permutation {
    let mut order: Vec<usize> = (0..norms.len()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    Permutation::from_vec(order).expect("sorted indices form a permutation")
}

fn ros_factor(a: &RealMatrix, steps: usize, opts: RosOptions, rng: &mut Rng) -> Result<UrvFactorization> {
    let (mixed, v) = mix_and_sort(a, opts, rng)?;
    let u = house_qr_steps(mixed, steps)?;
    Ok(UrvFactorization {
        r: u.r(),
        u,
        v: MixingHandle::Ros(v),
        kind: UrvKind::Ros,
        rank_used: steps,
    })
}

pub fn rvlu_ros(a: &RealMatrix, num_mixes: usize, rng: &mut Rng) -> Result<VluFactorization> {
    let (m, n) = a.shape();
    check_nonempty(m, n)?;
    let v = ros_sample(m, num_mixes, rng)?;
    let mixed = ros_apply(&v, a, RosMode::Left)?;
    let u = house_qr(&mixed.transpose())?;
    Ok(VluFactorization {
        l: u.r().transpose(),
        u,
        v: MixingHandle::Ros(v),
    })
}

fn check_nonempty(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::invalid(format!("cannot factor an empty {m}x{n} matrix")));
    }
    Ok(())
}

impl UrvFactorization {
    pub fn rows(&self) -> usize {
        self.u.rows()
    }

    pub fn cols(&self) -> usize {
        self.u.cols()
    }

    /// Explicit `U`: `m x min(m, n)` (thin) or `m x m` (full).
    pub fn u_matrix(&self, shape: QShape) -> RealMatrix {
        self.u.form_q(shape)
    }

    /// Unfactored `(m - k) x (n - k)` block left by a partial factorization.
    pub fn trailing_block(&self) -> RealMatrix {
        self.u.trailing_block()
    }

    /// `U(:, 1:k) R V` with `k = rank_used`.
    pub fn reconstruct(&self) -> Result<RealMatrix> {
        let (m, n) = (self.rows(), self.cols());
        let k = self.rank_used;
        let mut padded = RealMatrix::zeros(m, n);
        for j in 0..n {
            padded.col_mut(j)[..k].copy_from_slice(self.r.col(j));
        }
        let ur = self.u.apply_q(&padded)?;
        self.v.apply(&ur, RosMode::Right)
    }
}

impl VluFactorization {
    pub fn rows(&self) -> usize {
        self.u.cols()
    }

    pub fn cols(&self) -> usize {
        self.u.rows()
    }

    /// Explicit `U` with orthonormal rows, `min(m, n) x n`.
    pub fn u_matrix(&self) -> RealMatrix {
        self.u.form_q(QShape::Thin).transpose()
    }

    /// `V^T L U`.
    pub fn reconstruct(&self) -> Result<RealMatrix> {
        let (m, n) = (self.rows(), self.cols());
        let p = m.min(n);
        // (L U)^T = Q L^T, with L^T padded to n rows.
        let mut lt = RealMatrix::zeros(n, m);
        for j in 0..m {
            for i in 0..p {
                lt[(i, j)] = self.l[(j, i)];
            }
        }
        let lu = self.u.apply_q(&lt)?.transpose();
        self.v.apply(&lu, RosMode::LeftTranspose)
    }
}
