//! Seeded generators for the test-matrix families used by the experiments.
//!
//! All generators are deterministic functions of their parameters and the
//! supplied RNG state. Families with a prescribed spectrum return the exact
//! singular values alongside the matrix.

use rand::seq::{index, SliceRandom};

use crate::error::{Error, Result};
use crate::linalg::blas;
use crate::matrix::RealMatrix;
use crate::rng::{self, Rng};
use crate::rurv::haar_columns;

/// Per-index decay factor for the gap family.
pub const GAP_DECAY: f64 = 0.99;

pub const KAHAN_C: f64 = 0.1;
pub const KAHAN_TAU: f64 = 1e-7;

/// A generated matrix and, when known by construction, its singular values.
#[derive(Clone, Debug)]
pub struct Generated {
    pub a: RealMatrix,
    pub sigma: Option<Vec<f64>>,
}

/// A matrix family together with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Kahan { m: usize, c: f64, tau: f64 },
    Gap { m: usize, k: usize, gap: f64 },
    DevilsStairs { m: usize, stair_len: usize, jump: f64 },
    Correlated { m: usize, n: usize, p: usize, e: f64 },
    Condition { m: usize, n: usize, kappa: f64 },
    HeavyTail { m: usize, n: usize },
    PrescribedSigma { m: usize, n: usize, sigma: Vec<f64> },
}

/// Family, parameters and seed: everything needed to rebuild a matrix bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSpec {
    pub family: Family,
    pub seed: u64,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Kahan { .. } => "kahan",
            Family::Gap { .. } => "gap",
            Family::DevilsStairs { .. } => "devils-stairs",
            Family::Correlated { .. } => "correlated",
            Family::Condition { .. } => "condition",
            Family::HeavyTail { .. } => "heavytail",
            Family::PrescribedSigma { .. } => "prescribed-sigma",
        }
    }

    /// Generates from an existing RNG state.
    pub fn generate_with(&self, rng: &mut Rng) -> Result<Generated> {
        match self {
            &Family::Kahan { m, c, tau } => Ok(Generated {
                a: gen_kahan(m, c, tau)?,
                sigma: None,
            }),
            &Family::Gap { m, k, gap } => gen_gap(m, k, gap, rng),
            &Family::DevilsStairs { m, stair_len, jump } => {
                gen_devils_stairs(m, stair_len, jump, rng)
            }
            &Family::Correlated { m, n, p, e } => Ok(Generated {
                a: gen_correlated(m, n, p, e, rng)?,
                sigma: None,
            }),
            &Family::Condition { m, n, kappa } => gen_condition(m, n, kappa, rng),
            &Family::HeavyTail { m, n } => Ok(Generated {
                a: gen_heavytail(m, n, rng)?,
                sigma: None,
            }),
            Family::PrescribedSigma { m, n, sigma } => gen_prescribed(*m, *n, sigma, rng),
        }
    }
}

impl MatrixSpec {
    pub fn new(family: Family, seed: u64) -> Self {
        Self { family, seed }
    }

    pub fn generate(&self) -> Result<Generated> {
        self.family.generate_with(&mut rng::seeded(self.seed))
    }
}

/// `m x n` matrix of i.i.d. standard normals, drawn column by column.
pub fn gaussian_matrix(m: usize, n: usize, rng: &mut Rng) -> RealMatrix {
    let data = (0..m * n).map(|_| rng::normal(rng)).collect();
    RealMatrix::from_raw(m, n, data)
}

pub fn gaussian_vector(n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| rng::normal(rng)).collect()
}

/// Kahan matrix `diag(1, s, ..., s^(m-1)) * T(-c) * diag((1 - tau)^(j-1))`,
/// where `T(-c)` is unit upper triangular with `-c` above the diagonal and
/// `s = sqrt(1 - c^2)`.
pub fn gen_kahan(m: usize, c: f64, tau: f64) -> Result<RealMatrix> {
    if m == 0 {
        return Err(Error::invalid("Kahan matrix needs m >= 1"));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::invalid(format!("Kahan c must lie in (0, 1), got {c}")));
    }
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::invalid(format!("Kahan tau must lie in [0, 1), got {tau}")));
    }
    let s = (1.0 - c * c).sqrt();
    let row_scale: Vec<f64> = (0..m).map(|i| s.powi(i as i32)).collect();
    let col_scale: Vec<f64> = (0..m).map(|j| (1.0 - tau).powi(j as i32)).collect();
    Ok(RealMatrix::from_fn(m, m, |i, j| {
        if i == j {
            row_scale[i] * col_scale[j]
        } else if i < j {
            -c * row_scale[i] * col_scale[j]
        } else {
            0.0
        }
    }))
}

/// `U diag(sigma) V^T` with `U`, `V` Haar-distributed (thin, `p = min(m, n)` columns).
pub fn gen_prescribed(m: usize, n: usize, sigma: &[f64], rng: &mut Rng) -> Result<Generated> {
    let p = m.min(n);
    if p == 0 {
        return Err(Error::invalid(format!("cannot generate a {m}x{n} matrix")));
    }
    if sigma.len() != p {
        return Err(Error::invalid(format!(
            "expected {p} singular values for a {m}x{n} matrix, got {}",
            sigma.len()
        )));
    }
    if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::invalid("singular values must be finite and non-negative"));
    }
    let u = haar_columns(m, p, rng);
    let v = haar_columns(n, p, rng);
    let mut us = u;
    for (j, &s) in sigma.iter().enumerate() {
        blas::scal(s, us.col_mut(j));
    }
    let a = us.matmul_t(&v)?;
    Ok(Generated {
        a,
        sigma: Some(sigma.to_vec()),
    })
}

/// Singular values `rho^i` for `i <= k` and `gap * rho^i` beyond (1-based `i`,
/// `rho = GAP_DECAY`). `k = m` yields a smooth spectrum.
pub fn gap_spectrum(m: usize, k: usize, gap: f64) -> Result<Vec<f64>> {
    if m == 0 || k == 0 || k > m {
        return Err(Error::invalid(format!("gap family needs 1 <= k <= m, got k={k}, m={m}")));
    }
    if !(gap > 0.0 && gap <= 1.0) {
        return Err(Error::invalid(format!("gap must lie in (0, 1], got {gap}")));
    }
    Ok((1..=m)
        .map(|i| {
            let smooth = GAP_DECAY.powi(i as i32);
            if i <= k {
                smooth
            } else {
                gap * smooth
            }
        })
        .collect())
}

/// Square `m x m` matrix whose spectrum decays slowly, drops by `gap` after
/// index `k`, then keeps decaying.
pub fn gen_gap(m: usize, k: usize, gap: f64, rng: &mut Rng) -> Result<Generated> {
    let sigma = gap_spectrum(m, k, gap)?;
    gen_prescribed(m, m, &sigma, rng)
}

/// Piecewise-constant spectrum: stairs of `stair_len` equal values, each
/// stair `jump` times the previous one, starting at 1.
pub fn devils_stairs_spectrum(m: usize, stair_len: usize, jump: f64) -> Result<Vec<f64>> {
    if m == 0 || stair_len == 0 {
        return Err(Error::invalid("Devil's stairs need m >= 1 and stair_len >= 1"));
    }
    if !(jump > 0.0 && jump <= 1.0) {
        return Err(Error::invalid(format!("stair jump must lie in (0, 1], got {jump}")));
    }
    Ok((0..m).map(|i| jump.powi((i / stair_len) as i32)).collect())
}

pub fn gen_devils_stairs(m: usize, stair_len: usize, jump: f64, rng: &mut Rng) -> Result<Generated> {
    let sigma = devils_stairs_spectrum(m, stair_len, jump)?;
    gen_prescribed(m, m, &sigma, rng)
}

/// Gaussian matrix with `p` nearly duplicated columns:
/// draw `m x (n - p)` normals, append copies of `p` distinct random columns,
/// shuffle all `n` columns, then add `e` times fresh Gaussian noise.
pub fn gen_correlated(m: usize, n: usize, p: usize, e: f64, rng: &mut Rng) -> Result<RealMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::invalid(format!("cannot generate a {m}x{n} matrix")));
    }
    if p > n || p > n - p {
        return Err(Error::invalid(format!(
            "need p <= n - p to pick {p} distinct columns to duplicate (n = {n})"
        )));
    }
    if !(e >= 0.0 && e.is_finite()) {
        return Err(Error::invalid(format!("noise scale must be finite and >= 0, got {e}")));
    }
    let base = gaussian_matrix(m, n - p, rng);
    let dup = index::sample(rng, n - p, p).into_vec();
    let mut shuffle: Vec<usize> = (0..n).collect();
    shuffle.shuffle(rng);

    let source_col = |j: usize| if j < n - p { j } else { dup[j - (n - p)] };
    let mut a = RealMatrix::zeros(m, n);
    for (dst, &src) in shuffle.iter().enumerate() {
        a.col_mut(dst).copy_from_slice(base.col(source_col(src)));
    }
    let noise = gaussian_matrix(m, n, rng);
    blas::axpy(e, noise.as_slice(), a.as_mut_slice());
    Ok(a)
}

/// Geometric spectrum from 1 down to `1 / kappa` over `min(m, n)` values.
pub fn condition_spectrum(p: usize, kappa: f64) -> Result<Vec<f64>> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("condition number must be >= 1, got {kappa}")));
    }
    if p == 1 {
        return Ok(vec![1.0]);
    }
    Ok((0..p)
        .map(|i| kappa.powf(-(i as f64) / (p - 1) as f64))
        .collect())
}

pub fn gen_condition(m: usize, n: usize, kappa: f64, rng: &mut Rng) -> Result<Generated> {
    if m == 0 || n == 0 {
        return Err(Error::invalid(format!("cannot generate a {m}x{n} matrix")));
    }
    let sigma = condition_spectrum(m.min(n), kappa)?;
    gen_prescribed(m, n, &sigma, rng)
}

/// Heavy-tailed columns: entries `randn + exp(10 * rand)`, each column scaled
/// by `exp(2 * rand)`, then the whole matrix divided by its mean column norm.
pub fn gen_heavytail(m: usize, n: usize, rng: &mut Rng) -> Result<RealMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::invalid(format!("cannot generate a {m}x{n} matrix")));
    }
    let normals = gaussian_matrix(m, n, rng);
    let uniforms: Vec<f64> = (0..m * n).map(|_| rng::uniform(rng)).collect();
    let scales: Vec<f64> = (0..n).map(|_| (2.0 * rng::uniform(rng)).exp()).collect();

    let mut a = RealMatrix::from_fn(m, n, |i, j| {
        let k = i + j * m;
        (normals.as_slice()[k] + (10.0 * uniforms[k]).exp()) * scales[j]
    });
    let norms = a.column_norms();
    let mean = norms.iter().sum::<f64>() / n as f64;
    blas::scal(1.0 / mean, a.as_mut_slice());
    Ok(a)
}
