//! Rank-revealing measurements of triangular factors: singular-value ratio
//! conditions for a split `k`, R-value ratios with their `Y` bounds, and
//! L-values of a QLP-style second factorization.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{blas, house_qr, house_qrcp, norm2, singular_values, solve_upper_leading};
use crate::matrix::RealMatrix;
use crate::rng::Rng;
use crate::rurv::{rurv_haar, rurv_ros};

/// Relative eigen-residual at which power iteration stops.
pub const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankRevealReport {
    pub k: usize,
    /// `max_i sigma_i(A) / sigma_i(R11)`.
    pub max_ratio_r11: f64,
    /// `max_j sigma_j(R22) / sigma_{k+j}(A)`.
    pub max_ratio_r22: f64,
    /// `min_i sigma_i(A) / sigma_i(R11)`; interlacing keeps it at or above 1.
    pub min_ratio_r11: f64,
    /// `min_j sigma_j(R22) / sigma_{k+j}(A)`; interlacing keeps it at or above 1.
    pub min_ratio_r22: f64,
    /// `||R11^{-1} R12||_2`, infinite when `R11` is singular.
    pub strong_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RvalueReport {
    /// `|rho_i| / sigma_i` with `rho` the diagonal sorted by decreasing magnitude.
    pub ratios: Vec<f64>,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    /// `1 / ||Y||_2` where `R = D Y^T`.
    pub lower_bound: f64,
    /// `||Y^{-1}||_2`.
    pub upper_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FirstFactorization {
    Qr,
    Qrcp,
    RurvHaar,
    RurvRos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QlpReport {
    /// `|L(i,i)|`, sorted decreasing.
    pub l_values: Vec<f64>,
    pub first_factorization: FirstFactorization,
}

impl FirstFactorization {
    pub const ALL: [FirstFactorization; 4] = [
        FirstFactorization::Qr,
        FirstFactorization::Qrcp,
        FirstFactorization::RurvHaar,
        FirstFactorization::RurvRos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FirstFactorization::Qr => "qr",
            FirstFactorization::Qrcp => "qrcp",
            FirstFactorization::RurvHaar => "rurv-haar",
            FirstFactorization::RurvRos => "rurv-ros",
        }
    }
}

impl fmt::Display for FirstFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FirstFactorization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown factorization '{s}'")))
    }
}

/// The `min(m, n) x n` triangular factor produced by `first`.
pub fn r_factor(a: &RealMatrix, first: FirstFactorization, num_mixes: usize, rng: &mut Rng) -> Result<RealMatrix> {
    Ok(match first {
        FirstFactorization::Qr => house_qr(a)?.r(),
        FirstFactorization::Qrcp => house_qrcp(a)?.r(),
        FirstFactorization::RurvHaar => rurv_haar(a, rng)?.r,
        FirstFactorization::RurvRos => rurv_ros(a, num_mixes, rng)?.r,
    })
}

/// Ratio conditions for the split of `r` after `k` rows and columns.
/// `sigma_a` holds the singular values of the factored matrix.
pub fn rr_conditions(sigma_a: &[f64], r: &RealMatrix, k: usize) -> Result<RankRevealReport> {
    let (p_rows, n) = r.shape();
    let p = p_rows.min(n);
    if k == 0 || k >= p {
        return Err(Error::invalid(format!("split must satisfy 1 <= k < {p}, got {k}")));
    }
    if sigma_a.len() < p {
        return Err(Error::invalid(format!(
            "need {p} singular values of A, got {}",
            sigma_a.len()
        )));
    }
    let r11 = r.submatrix(0, k, 0, k);
    let r12 = r.submatrix(0, k, k, n);
    let r22 = r.submatrix(k, p_rows, k, n);

    let s11 = singular_values(&r11)?;
    let r11_ratios: Vec<f64> = s11.iter().zip(sigma_a).map(|(s, a)| ratio(*a, *s)).collect();
    let s22 = singular_values(&r22)?;
    let r22_ratios: Vec<f64> = s22.iter().zip(&sigma_a[k..]).map(|(s, a)| ratio(*s, *a)).collect();
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);

    Ok(RankRevealReport {
        k,
        max_ratio_r11: max(&r11_ratios),
        max_ratio_r22: max(&r22_ratios),
        min_ratio_r11: min(&r11_ratios),
        min_ratio_r22: min(&r22_ratios),
        strong_norm: strong_norm(&r11, &r12),
    })
}

/// `num / den` with `0 / 0` read as 1 (a zero singular value reproduced exactly).
fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 && den == 0.0 {
        1.0
    } else {
        num / den
    }
}

fn strong_norm(r11: &RealMatrix, r12: &RealMatrix) -> f64 {
    let mut x = r12.clone();
    for j in 0..x.cols() {
        if solve_upper_leading(r11, x.col_mut(j)).is_err() {
            return f64::INFINITY;
        }
    }
    if x.as_slice().iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    power_norm(&x)
}

/// Spectral norm by power iteration on `X^T X`, stopped once the eigen-residual
/// `||X^T X v - lambda v||` falls to `POWER_TOL * lambda`.
pub fn power_norm(x: &RealMatrix) -> f64 {
    let norms = x.column_norms();
    let Some((best, &top)) = norms.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) else {
        return 0.0;
    };
    if top == 0.0 {
        return 0.0;
    }
    let mut v = x.t_matvec(x.col(best)).expect("matching shape");
    let mut lambda = top * top;
    for _ in 0..POWER_MAX_ITERS {
        let nv = blas::nrm2(&v);
        if nv == 0.0 {
            break;
        }
        blas::scal(1.0 / nv, &mut v);
        let xv = x.matvec(&v).expect("matching shape");
        let w = x.t_matvec(&xv).expect("matching shape");
        lambda = blas::sum_sq(&xv);
        let mut res = w.clone();
        blas::axpy(-lambda, &v, &mut res);
        if blas::nrm2(&res) <= POWER_TOL * lambda {
            break;
        }
        v = w;
    }
    lambda.sqrt().max(top)
}

/// R-value ratios of a square upper-triangular `r` against `sigma`, with the
/// bounds `1/||Y|| <= |rho_i| / sigma_i <= ||Y^{-1}||` that hold for pivoted QR.
pub fn rvalue_ratios(r: &RealMatrix, sigma: &[f64]) -> Result<RvalueReport> {
    let (p, n) = r.shape();
    if p != n || p == 0 {
        return Err(Error::invalid(format!("R-value ratios need a square factor, got {p}x{n}")));
    }
    if sigma.len() < p {
        return Err(Error::invalid(format!("need {p} singular values, got {}", sigma.len())));
    }
    let diag = r.diag();
    if let Some(i) = diag.iter().position(|&d| d == 0.0) {
        return Err(Error::invalid(format!("zero diagonal entry at index {i}")));
    }
    let mut rho: Vec<f64> = diag.iter().map(|d| d.abs()).collect();
    rho.sort_by(|a, b| b.total_cmp(a));
    let ratios: Vec<f64> = rho.iter().zip(sigma).map(|(r, s)| r / s).collect();

    // Y^T = D^{-1} R is unit upper triangular.
    let yt = RealMatrix::from_fn(p, p, |i, j| if i <= j { r[(i, j)] / diag[i] } else { 0.0 });
    let mut yt_inv = RealMatrix::identity(p);
    for j in 0..p {
        solve_upper_leading(&yt, &mut yt_inv.col_mut(j)[..=j])?;
    }
    let lower_bound = 1.0 / norm2(&yt)?;
    let upper_bound = norm2(&yt_inv)?;

    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(RvalueReport {
        min: sorted[0],
        max: sorted[p - 1],
        median: median_sorted(&sorted),
        ratios,
        lower_bound,
        upper_bound,
    })
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// L-values: run `first`, then unpivoted QR of `R^T`.
pub fn qlp(a: &RealMatrix, first: FirstFactorization, num_mixes: usize, rng: &mut Rng) -> Result<QlpReport> {
    let r = r_factor(a, first, num_mixes, rng)?;
    let second = house_qr(&r.transpose())?;
    let mut l_values: Vec<f64> = second.r().diag().iter().map(|d| d.abs()).collect();
    l_values.sort_by(|a, b| b.total_cmp(a));
    Ok(QlpReport {
        l_values,
        first_factorization: first,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgen::{gaussian_matrix, gen_kahan, KAHAN_C, KAHAN_TAU};
    use crate::rng::stream;
    use proptest::prelude::*;

    #[test]
    fn diagonal_split() {
        let r = RealMatrix::from_diag(&[3.0, 2.0, 1.0]);
        let rep = rr_conditions(&[3.0, 2.0, 1.0], &r, 2).unwrap();
        assert_eq!(rep.max_ratio_r11, 1.0);
        assert_eq!(rep.max_ratio_r22, 1.0);
        assert_eq!(rep.strong_norm, 0.0);
        assert!(rr_conditions(&[3.0, 2.0, 1.0], &r, 3).is_err());
        assert!(rr_conditions(&[3.0, 2.0, 1.0], &r, 0).is_err());
    }

    #[test]
    fn strong_norm_two_by_two() {
        let d = 1e-3;
        let r = RealMatrix::from_rows(&[&[1.0, 1.0], &[0.0, d]]);
        let sigma = singular_values(&r).unwrap();
        let rep = rr_conditions(&sigma, &r, 1).unwrap();
        assert_eq!(rep.strong_norm, 1.0);
        assert!(rep.max_ratio_r11 >= 1.0 - 1e-10 && rep.max_ratio_r22 >= 1.0 - 1e-10);
    }

    #[test]
    fn singular_r11_gives_infinite_strong_norm() {
        let r = RealMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 1.0]]);
        let rep = rr_conditions(&[2f64.sqrt(), 0.0], &r, 1).unwrap();
        assert!(rep.strong_norm.is_infinite());
    }

    #[test]
    fn qrcp_on_kahan_misses_sigma_k() {
        let (c, s) = (KAHAN_C, (1.0 - KAHAN_C * KAHAN_C).sqrt());
        for m in [20, 40, 60] {
            let a = gen_kahan(m, c, KAHAN_TAU).unwrap();
            let sigma = singular_values(&a).unwrap();
            let r = house_qrcp(&a).unwrap().r();
            let rep = rr_conditions(&sigma, &r, m - 1).unwrap();
            let bound = 0.5 * c.powi(3) * (1.0 + c).powi(m as i32 - 4) / s;
            assert!(rep.max_ratio_r11 >= bound, "m={m}: {} < {bound}", rep.max_ratio_r11);
        }
    }

    #[test]
    fn rvalues_of_diagonal() {
        let rep = rvalue_ratios(&RealMatrix::from_diag(&[4.0, 2.0, 1.0]), &[4.0, 2.0, 1.0]).unwrap();
        assert_eq!(rep.ratios, vec![1.0; 3]);
        assert_eq!((rep.min, rep.median, rep.max), (1.0, 1.0, 1.0));
        assert_eq!((rep.lower_bound, rep.upper_bound), (1.0, 1.0));
    }

    #[test]
    fn rvalue_bounds_two_by_two() {
        // Y = [[1, 0], [1, 1]] has singular values phi and 1/phi.
        let r = RealMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let sigma = singular_values(&r).unwrap();
        let rep = rvalue_ratios(&r, &sigma).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((rep.lower_bound - 1.0 / phi).abs() < 1e-15);
        assert!((rep.upper_bound - phi).abs() < 1e-14);
        assert_eq!(rep.median, 0.5 * (rep.ratios[0] + rep.ratios[1]));
    }

    #[test]
    fn rvalue_rejects_bad_input() {
        assert!(rvalue_ratios(&RealMatrix::zeros(2, 3), &[1.0, 1.0]).is_err());
        let r = RealMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        assert!(rvalue_ratios(&r, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn qlp_of_diagonal() {
        let a = RealMatrix::from_diag(&[5.0, 3.0, 1.0]);
        let rep = qlp(&a, FirstFactorization::Qrcp, 1, &mut stream(0, 0)).unwrap();
        assert_eq!(rep.l_values, vec![5.0, 3.0, 1.0]);
        assert_eq!(rep.first_factorization, FirstFactorization::Qrcp);
    }

    #[test]
    fn qlp_exact_rank() {
        let mut rng = stream(14, 0);
        let k = 6;
        let a = gaussian_matrix(24, k, &mut rng).matmul(&gaussian_matrix(k, 24, &mut rng)).unwrap();
        for first in [FirstFactorization::Qrcp, FirstFactorization::RurvHaar, FirstFactorization::RurvRos] {
            let l = qlp(&a, first, 1, &mut stream(14, 1)).unwrap().l_values;
            assert!(l[k..].iter().all(|v| *v <= 1e-10 * l[0]), "{first}");
        }
    }

    /// Brute force: explicit inverse of R11 by solving against unit vectors.
    fn brute_strong_norm(r: &RealMatrix, k: usize) -> f64 {
        let r11 = r.submatrix(0, k, 0, k);
        let mut inv = RealMatrix::identity(k);
        for j in 0..k {
            let e = inv.col(j).to_vec();
            let col = crate::linalg::back_substitute(&r11, &e).unwrap();
            inv.col_mut(j).copy_from_slice(&col);
        }
        let x = inv.matmul(&r.submatrix(0, k, k, r.cols())).unwrap();
        norm2(&x).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn interlacing_and_brute_force(m in 2usize..20, n in 2usize..20, seed in 0u64..400, frac in 0.0f64..1.0) {
            let a = gaussian_matrix(m, n, &mut stream(seed, 0));
            let sigma = singular_values(&a).unwrap();
            let p = m.min(n);
            let k = 1 + ((p - 2) as f64 * frac) as usize;
            for first in FirstFactorization::ALL {
                let r = r_factor(&a, first, 1, &mut stream(seed, 1)).unwrap();
                let rep = rr_conditions(&sigma, &r, k).unwrap();
                prop_assert!(rep.max_ratio_r11 >= 1.0 - 1e-10);
                prop_assert!(rep.max_ratio_r22 >= 1.0 - 1e-10);
                let brute = brute_strong_norm(&r, k);
                prop_assert!((rep.strong_norm - brute).abs() <= 1e-10 * brute.max(1.0), "{} vs {}", rep.strong_norm, brute);
            }
            if m == n {
                let r = house_qrcp(&a).unwrap().r();
                let rep = rvalue_ratios(&r, &sigma).unwrap();
                for q in &rep.ratios {
                    prop_assert!(*q >= rep.lower_bound * (1.0 - 1e-10) && *q <= rep.upper_bound * (1.0 + 1e-10));
                }
            }
        }
    }
}
