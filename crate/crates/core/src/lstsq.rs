//! Least-squares solvers on top of the URV/VLU factorizations.
//!
//! Overdetermined (`m >= n`): `A = U R V`, `x = V^T R^{-1} U^T b`.
//! Underdetermined basic (`m < n`): factor the leading `m` mixed columns,
//! set the trailing `n - m` mixed coordinates to zero.
//! Minimum norm (`m < n`): `A = V^T L U`, `x = U^T L^{-1} V b`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::linalg::{blas, forward_substitute, house_qr, house_qrcp, solve_upper_leading};
use crate::matrix::RealMatrix;
use crate::rng::Rng;
use crate::rurv::{haar_columns, mix_and_sort, rurv_ros_with, rvlu_ros, RosOptions};
use crate::transforms::RosOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    QrBasic,
    Qrcp,
    RurvHaarBasic,
    RurvRosBasic,
    RvluMinNorm,
    QrOverdet,
    RurvRosOverdet,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::QrBasic,
        Method::Qrcp,
        Method::RurvHaarBasic,
        Method::RurvRosBasic,
        Method::RvluMinNorm,
        Method::QrOverdet,
        Method::RurvRosOverdet,
    ];

    /// The five underdetermined methods compared side by side.
    pub const UNDERDETERMINED: [Method; 5] = [
        Method::QrBasic,
        Method::Qrcp,
        Method::RurvHaarBasic,
        Method::RurvRosBasic,
        Method::RvluMinNorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::QrBasic => "qr-basic",
            Method::Qrcp => "qrcp",
            Method::RurvHaarBasic => "rurv-haar-basic",
            Method::RurvRosBasic => "rurv-ros-basic",
            Method::RvluMinNorm => "rvlu-minnorm",
            Method::QrOverdet => "qr-overdet",
            Method::RurvRosOverdet => "rurv-ros-overdet",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown solver method '{s}'")))
    }
}

/// Wall-clock split of one solve.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimings {
    pub mix: Duration,
    pub factor: Duration,
    pub solve: Duration,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.mix + self.factor + self.solve
    }
}

#[derive(Clone, Debug)]
pub struct LsSolution {
    pub x: Vec<f64>,
    /// `||A x - b||_2`.
    pub residual_norm: f64,
    pub solution_norm: f64,
    pub method: Method,
    /// Solution in mixed (or pivoted) coordinates before `V^T` is applied.
    /// Absent for the minimum-norm solver.
    pub y: Option<Vec<f64>>,
    pub timings: PhaseTimings,
}

/// Dispatches on `method`: `*-overdet` and `qrcp` with `m >= n` go to the
/// overdetermined solver, `rvlu-minnorm` to the minimum-norm solver, the rest
/// to the basic solver.
pub fn solve(a: &RealMatrix, b: &[f64], method: Method, opts: RosOptions, rng: &mut Rng) -> Result<LsSolution> {
    match method {
        Method::RvluMinNorm => solve_min_norm_with(a, b, opts.num_mixes, rng),
        Method::QrOverdet | Method::RurvRosOverdet => solve_overdetermined_with(a, b, method, opts, rng),
        Method::Qrcp if a.rows() >= a.cols() => solve_overdetermined_with(a, b, method, opts, rng),
        _ => solve_basic_with(a, b, method, opts, rng),
    }
}

pub fn solve_overdetermined(a: &RealMatrix, b: &[f64], method: Method, rng: &mut Rng) -> Result<LsSolution> {
    solve_overdetermined_with(a, b, method, RosOptions::default(), rng)
}

pub fn solve_overdetermined_with(
    a: &RealMatrix,
    b: &[f64],
    method: Method,
    opts: RosOptions,
    rng: &mut Rng,
) -> Result<LsSolution> {
    let (m, n) = a.shape();
    check_rhs(a, b)?;
    if m < n {
        return Err(Error::invalid(format!("overdetermined solve needs m >= n, got {m}x{n}")));
    }
    let mut t = PhaseTimings::default();
    let (y, x) = match method {
        Method::QrOverdet => {
            let clock = Instant::now();
            let f = house_qr(a)?;
            t.factor = clock.elapsed();
            let clock = Instant::now();
            let y = triangular_ls(f.packed(), &f.apply_qt_vec(b)?, n)?;
            t.solve = clock.elapsed();
            (y.clone(), y)
        }
        Method::Qrcp => {
            let clock = Instant::now();
            let f = house_qrcp(a)?;
            t.factor = clock.elapsed();
            let clock = Instant::now();
            let y = triangular_ls(f.packed(), &f.apply_qt_vec(b)?, n)?;
            let x = f.perm().expect("pivoted factorization").scatter(&y);
            t.solve = clock.elapsed();
            (y, x)
        }
        Method::RurvRosOverdet => {
            let clock = Instant::now();
            let f = rurv_ros_with(a, opts, rng)?;
            t.factor = clock.elapsed();
            let clock = Instant::now();
            let y = triangular_ls(f.u.packed(), &f.u.apply_qt_vec(b)?, n)?;
            let mut x = y.clone();
            f.v.apply_vec(&mut x, true)?;
            t.solve = clock.elapsed();
            (y, x)
        }
        other => {
            return Err(Error::invalid(format!(
                "method '{other}' does not solve overdetermined systems"
            )))
        }
    };
    Ok(finish(a, b, x, Some(y), method, t))
}

pub fn solve_basic(a: &RealMatrix, b: &[f64], method: Method, rng: &mut Rng) -> Result<LsSolution> {
    solve_basic_with(a, b, method, RosOptions::default(), rng)
}

pub fn solve_basic_with(
    a: &RealMatrix,
    b: &[f64],
    method: Method,
    opts: RosOptions,
    rng: &mut Rng,
) -> Result<LsSolution> {
    let (m, n) = a.shape();
    check_rhs(a, b)?;
    if m >= n {
        return Err(Error::invalid(format!("basic solution needs m < n, got {m}x{n}")));
    }
    let mut t = PhaseTimings::default();
    let (y, x) = match method {
        Method::QrBasic => {
            let clock = Instant::now();
            let f = house_qr(&a.submatrix(0, m, 0, m))?;
            t.factor = clock.elapsed();
            let clock = Instant::now();
            let y = padded(triangular_ls(f.packed(), &f.apply_qt_vec(b)?, m)?, n);
            t.solve = clock.elapsed();
            (y.clone(), y)
        }
        Method::Qrcp => {
            let clock = Instant::now();
            let f = house_qrcp(a)?;
            t.factor = clock.elapsed();
            let clock = Instant::now();
            let y = padded(triangular_ls(f.packed(), &f.apply_qt_vec(b)?, m)?, n);
            let x = f.perm().expect("pivoted factorization").scatter(&y);
            t.solve = clock.elapsed();
            (y, x)
        }
        Method::RurvHaarBasic => {
            // Only the first m rows of the Haar V enter the leading block and
            // V^T (y1; 0). They are distributed as the transpose of the first
            // m columns of a Haar matrix, which is what is sampled here.
            let clock = Instant::now();
            let w = haar_columns(n, m, rng);
            let mixed = a.matmul(&w)?;
            t.mix = clock.elapsed();
            let clock = Instant::now();
            let f = house_qr(&mixed)?;
            t.factor = clock.elapsed();
            let clock = Instant::now();
            let y1 = triangular_ls(f.packed(), &f.apply_qt_vec(b)?, m)?;
            let x = w.matvec(&y1)?;
            t.solve = clock.elapsed();
            (padded(y1, n), x)
        }
        Method::RurvRosBasic => {
            let clock = Instant::now();
            let (mixed, v): (RealMatrix, RosOperator) = mix_and_sort(a, opts, rng)?;
            t.mix = clock.elapsed();
            let clock = Instant::now();
            let f = house_qr(&mixed.submatrix(0, m, 0, m))?;
            t.factor = clock.elapsed();
            let clock = Instant::now();
            let y = padded(triangular_ls(f.packed(), &f.apply_qt_vec(b)?, m)?, n);
            let mut x = y.clone();
            v.apply_t_vec(&mut x)?;
            t.solve = clock.elapsed();
            (y, x)
        }
        other => {
            return Err(Error::invalid(format!(
                "method '{other}' does not compute a basic solution"
            )))
        }
    };
    Ok(finish(a, b, x, Some(y), method, t))
}

pub fn solve_min_norm(a: &RealMatrix, b: &[f64], rng: &mut Rng) -> Result<LsSolution> {
    solve_min_norm_with(a, b, 1, rng)
}

pub fn solve_min_norm_with(a: &RealMatrix, b: &[f64], num_mixes: usize, rng: &mut Rng) -> Result<LsSolution> {
    let (m, n) = a.shape();
    check_rhs(a, b)?;
    if m >= n {
        return Err(Error::invalid(format!("minimum-norm solve needs m < n, got {m}x{n}")));
    }
    let mut t = PhaseTimings::default();
    let clock = Instant::now();
    let f = rvlu_ros(a, num_mixes, rng)?;
    t.factor = clock.elapsed();

    let clock = Instant::now();
    check_rank(&f.l.diag())?;
    let mut vb = b.to_vec();
    f.v.apply_vec(&mut vb, false)?;
    let z = forward_substitute(&f.l, &vb)?;
    let x = f.u.apply_q_vec(&padded(z, n))?;
    t.solve = clock.elapsed();
    Ok(finish(a, b, x, None, Method::RvluMinNorm, t))
}

fn check_rhs(a: &RealMatrix, b: &[f64]) -> Result<()> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::invalid(format!("empty {}x{} system", a.rows(), a.cols())));
    }
    if b.len() != a.rows() {
        return Err(Error::shape(
            "least squares",
            format!("rhs of length {}", a.rows()),
            format!("length {}", b.len()),
        ));
    }
    if let Some(i) = b.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    Ok(())
}

/// Errors on the first diagonal entry with `|d_i| < k * eps * |d_0|`.
fn check_rank(diag: &[f64]) -> Result<()> {
    let k = diag.len();
    let threshold = k as f64 * f64::EPSILON * diag.first().map_or(0.0, |d| d.abs());
    match diag.iter().position(|d| d.abs() < threshold || *d == 0.0) {
        Some(index) => Err(Error::RankDeficient {
            index,
            value: diag[index].abs(),
            threshold,
        }),
        None => Ok(()),
    }
}

/// Solves with the leading `k x k` triangle of a packed factor against the
/// first `k` entries of `qtb`.
fn triangular_ls(packed: &RealMatrix, qtb: &[f64], k: usize) -> Result<Vec<f64>> {
    let diag: Vec<f64> = (0..k).map(|i| packed[(i, i)]).collect();
    check_rank(&diag)?;
    let mut y = qtb[..k].to_vec();
    solve_upper_leading(packed, &mut y)?;
    Ok(y)
}

fn padded(mut y: Vec<f64>, n: usize) -> Vec<f64> {
    y.resize(n, 0.0);
    y
}

fn finish(a: &RealMatrix, b: &[f64], x: Vec<f64>, y: Option<Vec<f64>>, method: Method, timings: PhaseTimings) -> LsSolution {
    let residual_norm = residual(a, &x, b);
    LsSolution {
        solution_norm: blas::nrm2(&x),
        residual_norm,
        x,
        method,
        y,
        timings,
    }
}

/// `||A x - b||_2`.
pub fn residual(a: &RealMatrix, x: &[f64], b: &[f64]) -> f64 {
    let mut r = a.matvec(x).expect("solution length matches the matrix");
    blas::axpy(-1.0, b, &mut r);
    blas::nrm2(&r)
}
