//! Fast trigonometric transforms and the ROS mixing operator built on them.

mod dct;
mod fft;
mod ros;

pub use dct::{dct2, dct3, DctPlan};
pub use fft::{fft, ifft, plan, FftPlan, Strategy};
pub use ros::{ros_apply, ros_sample, RosMode, RosOperator, MATERIALIZE_LIMIT};

use crate::matrix::RealMatrix;

/// Summary of the column 2-norms of a matrix. `stdev` is the sample
/// standard deviation (divisor `n - 1`), zero for a single column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColumnNormStats {
    pub mean: f64,
    pub stdev: f64,
    pub min: f64,
    pub max: f64,
}

pub fn column_norm_stats(a: &RealMatrix) -> ColumnNormStats {
    summarize(&a.column_norms())
}

pub(crate) fn summarize(values: &[f64]) -> ColumnNormStats {
    let n = values.len();
    if n == 0 {
        return ColumnNormStats { mean: 0.0, stdev: 0.0, min: 0.0, max: 0.0 };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let stdev = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    ColumnNormStats {
        mean,
        stdev,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}
