//! Randomized URV factorizations with fast random-orthogonal-system mixing.
//!
//! Dense Householder kernels live in [`linalg`], the DCT-based mixing
//! operator in [`transforms`], the randomized factorizations in [`rurv`],
//! and the least-squares solvers built on them in [`lstsq`]. [`matgen`] and
//! [`diagnostics`] supply test matrices and rank-revealing measurements for
//! the experiment harness in [`cli`].

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod lstsq;
pub mod matgen;
pub mod matrix;
pub mod mmio;
pub mod rng;
pub mod rurv;
pub mod transforms;

pub use error::{Error, Result};
pub use matrix::{Permutation, RealMatrix};
