//! Dense kernels: Householder QR (plain and column-pivoted), triangular
//! solves, and the one-sided Jacobi SVD used as the reference SVD.

pub(crate) mod blas;
mod householder;
mod jacobi;
mod triangular;

pub use householder::{
    apply_qt, form_q, house_qr, house_qr_steps, house_qrcp, HouseholderQR, QShape,
};
pub use jacobi::{
    jacobi_svd, jacobi_svd_with, norm2, singular_values, JacobiOptions, SvdResult, MAX_SWEEPS,
};
pub use triangular::{back_substitute, forward_substitute};

pub(crate) use triangular::solve_upper_leading;
