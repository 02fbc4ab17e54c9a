//! Unblocked Householder QR, with and without column pivoting.
//!
//! The factorization is stored LAPACK-style: `R` occupies the upper
//! triangle of the packed matrix and the essential part of each reflector
//! `v_j` (whose leading entry is an implicit 1) sits below the diagonal.
//! `Q = H_0 H_1 ... H_{k-1}` with `H_j = I - tau_j v_j v_j^T`.

use crate::error::{Error, Result};
use crate::linalg::blas;
use crate::matrix::{Permutation, RealMatrix};

/// Which orthogonal factor to accumulate in [`HouseholderQR::form_q`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QShape {
    /// `m x m`
    Full,
    /// `m x min(m, n)` (or `m x k` for a partial factorization)
    Thin,
}

#[derive(Clone, Debug)]
pub struct HouseholderQR {
    packed: RealMatrix,
    taus: Vec<f64>,
    perm: Option<Permutation>,
}

/// Unpivoted Householder QR, `A = QR`.
pub fn house_qr(a: &RealMatrix) -> Result<HouseholderQR> {
    let k = a.rows().min(a.cols());
    house_qr_steps(a.clone(), k)
}

/// Runs the first `steps` Householder steps on `a`, leaving the trailing
/// `(m - steps) x (n - steps)` block updated but unfactored.
pub fn house_qr_steps(mut a: RealMatrix, steps: usize) -> Result<HouseholderQR> {
    check_nonempty(&a)?;
    let (m, n) = a.shape();
    if steps > m.min(n) {
        return Err(Error::invalid(format!(
            "cannot take {steps} Householder steps on a {m}x{n} matrix"
        )));
    }
    let mut taus = Vec::with_capacity(steps);
    for j in 0..steps {
        let tau = make_reflector(&mut a.col_mut(j)[j..]);
        apply_to_trailing(&mut a, j, tau);
        taus.push(tau);
    }
    Ok(HouseholderQR {
        packed: a,
        taus,
        perm: None,
    })
}

/// Householder QR with column pivoting, `A P = QR`.
///
/// At step `j` the remaining column of largest norm is moved to position `j`
/// (lowest index wins ties). Squared column norms are downdated after each
/// step and recomputed from scratch once a downdated value falls below
/// `sqrt(eps)` times the value it was last computed at.
pub fn house_qrcp(a: &RealMatrix) -> Result<HouseholderQR> {
    check_nonempty(a)?;
    let mut a = a.clone();
    let (m, n) = a.shape();
    let k = m.min(n);
    let tol = f64::EPSILON.sqrt();

    let mut norms: Vec<f64> = (0..n).map(|j| blas::sum_sq(a.col(j))).collect();
    let mut reference = norms.clone();
    let mut perm = Permutation::identity(n);
    let mut taus = Vec::with_capacity(k);

    for j in 0..k {
        let mut p = j;
        for jj in (j + 1)..n {
            if norms[jj] > norms[p] {
                p = jj;
            }
        }
        if p != j {
            a.swap_cols(j, p);
            norms.swap(j, p);
            reference.swap(j, p);
            perm.swap(j, p);
        }

        let tau = make_reflector(&mut a.col_mut(j)[j..]);
        apply_to_trailing(&mut a, j, tau);
        taus.push(tau);

        for jj in (j + 1)..n {
            if norms[jj] == 0.0 {
                continue;
            }
            let r = a[(j, jj)];
            let downdated = (norms[jj] - r * r).max(0.0);
            if downdated <= tol * reference[jj] {
                let exact = blas::sum_sq(&a.col(jj)[j + 1..]);
                norms[jj] = exact;
                reference[jj] = exact;
            } else {
                norms[jj] = downdated;
            }
        }
    }

    Ok(HouseholderQR {
        packed: a,
        taus,
        perm: Some(perm),
    })
}

/// `Q^T B` without forming `Q`.
pub fn apply_qt(f: &HouseholderQR, b: &RealMatrix) -> Result<RealMatrix> {
    f.apply_qt(b)
}

/// Accumulates `Q` explicitly.
pub fn form_q(f: &HouseholderQR, shape: QShape) -> RealMatrix {
    f.form_q(shape)
}

fn check_nonempty(a: &RealMatrix) -> Result<()> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::invalid(format!(
            "QR needs m, n >= 1, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

/// Turns `x` into `beta e_1` by a reflector `I - tau v v^T`, storing `beta` in
/// `x[0]` and the essential part of `v` in `x[1..]`. Returns `tau`.
///
/// The sign of `beta` is opposite to `x[0]` so the update never cancels. When
/// `x[1..]` is already zero the reflector is the identity (`tau = 0`).
pub(crate) fn make_reflector(x: &mut [f64]) -> f64 {
    let alpha = x[0];
    let xnorm = blas::nrm2(&x[1..]);
    if xnorm == 0.0 {
        return 0.0;
    }
    let beta = -alpha.hypot(xnorm).copysign(alpha);
    let tau = (beta - alpha) / beta;
    blas::scal(1.0 / (alpha - beta), &mut x[1..]);
    x[0] = beta;
    tau
}

/// Applies `I - tau v v^T` (with `v[0] = 1` implicit) to `c`.
#[inline]
pub(crate) fn apply_reflector(v_tail: &[f64], tau: f64, c: &mut [f64]) {
    if tau == 0.0 {
        return;
    }
    let (head, tail) = c.split_first_mut().expect("non-empty column");
    let w = tau * (*head + blas::dot(v_tail, tail));
    *head -= w;
    blas::axpy(-w, v_tail, tail);
}

fn apply_to_trailing(a: &mut RealMatrix, j: usize, tau: f64) {
    if tau == 0.0 {
        return;
    }
    let m = a.rows();
    let (left, right) = a.as_mut_slice().split_at_mut((j + 1) * m);
    let v_tail = &left[j * m + j + 1..];
    for col in right.chunks_exact_mut(m) {
        apply_reflector(v_tail, tau, &mut col[j..]);
    }
}

impl HouseholderQR {
    pub fn rows(&self) -> usize {
        self.packed.rows()
    }

    pub fn cols(&self) -> usize {
        self.packed.cols()
    }

    /// Number of reflectors (`min(m, n)` for a complete factorization).
    pub fn steps(&self) -> usize {
        self.taus.len()
    }

    pub fn packed(&self) -> &RealMatrix {
        &self.packed
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    /// Column permutation, present iff the factorization was pivoted.
    pub fn perm(&self) -> Option<&Permutation> {
        self.perm.as_ref()
    }

    /// `steps x n` upper-trapezoidal `R`; entries below the diagonal are exactly zero.
    pub fn r(&self) -> RealMatrix {
        let k = self.steps();
        let n = self.cols();
        RealMatrix::from_fn(k, n, |i, j| if i <= j { self.packed[(i, j)] } else { 0.0 })
    }

    /// `m x n` `R` padded with zero rows.
    pub fn r_full(&self) -> RealMatrix {
        let k = self.steps();
        RealMatrix::from_fn(self.rows(), self.cols(), |i, j| {
            if i <= j && i < k {
                self.packed[(i, j)]
            } else {
                0.0
            }
        })
    }

    /// The block left unfactored by a partial factorization (rows and columns `steps..`).
    pub fn trailing_block(&self) -> RealMatrix {
        let k = self.steps();
        self.packed.submatrix(k, self.rows(), k, self.cols())
    }

    fn reflector(&self, j: usize) -> &[f64] {
        &self.packed.col(j)[j + 1..]
    }

    /// Applies `Q^T` (when `transpose`) or `Q` to every column of `b` in place.
    pub(crate) fn apply_in_place(&self, b: &mut RealMatrix, transpose: bool) {
        let m = self.rows();
        debug_assert_eq!(b.rows(), m);
        let k = self.steps();
        for c in 0..b.cols() {
            let col = b.col_mut(c);
            if transpose {
                for j in 0..k {
                    apply_reflector(self.reflector(j), self.taus[j], &mut col[j..]);
                }
            } else {
                for j in (0..k).rev() {
                    apply_reflector(self.reflector(j), self.taus[j], &mut col[j..]);
                }
            }
        }
    }

    fn check_rows(&self, op: &'static str, rows: usize) -> Result<()> {
        if rows != self.rows() {
            return Err(Error::shape(
                op,
                format!("{} rows", self.rows()),
                format!("{rows} rows"),
            ));
        }
        Ok(())
    }

    pub fn apply_qt(&self, b: &RealMatrix) -> Result<RealMatrix> {
        self.check_rows("apply_qt", b.rows())?;
        let mut out = b.clone();
        self.apply_in_place(&mut out, true);
        Ok(out)
    }

    pub fn apply_q(&self, b: &RealMatrix) -> Result<RealMatrix> {
        self.check_rows("apply_q", b.rows())?;
        let mut out = b.clone();
        self.apply_in_place(&mut out, false);
        Ok(out)
    }

    pub fn apply_qt_vec(&self, b: &[f64]) -> Result<Vec<f64>> {
        Ok(self.apply_qt(&RealMatrix::from_column(b))?.into_vec())
    }

    pub fn apply_q_vec(&self, b: &[f64]) -> Result<Vec<f64>> {
        Ok(self.apply_q(&RealMatrix::from_column(b))?.into_vec())
    }

    pub fn form_q(&self, shape: QShape) -> RealMatrix {
        let m = self.rows();
        let width = match shape {
            QShape::Full => m,
            QShape::Thin => self.steps(),
        };
        let mut q = RealMatrix::eye(m, width);
        self.apply_in_place(&mut q, false);
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgen::gaussian_matrix;
    use crate::rng::stream;

    const EPS: f64 = f64::EPSILON;

    fn orthogonality_error(q: &RealMatrix) -> f64 {
        let qtq = q.t_matmul(q).unwrap();
        qtq.sub(&RealMatrix::identity(q.cols())).unwrap().frobenius_norm()
    }

    fn reconstruction_error(a: &RealMatrix, f: &HouseholderQR) -> f64 {
        let qr = f.apply_q(&f.r_full()).unwrap();
        let target = match f.perm() {
            Some(p) => a.gather_cols(p),
            None => a.clone(),
        };
        qr.sub(&target).unwrap().frobenius_norm() / a.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn column_norm_case() {
        let a = RealMatrix::from_rows(&[&[3.0], &[4.0]]);
        let f = house_qr(&a).unwrap();
        assert!((f.r()[(0, 0)].abs() - 5.0).abs() < 1e-15);
        assert!(f.taus()[0] >= 0.0 && f.taus()[0] <= 2.0);
    }

    #[test]
    fn identity_is_fixed() {
        let f = house_qr(&RealMatrix::identity(3)).unwrap();
        let r = f.r();
        let q = f.form_q(QShape::Full);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(r[(i, j)].abs(), expect);
                assert_eq!(q[(i, j)].abs(), expect);
            }
        }
        assert!(f.taus().iter().all(|&t| t == 0.0));
    }

    #[test]
    fn gaussian_4x3_seed_42_reconstructs() {
        let a = gaussian_matrix(4, 3, &mut stream(42, 0));
        let f = house_qr(&a).unwrap();
        assert!(reconstruction_error(&a, &f) <= 1e-14);
        let r = f.r();
        for j in 0..3 {
            for i in (j + 1)..3 {
                assert_eq!(r[(i, j)].to_bits(), 0.0f64.to_bits());
            }
        }
    }

    #[test]
    fn empty_input_is_invalid() {
        assert!(matches!(
            house_qr(&RealMatrix::zeros(0, 3)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            house_qrcp(&RealMatrix::zeros(2, 0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn zero_column_gives_identity_reflector() {
        let a = RealMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 2.0], &[0.0, 3.0]]);
        let f = house_qr(&a).unwrap();
        assert_eq!(f.taus()[0], 0.0);
        assert!((f.r()[(1, 1)].abs() - 13f64.sqrt()).abs() < 1e-14);
        assert!(reconstruction_error(&a, &f) < 1e-15);
    }

    #[test]
    fn qrcp_larger_column_first() {
        let a = RealMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 0.0]]);
        let f = house_qrcp(&a).unwrap();
        assert_eq!(f.perm().unwrap().as_slice(), &[1, 0]);
        assert!((f.r()[(0, 0)].abs() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn qrcp_diagonal_pivoting() {
        let a = RealMatrix::from_diag(&[1.0, 3.0, 2.0]);
        let f = house_qrcp(&a).unwrap();
        assert_eq!(f.perm().unwrap().as_slice(), &[1, 2, 0]);
        let d: Vec<f64> = f.r().diag().iter().map(|v| v.abs()).collect();
        assert_eq!(d, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn qrcp_ties_keep_lowest_index() {
        let f = house_qrcp(&RealMatrix::identity(4)).unwrap();
        assert!(f.perm().unwrap().is_identity());
    }

    #[test]
    fn apply_qt_cases() {
        let f = house_qr(&RealMatrix::identity(3)).unwrap();
        let y = f.apply_qt_vec(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(y.iter().map(|v| v.abs()).collect::<Vec<_>>(), vec![0.0, 1.0, 0.0]);

        let f = house_qr(&RealMatrix::from_rows(&[&[3.0], &[4.0]])).unwrap();
        let y = f.apply_qt_vec(&[3.0, 4.0]).unwrap();
        assert!((y[0].abs() - 5.0).abs() < 1e-14);
        assert!(y[1].abs() < 1e-14);

        assert!(matches!(
            f.apply_qt_vec(&[1.0, 2.0, 3.0]),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn apply_qt_inverts_form_q_6x4_seed_7() {
        let a = gaussian_matrix(6, 4, &mut stream(7, 0));
        let f = house_qr(&a).unwrap();
        let q = f.form_q(QShape::Full);
        let qtq = apply_qt(&f, &q).unwrap();
        let err = qtq.sub(&RealMatrix::identity(6)).unwrap().max_abs();
        assert!(err <= 1e-13, "{err}");
    }

    #[test]
    fn form_q_cases() {
        let q = form_q(&house_qr(&RealMatrix::identity(2)).unwrap(), QShape::Full);
        assert_eq!(q.as_slice().iter().map(|v| v.abs()).collect::<Vec<_>>(), vec![1.0, 0.0, 0.0, 1.0]);

        let q = form_q(&house_qr(&RealMatrix::from_rows(&[&[3.0], &[4.0]])).unwrap(), QShape::Thin);
        assert_eq!(q.shape(), (2, 1));
        assert!((q[(0, 0)].abs() - 0.6).abs() < 1e-15);
        assert!((q[(1, 0)].abs() - 0.8).abs() < 1e-15);
        assert_eq!(q[(0, 0)].signum(), q[(1, 0)].signum());

        let a = gaussian_matrix(5, 5, &mut stream(3, 0));
        let q = form_q(&house_qr(&a).unwrap(), QShape::Full);
        assert!(orthogonality_error(&q) <= 1e-13);
    }

    #[test]
    fn kahan_is_not_pivoted() {
        let a = crate::matgen::gen_kahan(20, 0.1, 1e-7).unwrap();
        let f = house_qrcp(&a).unwrap();
        assert!(f.perm().unwrap().is_identity());
    }

    #[test]
    fn partial_steps_leave_trailing_block() {
        let a = gaussian_matrix(6, 5, &mut stream(11, 0));
        let full = house_qr(&a).unwrap();
        let part = house_qr_steps(a.clone(), 2).unwrap();
        assert_eq!(part.steps(), 2);
        assert_eq!(part.r().shape(), (2, 5));
        assert_eq!(part.trailing_block().shape(), (4, 3));
        // The first two rows of R match the complete factorization bit for bit.
        for j in 0..5 {
            for i in 0..2 {
                assert_eq!(part.r()[(i, j)].to_bits(), full.r()[(i, j)].to_bits());
            }
        }
        assert!(house_qr_steps(a, 6).is_err());
    }

    #[test]
    fn reconstruction_and_orthogonality_random_shapes() {
        for seed in 0..40u64 {
            let m = 1 + (seed as usize * 7) % 23;
            let n = 1 + (seed as usize * 5) % 19;
            let a = gaussian_matrix(m, n, &mut stream(seed, 1));
            for f in [house_qr(&a).unwrap(), house_qrcp(&a).unwrap()] {
                let tol = 100.0 * m.max(n) as f64 * EPS;
                assert!(reconstruction_error(&a, &f) <= tol);
                let q = f.form_q(QShape::Full);
                assert!(orthogonality_error(&q) <= 100.0 * m.min(n) as f64 * EPS);
                assert!(f.taus().iter().all(|&t| (0.0..=2.0).contains(&t)));
            }
        }
    }
}
