//! Dense column-major matrices and permutations.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::linalg::blas;

/// Dense real matrix stored column-major: entry `(i, j)` lives at `data[i + j * rows]`.
#[derive(Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    /// Wraps column-major data, rejecting wrong lengths and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                "RealMatrix::new",
                format!("{} values", rows * cols),
                format!("{} values", data.len()),
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos % rows.max(1),
                col: pos / rows.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::eye(n, n)
    }

    /// Rectangular identity: ones on the main diagonal.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row slices. Panics on ragged input; meant for literals.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        let mut out = Self::zeros(m, n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "ragged row {i}");
            for (j, &v) in row.iter().enumerate() {
                assert!(v.is_finite(), "non-finite entry at ({i}, {j})");
                out[(i, j)] = v;
            }
        }
        out
    }

    /// Builds a matrix entrywise. Panics if `f` yields a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                let v = f(i, j);
                assert!(v.is_finite(), "non-finite entry at ({i}, {j})");
                data.push(v);
            }
        }
        Self { rows, cols, data }
    }

    /// Single-column matrix holding `v`.
    pub fn from_column(v: &[f64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        let r = self.rows;
        &mut self.data[j * r..(j + 1) * r]
    }

    /// Mutable views of two distinct columns.
    pub(crate) fn two_cols_mut(&mut self, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
        assert_ne!(p, q);
        let r = self.rows;
        if p < q {
            let (lo, hi) = self.data.split_at_mut(q * r);
            (&mut lo[p * r..(p + 1) * r], &mut hi[..r])
        } else {
            let (lo, hi) = self.data.split_at_mut(p * r);
            (&mut hi[..r], &mut lo[q * r..(q + 1) * r])
        }
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn swap_cols(&mut self, p: usize, q: usize) {
        if p != q {
            let (a, b) = self.two_cols_mut(p, q);
            a.swap_with_slice(b);
        }
    }

    pub fn transpose(&self) -> Self {
        let (m, n) = self.shape();
        let mut out = Self::zeros(n, m);
        for j in 0..n {
            let c = self.col(j);
            for (i, &v) in c.iter().enumerate() {
                out.data[j + i * n] = v;
            }
        }
        out
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Copy of the block `rows r0..r1`, `cols c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        assert!(r0 <= r1 && r1 <= self.rows && c0 <= c1 && c1 <= self.cols);
        let mut out = Self::zeros(r1 - r0, c1 - c0);
        for j in c0..c1 {
            out.col_mut(j - c0).copy_from_slice(&self.col(j)[r0..r1]);
        }
        out
    }

    /// Columns reordered so that column `j` of the result is column `perm[j]` of `self`.
    pub fn gather_cols(&self, perm: &Permutation) -> Self {
        assert_eq!(perm.len(), self.cols);
        let mut out = Self::zeros(self.rows, self.cols);
        for (j, &src) in perm.as_slice().iter().enumerate() {
            out.col_mut(j).copy_from_slice(self.col(src));
        }
        out
    }

    /// Inverse of [`gather_cols`](Self::gather_cols): column `perm[j]` of the result is column `j`.
    pub fn scatter_cols(&self, perm: &Permutation) -> Self {
        assert_eq!(perm.len(), self.cols);
        let mut out = Self::zeros(self.rows, self.cols);
        for (j, &dst) in perm.as_slice().iter().enumerate() {
            out.col_mut(dst).copy_from_slice(self.col(j));
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        blas::nrm2(&self.data)
    }

    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.cols).map(|j| blas::nrm2(self.col(j))).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `self * rhs`
    pub fn matmul(&self, rhs: &RealMatrix) -> Result<RealMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::shape(
                "matmul",
                format!("rhs with {} rows", self.cols),
                format!("{}x{}", rhs.rows, rhs.cols),
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in rhs.col(j).iter().enumerate() {
                if b != 0.0 {
                    blas::axpy(b, self.col(k), dst);
                }
            }
        }
        Ok(out)
    }

    /// `self * rhs^T`
    pub fn matmul_t(&self, rhs: &RealMatrix) -> Result<RealMatrix> {
        if self.cols != rhs.cols {
            return Err(Error::shape(
                "matmul_t",
                format!("rhs with {} cols", self.cols),
                format!("{}x{}", rhs.rows, rhs.cols),
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.rows);
        for k in 0..self.cols {
            let a = self.col(k);
            let b = rhs.col(k);
            for (j, &bjk) in b.iter().enumerate() {
                if bjk != 0.0 {
                    blas::axpy(bjk, a, &mut out.data[j * self.rows..(j + 1) * self.rows]);
                }
            }
        }
        Ok(out)
    }

    /// `self^T * rhs`
    pub fn t_matmul(&self, rhs: &RealMatrix) -> Result<RealMatrix> {
        if self.rows != rhs.rows {
            return Err(Error::shape(
                "t_matmul",
                format!("rhs with {} rows", self.rows),
                format!("{}x{}", rhs.rows, rhs.cols),
            ));
        }
        Ok(Self::from_fn(self.cols, rhs.cols, |i, j| {
            blas::dot(self.col(i), rhs.col(j))
        }))
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::shape(
                "matvec",
                format!("vector of length {}", self.cols),
                format!("length {}", x.len()),
            ));
        }
        let mut y = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                blas::axpy(xj, self.col(j), &mut y);
            }
        }
        Ok(y)
    }

    /// `self^T * x`
    pub fn t_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::shape(
                "t_matvec",
                format!("vector of length {}", self.rows),
                format!("length {}", x.len()),
            ));
        }
        Ok((0..self.cols).map(|j| blas::dot(self.col(j), x)).collect())
    }

    pub fn sub(&self, rhs: &RealMatrix) -> Result<RealMatrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::shape(
                "sub",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", rhs.rows, rhs.cols),
            ));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    pub fn scaled(&self, alpha: f64) -> RealMatrix {
        let mut out = self.clone();
        blas::scal(alpha, &mut out.data);
        out
    }

    /// Upper triangle (or trapezoid) with everything below the diagonal set to zero.
    pub fn upper_triangle(&self) -> RealMatrix {
        let mut out = self.clone();
        for j in 0..self.cols {
            for i in (j + 1)..self.rows {
                out[(i, j)] = 0.0;
            }
        }
        out
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

impl fmt::Debug for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RealMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                write!(f, "{:>12.5e} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// A permutation of `0..n` with gather semantics: position `j` takes element `map[j]`.
///
/// Applied to columns, `A.gather_cols(p)` is `A * P` where column `j` of the
/// product is column `map[j]` of `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn from_vec(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &k in &map {
            if k >= n || seen[k] {
                return Err(Error::invalid(format!(
                    "permutation map is not a bijection on 0..{n}"
                )));
            }
            seen[k] = true;
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &k)| i == k)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (j, &k) in self.map.iter().enumerate() {
            inv[k] = j;
        }
        Self { map: inv }
    }

    /// `y[j] = x[map[j]]`
    pub fn gather<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.map.len());
        self.map.iter().map(|&k| x[k]).collect()
    }

    /// `x[map[j]] = y[j]`, the inverse of [`gather`](Self::gather).
    pub fn scatter<T: Copy + Default>(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.map.len());
        let mut x = vec![T::default(); y.len()];
        for (j, &k) in self.map.iter().enumerate() {
            x[k] = y[j];
        }
        x
    }

    pub(crate) fn swap(&mut self, a: usize, b: usize) {
        self.map.swap(a, b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_data() {
        assert!(matches!(
            RealMatrix::new(2, 2, vec![1.0; 3]),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(matches!(
            RealMatrix::new(2, 2, vec![1.0, 2.0, f64::NAN, 0.0]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(matches!(
            RealMatrix::new(1, 1, vec![f64::INFINITY]),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn column_major_layout() {
        let a = RealMatrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        assert_eq!(a.as_slice(), &[1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
        assert_eq!(a.col(1), &[2.0, 5.0]);
        assert_eq!(a.transpose().col(1), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn products_agree() {
        let a = RealMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        let b = RealMatrix::from_rows(&[&[1.0, -1.0], &[2.0, 0.5]]);
        let ab = a.matmul(&b).unwrap();
        assert_eq!(ab, RealMatrix::from_rows(&[&[5.0, 0.0], &[11.0, -1.0], &[17.0, -2.0]]));
        assert_eq!(a.matmul_t(&b.transpose()).unwrap(), ab);
        assert_eq!(a.transpose().t_matmul(&b).unwrap(), ab);
        assert_eq!(a.matvec(&[1.0, 1.0]).unwrap(), vec![3.0, 7.0, 11.0]);
        assert_eq!(a.t_matvec(&[1.0, 0.0, 1.0]).unwrap(), vec![6.0, 8.0]);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn permutation_gather_scatter() {
        let p = Permutation::from_vec(vec![2, 0, 1]).unwrap();
        let x = [10.0, 20.0, 30.0];
        let y = p.gather(&x);
        assert_eq!(y, vec![30.0, 10.0, 20.0]);
        assert_eq!(p.scatter(&y), x.to_vec());
        assert_eq!(p.inverse().gather(&y), x.to_vec());
        assert!(Permutation::from_vec(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_vec(vec![0, 3]).is_err());

        let a = RealMatrix::from_rows(&[&[1.0, 2.0, 3.0]]);
        let g = a.gather_cols(&p);
        assert_eq!(g.as_slice(), &[3.0, 1.0, 2.0]);
        assert_eq!(g.scatter_cols(&p), a);
    }

    #[test]
    fn two_cols_mut_either_order() {
        let mut a = RealMatrix::from_rows(&[&[1.0, 2.0, 3.0]]);
        {
            let (x, y) = a.two_cols_mut(2, 0);
            assert_eq!((x[0], y[0]), (3.0, 1.0));
        }
        a.swap_cols(0, 2);
        assert_eq!(a.as_slice(), &[3.0, 2.0, 1.0]);
    }
}
