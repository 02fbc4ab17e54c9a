//! Implicit random-orthogonal-system mixing `V = P * (F D_1)(F D_2)...(F D_N)`,
//! where `F` is the orthonormal DCT-II, each `D_i` a random sign diagonal and
//! `P` an optional gather permutation (`(P x)_j = x[perm[j]]`).

use rand::Rng as _;

use super::dct::DctPlan;
use crate::error::{Error, Result};
use crate::matrix::{Permutation, RealMatrix};
use crate::rng::Rng;

/// Largest dimension `materialize` will expand to a dense matrix.
pub const MATERIALIZE_LIMIT: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct RosOperator {
    n: usize,
    /// `signs[i]` is the diagonal of `D_{i+1}`; entries are exactly +-1.
    signs: Vec<Vec<f64>>,
    presort: Option<Permutation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RosMode {
    /// `A V^T`
    RightTranspose,
    /// `A V`
    Right,
    /// `V A`
    Left,
    /// `V^T A`
    LeftTranspose,
}

pub fn ros_sample(n: usize, num_mixes: usize, rng: &mut Rng) -> Result<RosOperator> {
    if n == 0 {
        return Err(Error::invalid("ROS operator of dimension 0"));
    }
    if num_mixes == 0 {
        return Err(Error::invalid("ROS operator needs at least one mix"));
    }
    let signs = (0..num_mixes)
        .map(|_| {
            (0..n)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect()
        })
        .collect();
    Ok(RosOperator {
        n,
        signs,
        presort: None,
    })
}

pub fn ros_apply(v: &RosOperator, a: &RealMatrix, mode: RosMode) -> Result<RealMatrix> {
    let (m, n) = a.shape();
    let dim = match mode {
        RosMode::RightTranspose | RosMode::Right => n,
        RosMode::Left | RosMode::LeftTranspose => m,
    };
    if dim != v.n {
        return Err(Error::shape(
            "ros_apply",
            format!("mixed dimension {}", v.n),
            format!("{m}x{n} matrix"),
        ));
    }
    let mut plan = DctPlan::new(v.n)?;
    match mode {
        RosMode::Left | RosMode::LeftTranspose => {
            let mut out = a.clone();
            v.apply_columns(&mut out, mode == RosMode::LeftTranspose, &mut plan);
            Ok(out)
        }
        // (A V^T)^T = V A^T: mix the columns of the transpose.
        RosMode::RightTranspose | RosMode::Right => {
            let mut t = a.transpose();
            v.apply_columns(&mut t, mode == RosMode::Right, &mut plan);
            Ok(t.transpose())
        }
    }
}

impl RosOperator {
    /// Operator with explicit sign diagonals; every entry must be +-1.
    pub fn from_signs(signs: Vec<Vec<f64>>) -> Result<Self> {
        let n = signs.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::invalid("ROS operator needs at least one non-empty sign vector"));
        }
        if signs.iter().any(|s| s.len() != n || s.iter().any(|&d| d != 1.0 && d != -1.0)) {
            return Err(Error::invalid("sign vectors must have equal length and entries +-1"));
        }
        Ok(Self {
            n,
            signs,
            presort: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_mixes(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[Vec<f64>] {
        &self.signs
    }

    pub fn presort(&self) -> Option<&Permutation> {
        self.presort.as_ref()
    }

    pub fn set_presort(&mut self, perm: Option<Permutation>) -> Result<()> {
        if let Some(p) = &perm {
            if p.len() != self.n {
                return Err(Error::shape(
                    "set_presort",
                    format!("permutation of length {}", self.n),
                    format!("length {}", p.len()),
                ));
            }
        }
        self.presort = perm;
        Ok(())
    }

    /// `x <- V x`.
    pub fn apply_vec(&self, x: &mut [f64]) -> Result<()> {
        self.check_vec(x)?;
        self.forward(x, &mut DctPlan::new(self.n)?);
        Ok(())
    }

    /// `x <- V^T x`.
    pub fn apply_t_vec(&self, x: &mut [f64]) -> Result<()> {
        self.check_vec(x)?;
        self.backward(x, &mut DctPlan::new(self.n)?);
        Ok(())
    }

    /// Dense `V`, for small dimensions and testing.
    pub fn materialize(&self) -> Result<RealMatrix> {
        if self.n > MATERIALIZE_LIMIT {
            return Err(Error::invalid(format!(
                "refusing to materialize a {0}x{0} mixing matrix (limit {MATERIALIZE_LIMIT})",
                self.n
            )));
        }
        let mut v = RealMatrix::identity(self.n);
        self.apply_columns(&mut v, false, &mut DctPlan::new(self.n)?);
        Ok(v)
    }

    fn check_vec(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::shape(
                "ros apply",
                format!("length {}", self.n),
                format!("length {}", x.len()),
            ));
        }
        Ok(())
    }

    fn apply_columns(&self, a: &mut RealMatrix, transpose: bool, plan: &mut DctPlan) {
        for j in 0..a.cols() {
            let col = a.col_mut(j);
            if transpose {
                self.backward(col, plan);
            } else {
                self.forward(col, plan);
            }
        }
    }

    fn forward(&self, x: &mut [f64], plan: &mut DctPlan) {
        for d in self.signs.iter().rev() {
            flip(x, d);
            plan.dct2_in_place(x);
        }
        if let Some(p) = &self.presort {
            let y = p.gather(x);
            x.copy_from_slice(&y);
        }
    }

    fn backward(&self, x: &mut [f64], plan: &mut DctPlan) {
        if let Some(p) = &self.presort {
            let y = p.scatter(x);
            x.copy_from_slice(&y);
        }
        for d in &self.signs {
            plan.dct3_in_place(x);
            flip(x, d);
        }
    }
}

#[inline]
fn flip(x: &mut [f64], d: &[f64]) {
    for (xi, di) in x.iter_mut().zip(d) {
        *xi *= di;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgen::gaussian_matrix;
    use crate::rng::stream;
    use proptest::prelude::*;

    const EPS: f64 = f64::EPSILON;
    const MODES: [RosMode; 4] = [
        RosMode::RightTranspose,
        RosMode::Right,
        RosMode::Left,
        RosMode::LeftTranspose,
    ];

    #[test]
    fn dimension_one_signs() {
        for seed in 0..8 {
            let v = ros_sample(1, 1, &mut stream(seed, 0)).unwrap();
            assert!(v.signs()[0][0] == 1.0 || v.signs()[0][0] == -1.0);
        }
        assert!(ros_sample(0, 1, &mut stream(0, 0)).is_err());
        assert!(ros_sample(3, 0, &mut stream(0, 0)).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_balanced() {
        let a = ros_sample(4096, 1, &mut stream(11, 0)).unwrap();
        let b = ros_sample(4096, 1, &mut stream(11, 0)).unwrap();
        assert_eq!(a, b);
        let mean = a.signs()[0].iter().sum::<f64>() / 4096.0;
        assert!(mean.abs() <= 0.05, "{mean}");
    }

    #[test]
    fn identity_signs_give_dct3_matrix() {
        let n = 6;
        let v = RosOperator::from_signs(vec![vec![1.0; n]]).unwrap();
        let out = ros_apply(&v, &RealMatrix::identity(n), RosMode::RightTranspose).unwrap();
        assert!((out.frobenius_norm() - (n as f64).sqrt()).abs() < 1e-14);
        // I * F^T is the DCT-III matrix: column j is dct3(e_j).
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let want = crate::transforms::dct3(&e).unwrap();
            for (i, w) in want.iter().enumerate() {
                assert!((out[(i, j)] - w).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn two_by_two_by_hand() {
        // F = [[1, 1], [1, -1]] / sqrt 2, D = diag(1, -1): V = F D, A V^T = D F^T.
        let v = RosOperator::from_signs(vec![vec![1.0, -1.0]]).unwrap();
        let out = ros_apply(&v, &RealMatrix::identity(2), RosMode::RightTranspose).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let want = RealMatrix::from_rows(&[&[h, h], &[-h, h]]);
        assert!(out.sub(&want).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn small_dense_equivalence() {
        for n in 1..=8 {
            let mut rng = stream(n as u64, 2);
            let mut v = ros_sample(n, 2, &mut rng).unwrap();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.reverse();
            v.set_presort(Some(Permutation::from_vec(perm).unwrap())).unwrap();
            let dense = v.materialize().unwrap();
            let a = gaussian_matrix(n, n, &mut rng);
            let cases = [
                (RosMode::RightTranspose, a.matmul_t(&dense).unwrap()),
                (RosMode::Right, a.matmul(&dense).unwrap()),
                (RosMode::Left, dense.matmul(&a).unwrap()),
                (RosMode::LeftTranspose, dense.t_matmul(&a).unwrap()),
            ];
            for (mode, want) in cases {
                let got = ros_apply(&v, &a, mode).unwrap();
                assert!(got.sub(&want).unwrap().max_abs() <= 1e-13, "n={n} {mode:?}");
            }
            let vtv = dense.t_matmul(&dense).unwrap();
            assert!(vtv.sub(&RealMatrix::identity(n)).unwrap().frobenius_norm() < 1e-14);
        }
    }

    #[test]
    fn shape_mismatch() {
        let v = ros_sample(3, 1, &mut stream(0, 0)).unwrap();
        let a = RealMatrix::zeros(4, 5);
        for mode in MODES {
            assert!(matches!(ros_apply(&v, &a, mode), Err(Error::ShapeMismatch { .. })));
        }
        assert!(v.clone().set_presort(Some(Permutation::identity(2))).is_err());
    }

    #[test]
    fn transpose_trick_matches_row_by_row() {
        let mut rng = stream(5, 0);
        let v = ros_sample(37, 2, &mut rng).unwrap();
        let a = gaussian_matrix(9, 37, &mut rng);
        let got = ros_apply(&v, &a, RosMode::RightTranspose).unwrap();
        let scale = a.max_abs();
        for i in 0..9 {
            let mut row = a.row(i);
            v.apply_vec(&mut row).unwrap();
            for (j, r) in row.iter().enumerate() {
                assert!((got[(i, j)] - r).abs() <= 10.0 * EPS * scale);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn round_trip_and_norm(m in 1usize..12, n in 1usize..40, mixes in 1usize..4, seed in 0u64..1000) {
            let mut rng = stream(seed, 0);
            let v = ros_sample(n, mixes, &mut rng).unwrap();
            let a = gaussian_matrix(m, n, &mut rng);
            let fro = a.frobenius_norm();
            let mixed = ros_apply(&v, &a, RosMode::RightTranspose).unwrap();
            let back = ros_apply(&v, &mixed, RosMode::Right).unwrap();
            let log2n = (n as f64).log2().max(1.0);
            let tol = 100.0 * mixes as f64 * log2n * EPS * fro;
            prop_assert!(back.sub(&a).unwrap().frobenius_norm() <= tol);

            let at = a.transpose();
            for mode in MODES {
                let input = if matches!(mode, RosMode::Left | RosMode::LeftTranspose) { &at } else { &a };
                let out = ros_apply(&v, input, mode).unwrap();
                prop_assert!((out.frobenius_norm() - fro).abs() <= 1e-12 * fro);
            }
        }
    }
}
