//! Orthonormal DCT-II and its transpose (DCT-III), each via one complex FFT
//! of the same length (Makhoul's even/odd reordering).
//!
//! `dct2(x)_k = w_k * sum_j x_j cos(pi k (2j + 1) / 2n)` with `w_0 = sqrt(1/n)`
//! and `w_k = sqrt(2/n)` otherwise.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::fft::{self, FftPlan};
use crate::error::{Error, Result};

/// Tables for both directions at one length, plus a scratch buffer.
pub struct DctPlan {
    n: usize,
    fft: Arc<FftPlan>,
    /// `exp(-i pi k / 2n)`.
    shift: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl DctPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("DCT of length 0"));
        }
        let shift = (0..n)
            .map(|k| {
                let (s, c) = (-PI * k as f64 / (2 * n) as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        Ok(Self {
            n,
            fft: fft::plan(n)?,
            shift,
            scratch: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn weights(&self) -> (f64, f64) {
        let n = self.n as f64;
        ((1.0 / n).sqrt(), (2.0 / n).sqrt())
    }

    pub fn dct2_in_place(&mut self, x: &mut [f64]) {
        let n = self.n;
        assert_eq!(x.len(), n, "DCT input length must match the plan");
        let (w0, w) = self.weights();
        let v = &mut self.scratch;
        for k in 0..n.div_ceil(2) {
            v[k] = Complex64::new(x[2 * k], 0.0);
        }
        for k in 0..n / 2 {
            v[n - 1 - k] = Complex64::new(x[2 * k + 1], 0.0);
        }
        self.fft.forward_in_place(v);
        for k in 0..n {
            let y = (self.shift[k] * v[k]).re;
            x[k] = if k == 0 { w0 * y } else { w * y };
        }
    }

    pub fn dct3_in_place(&mut self, x: &mut [f64]) {
        let n = self.n;
        assert_eq!(x.len(), n, "DCT input length must match the plan");
        let (w0, w) = self.weights();
        // Undo the output weights to recover the unnormalized coefficients c_k,
        // then V_k = exp(i pi k / 2n) (c_k - i c_{n-k}) with c_n = 0.
        let c = |k: usize| if k == 0 { x[0] / w0 } else { x[k] / w };
        let v = &mut self.scratch;
        v[0] = Complex64::new(c(0), 0.0);
        for (k, (vk, s)) in v.iter_mut().zip(&self.shift).enumerate().skip(1) {
            *vk = s.conj() * Complex64::new(c(k), -c(n - k));
        }
        self.fft.inverse_in_place(v);
        for k in 0..n.div_ceil(2) {
            x[2 * k] = v[k].re;
        }
        for k in 0..n / 2 {
            x[2 * k + 1] = v[n - 1 - k].re;
        }
    }
}

pub fn dct2(x: &[f64]) -> Result<Vec<f64>> {
    let mut out = x.to_vec();
    DctPlan::new(x.len())?.dct2_in_place(&mut out);
    Ok(out)
}

pub fn dct3(x: &[f64]) -> Result<Vec<f64>> {
    let mut out = x.to_vec();
    DctPlan::new(x.len())?.dct3_in_place(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal, stream};

    fn cosine_oracle(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let w = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
                w * x
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * (PI * k as f64 * (2 * j + 1) as f64 / (2 * n) as f64).cos())
                    .sum::<f64>()
            })
            .collect()
    }

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    fn nrm(a: &[f64]) -> f64 {
        a.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn constant_maps_to_first_coefficient() {
        let y = dct2(&[1.0; 4]).unwrap();
        assert!((y[0] - 2.0).abs() < 1e-15);
        assert!(y[1..].iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn unit_impulse_n4() {
        let y = dct2(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        // Frozen from the cosine-sum oracle.
        let want = [0.5, 0.6532814824381883, 0.5, 0.27059805007309845];
        assert!(dist(&y, &want) < 1e-15);
        assert!(dist(&cosine_oracle(&[1.0, 0.0, 0.0, 0.0]), &want) < 1e-15);
    }

    #[test]
    fn matches_oracle_and_inverts() {
        for n in (1..=20).chain([3, 5, 8, 17, 64, 100]) {
            let mut rng = stream(n as u64, 1);
            let x: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
            let y = dct2(&x).unwrap();
            assert!(dist(&y, &cosine_oracle(&x)) <= 1e-13 * nrm(&x), "n = {n}");
            let back = dct3(&y).unwrap();
            assert!(dist(&back, &x) <= 1e-13 * nrm(&x), "n = {n}");
        }
    }

    #[test]
    fn dct3_is_transpose() {
        // <dct2 x, y> = <x, dct3 y>
        let n = 13;
        let mut rng = stream(4, 0);
        let x: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let y: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let lhs: f64 = dct2(&x).unwrap().iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(dct3(&y).unwrap()).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-13 * nrm(&x) * nrm(&y));
    }

    #[test]
    fn empty_rejected() {
        assert!(dct2(&[]).is_err());
    }
}
