//! Complex FFT: iterative radix-2 for powers of two, Bluestein's chirp-z
//! reduction to a power-of-two convolution otherwise.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Radix2,
    Bluestein,
}

/// Precomputed tables for one transform length. Read-only once built.
#[derive(Debug)]
pub struct FftPlan {
    len: usize,
    kind: Kind,
}

#[derive(Debug)]
enum Kind {
    Radix2 {
        /// `exp(-2 pi i k / n)` for `k < n / 2`.
        twiddles: Vec<Complex64>,
        bitrev: Vec<u32>,
    },
    Bluestein {
        inner: Arc<FftPlan>,
        /// `exp(-i pi k^2 / n)` for `k < n`.
        chirp: Vec<Complex64>,
        /// Forward transform of the conjugate chirp, wrapped to the inner length.
        kernel: Vec<Complex64>,
    },
}

fn unit(angle: f64) -> Complex64 {
    let (s, c) = angle.sin_cos();
    Complex64::new(c, s)
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("FFT of length 0"));
        }
        if len.is_power_of_two() {
            return Ok(Self::radix2(len));
        }
        let m = (2 * len - 1).next_power_of_two();
        let inner = plan(m)?;
        // k^2 mod 2n keeps the chirp angle small and exact.
        let two_n = 2 * len as u128;
        let chirp: Vec<Complex64> = (0..len as u128)
            .map(|k| unit(-PI * ((k * k) % two_n) as f64 / len as f64))
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..len {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.forward_in_place(&mut kernel);
        Ok(Self {
            len,
            kind: Kind::Bluestein {
                inner,
                chirp,
                kernel,
            },
        })
    }

    fn radix2(n: usize) -> Self {
        let twiddles = (0..n / 2)
            .map(|k| unit(-2.0 * PI * k as f64 / n as f64))
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Self {
            len: n,
            kind: Kind::Radix2 { twiddles, bitrev },
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn strategy(&self) -> Strategy {
        match self.kind {
            Kind::Radix2 { .. } => Strategy::Radix2,
            Kind::Bluestein { .. } => Strategy::Bluestein,
        }
    }

    /// Unnormalized forward DFT, `X_k = sum_j x_j exp(-2 pi i jk / n)`.
    pub fn forward_in_place(&self, x: &mut [Complex64]) {
        assert_eq!(x.len(), self.len, "FFT input length must match the plan");
        match &self.kind {
            Kind::Radix2 { twiddles, bitrev } => radix2_in_place(x, twiddles, bitrev),
            Kind::Bluestein {
                inner,
                chirp,
                kernel,
            } => {
                let m = inner.len();
                let mut work = vec![Complex64::new(0.0, 0.0); m];
                for ((w, xi), c) in work.iter_mut().zip(x.iter()).zip(chirp) {
                    *w = xi * c;
                }
                inner.forward_in_place(&mut work);
                for (w, k) in work.iter_mut().zip(kernel) {
                    *w *= k;
                }
                inner.inverse_in_place(&mut work);
                for ((xi, w), c) in x.iter_mut().zip(&work).zip(chirp) {
                    *xi = w * c;
                }
            }
        }
    }

    /// Inverse DFT including the `1/n` factor.
    pub fn inverse_in_place(&self, x: &mut [Complex64]) {
        for v in x.iter_mut() {
            *v = v.conj();
        }
        self.forward_in_place(x);
        let scale = 1.0 / self.len as f64;
        for v in x.iter_mut() {
            *v = v.conj() * scale;
        }
    }
}

fn radix2_in_place(x: &mut [Complex64], twiddles: &[Complex64], bitrev: &[u32]) {
    let n = x.len();
    for (i, &r) in bitrev.iter().enumerate() {
        let r = r as usize;
        if i < r {
            x.swap(i, r);
        }
    }
    let mut half = 1;
    while half < n {
        let stride = n / (2 * half);
        for block in x.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let t = *b * twiddles[k * stride];
                *b = *a - t;
                *a += t;
            }
        }
        half *= 2;
    }
}

/// Shared plan for length `n`, built once per process.
pub fn plan(n: usize) -> Result<Arc<FftPlan>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<FftPlan>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().expect("plan cache poisoned").get(&n) {
        return Ok(Arc::clone(p));
    }
    // Built outside the lock: Bluestein plans recurse into the cache.
    let built = Arc::new(FftPlan::new(n)?);
    let mut guard = cache.lock().expect("plan cache poisoned");
    Ok(Arc::clone(guard.entry(n).or_insert(built)))
}

pub fn fft(plan: &FftPlan, x: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(plan, x)?;
    let mut out = x.to_vec();
    plan.forward_in_place(&mut out);
    Ok(out)
}

pub fn ifft(plan: &FftPlan, x: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(plan, x)?;
    let mut out = x.to_vec();
    plan.inverse_in_place(&mut out);
    Ok(out)
}

fn check_len(plan: &FftPlan, x: &[Complex64]) -> Result<()> {
    if x.len() != plan.len() {
        return Err(Error::shape(
            "fft",
            format!("length {}", plan.len()),
            format!("length {}", x.len()),
        ));
    }
    Ok(())
}
