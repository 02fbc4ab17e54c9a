//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from xoshiro256++ seeded via
//! SplitMix64 (`seed_from_u64`). Independent streams for repeated
//! instantiations come from the generator's jump function, so stream `i` of
//! seed `s` is the same on every platform. Gaussians use the ziggurat sampler
//! of `rand_distr::StandardNormal`.

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

pub type Rng = Xoshiro256PlusPlus;

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Stream `index` of `seed`: the seeded generator advanced by `index` jumps
/// of 2^128 draws.
pub fn stream(seed: u64, index: u64) -> Rng {
    let mut rng = seeded(seed);
    for _ in 0..index {
        rng.jump();
    }
    rng
}

#[inline]
pub fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform on `[0, 1)`.
#[inline]
pub fn uniform(rng: &mut Rng) -> f64 {
    rand::Rng::random::<f64>(rng)
}
