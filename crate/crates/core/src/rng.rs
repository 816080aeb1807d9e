//! Seed-derived random streams.
//!
//! Sample `i` of a seeded procedure always draws from `substream(seed, i)`,
//! so results do not depend on evaluation order or thread count.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::Mat;

pub type StreamRng = ChaCha8Rng;

pub fn substream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mixes a tag into a seed so that unrelated procedures sharing a user seed
/// draw from disjoint streams.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    // FNV-1a over the tag, folded into the seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    let mut z = seed ^ h;
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    // Column-major fill keeps the draw order fixed.
    let data: Vec<C64> = (0..n * n).map(|_| complex_gaussian(rng)).collect();
    Mat::from_column_slice(n, n, &data)
}

pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<C64> {
    loop {
        let v = DVector::from_iterator(n, (0..n).map(|_| complex_gaussian(rng)));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / C64::new(norm, 0.0);
        }
    }
}
