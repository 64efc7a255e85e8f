//! Seedable, splittable random streams.
//!
//! Every stream is a ChaCha8 generator (`rand_chacha`) keyed by a 64-bit
//! stream key. The root key is the scenario seed; a child key is derived as
//! `splitmix64(parent_key ^ fnv1a64(name))`. The 32-byte ChaCha seed is four
//! consecutive SplitMix64 outputs starting from the key, little-endian.
//!
//! Uniforms are `(next_u64 >> 11) * 2^-53`; normals use the basic Box-Muller
//! transform (two uniforms per draw, cosine branch only). Everything here is
//! simple enough to re-implement bit-for-bit in another language.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Algorithm name recorded in config and output headers.
pub const RNG_ALGORITHM: &str = "chacha8+splitmix64-keys+box-muller";

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a64(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone)]
pub struct RngStream {
    key: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::from_key(seed)
    }

    fn from_key(key: u64) -> Self {
        let mut state = key;
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self { key, rng: ChaCha8Rng::from_seed(seed) }
    }

    /// Independent child stream. Depends only on this stream's key and the
    /// name, never on how many draws the parent has consumed.
    pub fn child(&self, name: &str) -> Self {
        let mut state = self.key ^ fnv1a64(name);
        Self::from_key(splitmix64(&mut state))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on (0, 1].
    fn uniform_pos(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform_pos();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform index in `0..n`. Panics if `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index() over an empty range");
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Integer uniform on the inclusive range.
    pub fn int_inclusive(&mut self, lo: u32, hi: u32) -> u32 {
        lo + self.index((hi - lo) as usize + 1) as u32
    }

    /// Draws an index with probability proportional to `weights`.
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let target = self.uniform() * total;
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if target < acc {
                return i;
            }
        }
        weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn child_ignores_parent_position() {
        let a = RngStream::new(7);
        let mut b = RngStream::new(7);
        for _ in 0..10 {
            b.next_u64();
        }
        let mut ca = a.child("pricing");
        let mut cb = b.child("pricing");
        assert_eq!(ca.next_u64(), cb.next_u64());
    }

    #[test]
    fn sibling_streams_differ() {
        let root = RngStream::new(7);
        let mut p = root.child("pricing");
        let mut s = root.child("shocks");
        let xs: Vec<u64> = (0..8).map(|_| p.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| s.next_u64()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn normal_moments() {
        let mut r = RngStream::new(1);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| r.normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut r = RngStream::new(3);
        for _ in 0..10_000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn categorical_respects_zero_weights() {
        let mut r = RngStream::new(5);
        for _ in 0..1000 {
            let i = r.categorical(&[0.0, 0.3, 0.0, 0.7]);
            assert!(i == 1 || i == 3);
        }
    }
}
