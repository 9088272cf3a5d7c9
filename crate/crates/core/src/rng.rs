//! Splittable, path-addressed random streams.
//!
//! A stream is a 64-bit seed plus a path of branch labels. Every draw made
//! through a stream depends only on `(seed, path)`, so recursive and parallel
//! code stays reproducible as long as each branch uses its own label.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    path: Vec<String>,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed, path: Vec::new() }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[String] {
        &self.path
    }

    /// Path labels joined with `/`.
    pub fn path_string(&self) -> String {
        self.path.join("/")
    }

    pub fn child(&self, label: &str) -> RngStream {
        let mut path = self.path.clone();
        path.push(label.to_string());
        RngStream { seed: self.seed, path }
    }

    fn key(&self) -> [u8; 32] {
        let mut state = splitmix(self.seed ^ GOLDEN);
        for label in &self.path {
            let h = fnv1a(label.as_bytes()) ^ (label.len() as u64).rotate_left(32);
            state = splitmix(state.wrapping_add(GOLDEN) ^ splitmix(h));
        }
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = state.wrapping_add(GOLDEN);
            chunk.copy_from_slice(&splitmix(state).to_le_bytes());
        }
        key
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn generator(&self) -> ChaCha12Rng {
        ChaCha12Rng::from_seed(self.key())
    }

    /// First uniform draw in `[0, 1)` of this stream.
    pub fn uniform(&self) -> f64 {
        self.generator().random::<f64>()
    }

    /// First `count` uniform draws in `[0, 1)`.
    pub fn uniforms(&self, count: usize) -> Vec<f64> {
        let mut g = self.generator();
        (0..count).map(|_| g.random::<f64>()).collect()
    }
}
