//! Deterministic PRNG primitives shared by sampling and simulation.
//!
//! Every randomized step in this crate draws from [`SplitMix64`] so that a
//! run is reproducible from its seeds alone, in any implementation of the
//! same documented recipe:
//!
//! * state update: `state += 0x9E3779B97F4A7C15` (wrapping)
//! * output mix:   `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!                  z ^= z >> 27; z *= 0x94D049BB133111EB;
//!                  z ^= z >> 31` (all wrapping)
//!
//! Shuffles use the Fisher-Yates walk `for i in (1..len).rev() { j = next_u64()
//! % (i + 1); swap(i, j) }`. The modulo step is part of the contract.

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)`: top 53 bits scaled by 2^-53.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `[0, n)`. `n` must be nonzero.
    pub fn next_index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// In-place Fisher-Yates shuffle per the documented walk.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = (self.next_u64() % (i as u64 + 1)) as usize;
            items.swap(i, j);
        }
    }
}

/// FNV-1a over bytes; used to fold strings into seed material.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Derives a child seed from a base seed and a label: one SplitMix64 output
/// of `base ^ fnv1a64(label)`.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    SplitMix64::new(base ^ fnv1a64(label.as_bytes())).next_u64()
}
