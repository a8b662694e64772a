//! Deterministic pseudorandomness used throughout the crate.
//!
//! All keyed derivations (green-list partitions, sampling vectors, attack
//! choices, per-sample experiment seeds) go through the same fixed 64-bit
//! mixing function so that detection reproduces generation-time state
//! bit-exactly on every platform. The mixer is the splitmix64 finalizer
//! (Steele, Lea & Flood), the stream generator the splitmix64 sequence.

/// splitmix64 finalizer: a fixed, portable 64-bit mixing function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fold a token window into a key-dependent seed.
///
/// The same function backs both the green-list partition and the sampling
/// watermark's pseudorandom vector (with different keys).
pub fn fold_context(key: u64, window: &[u32]) -> u64 {
    let mut h = mix64(key);
    for &id in window {
        h = mix64(h ^ (id as u64).wrapping_add(0xD1B5_4A32_D192_ED03));
    }
    h
}

/// Derive an independent per-item seed from a master seed.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index))
}

/// splitmix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, n)` via multiply-shift range reduction.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Bernoulli draw.
    #[inline]
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// Choose `k` distinct indices out of `0..n`, returned sorted ascending.
    pub fn choose_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut all: Vec<usize> = (0..n).collect();
        self.shuffle(&mut all);
        let mut chosen: Vec<usize> = all.into_iter().take(k).collect();
        chosen.sort_unstable();
        chosen
    }
}
