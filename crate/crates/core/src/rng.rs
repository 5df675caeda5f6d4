//! Deterministic pseudo-random sampling.
//!
//! Everything stochastic in this crate flows through [`SplitMix64`], so a
//! 64-bit seed pins down datasets, splits, weight initialization, and
//! training shuffles exactly, independent of platform. The generator and
//! the normal transform are spelled out in the README (Data formats) so
//! draws can be replicated outside this crate.

/// SplitMix64 state increment.
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 generator.
///
/// State update per draw: `state = state + 0x9E3779B97F4A7C15 (mod 2^64)`,
/// output = [`mix64`] of the new state.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` from the top 53 bits of the next output.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, n)`. `n` must be nonzero.
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.next_u64() % n
    }

    /// Standard normal variate via the polar Box-Muller transform:
    /// draw `u, v` uniform in `[-1, 1)` until `0 < s = u^2 + v^2 < 1`,
    /// then return `u * sqrt(-2 ln(s) / s)`. The paired variate is
    /// discarded, keeping the draw sequence a pure function of the
    /// generator state.
    pub fn standard_normal(&mut self) -> f64 {
        loop {
            let u = 2.0 * self.next_f64() - 1.0;
            let v = 2.0 * self.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }

    /// In-place Fisher-Yates shuffle, iterating from the back:
    /// for `i = n-1 .. 1`, swap `xs[i]` with `xs[next_below(i + 1)]`.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }
}

/// SplitMix64 output finalizer (two xor-shift-multiply rounds).
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for a purpose-specific stream, decorrelated from `seed` itself:
/// `mix64(seed ^ mix64(stream))`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix64(seed ^ mix64(stream))
}

/// Stream tag: dataset model/holdout split.
pub const STREAM_SPLIT: u64 = 1;
/// Stream tag: network configuration seed for a training run.
pub const STREAM_MODEL: u64 = 2;
/// Stream tag: shuffles inside the training loop.
pub const STREAM_TRAIN: u64 = 3;
