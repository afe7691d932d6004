//! Counter-based random streams.
//!
//! Every variate is a pure function of `(seed, kind, id, counter)`, so two
//! processes that ask for the same key see the same number no matter how
//! their other draws interleave. This is what lets a real process and its
//! mimicking counterpart share clocks and uniforms.

use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// What a random draw is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum EntityKind {
    /// Event clock: waiting times and entity selection.
    Clock = 1,
    /// Decision uniform of a vertex update.
    Vertex = 2,
    /// Decision uniform of an edge resample.
    Edge = 3,
    /// Initial opinions.
    InitOpinion = 4,
    /// Initial `y` values.
    InitY = 5,
    /// Initial edge states.
    InitEdge = 6,
    /// Free-form draws (restarts, test fixtures).
    Aux = 7,
}

/// Keyed stream of uniforms derived from a single 64-bit seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    seed: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Raw 64-bit word for a key.
    #[inline]
    pub fn word(&self, kind: EntityKind, id: u64, counter: u64) -> u64 {
        let base = mix(mix(self.seed ^ GOLDEN) ^ mix(((kind as u64) << 56) ^ id.wrapping_mul(GOLDEN)));
        mix(base.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&self, kind: EntityKind, id: u64, counter: u64) -> f64 {
        (self.word(kind, id, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n`. `n` must be positive.
    #[inline]
    pub fn index(&self, kind: EntityKind, id: u64, counter: u64, n: usize) -> usize {
        debug_assert!(n > 0);
        // 128-bit multiply-shift: unbiased enough for n << 2^64 and never returns n.
        ((self.word(kind, id, counter) as u128 * n as u128) >> 64) as usize
    }

    /// Exponential variate with the given rate.
    #[inline]
    pub fn exponential(&self, kind: EntityKind, id: u64, counter: u64, rate: f64) -> f64 {
        let u = self.uniform(kind, id, counter);
        -(1.0 - u).ln() / rate
    }

    /// A stream whose seed is derived from this one; used for seed sweeps.
    pub fn derive(&self, salt: u64) -> RngStream {
        RngStream::new(mix(self.seed ^ mix(salt.wrapping_add(GOLDEN))))
    }
}
