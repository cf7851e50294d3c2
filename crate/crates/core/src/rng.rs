//! MT19937 Mersenne Twister and the derived draws used by the simulator.
//!
//! Every random decision in a run goes through one [`MersenneTwister`], so a
//! (config, seed) pair pins the whole trajectory. The derived draws have fixed
//! raw-output consumption:
//!
//! * [`MersenneTwister::uniform01`] consumes two raw words: `a >> 5` supplies
//!   the high 27 bits and `b >> 6` the low 26 bits of a 53-bit integer, which
//!   is divided by 2^53 (the reference `genrand_res53` layout).
//! * [`MersenneTwister::normal`] consumes two uniforms (four raw words) with
//!   the basic Box–Muller transform, keeping only the cosine branch.
//! * [`MersenneTwister::shuffle`] consumes one uniform per swap, `n - 1` in total.

use crate::error::{Error, Result};

const N: usize = 624;
const M: usize = 397;
const MATRIX_A: u32 = 0x9908_b0df;
const UPPER_MASK: u32 = 0x8000_0000;
const LOWER_MASK: u32 = 0x7fff_ffff;

/// MT19937 generator state: 624 words plus the read position.
#[derive(Clone, PartialEq, Eq)]
pub struct MersenneTwister {
    state: [u32; N],
    index: usize,
}

impl std::fmt::Debug for MersenneTwister {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MersenneTwister")
            .field("index", &self.index)
            .finish_non_exhaustive()
    }
}

impl MersenneTwister {
    /// Seeds with the canonical `init_genrand` recurrence.
    pub fn new(seed: u32) -> Self {
        let mut state = [0u32; N];
        state[0] = seed;
        for i in 1..N {
            let prev = state[i - 1];
            state[i] = 1_812_433_253u32
                .wrapping_mul(prev ^ (prev >> 30))
                .wrapping_add(i as u32);
        }
        Self { state, index: N }
    }

    fn twist(&mut self) {
        for i in 0..N {
            let y = (self.state[i] & UPPER_MASK) | (self.state[(i + 1) % N] & LOWER_MASK);
            let mut next = self.state[(i + M) % N] ^ (y >> 1);
            if y & 1 != 0 {
                next ^= MATRIX_A;
            }
            self.state[i] = next;
        }
        self.index = 0;
    }

    /// Next tempered 32-bit output.
    pub fn next_u32(&mut self) -> u32 {
        if self.index >= N {
            self.twist();
        }
        let mut y = self.state[self.index];
        self.index += 1;

        y ^= y >> 11;
        y ^= (y << 7) & 0x9d2c_5680;
        y ^= (y << 15) & 0xefc6_0000;
        y ^= y >> 18;
        y
    }

    /// Uniform real in `[0, 1)` with 53 bits of resolution.
    pub fn uniform01(&mut self) -> f64 {
        let a = (self.next_u32() >> 5) as u64;
        let b = (self.next_u32() >> 6) as u64;
        ((a << 26) + b) as f64 / (1u64 << 53) as f64
    }

    /// Sample from `Normal(mean, sd)`.
    ///
    /// Always consumes two uniforms, even when `sd == 0`, so that the stream
    /// position does not depend on parameter values.
    pub fn normal(&mut self, mean: f64, sd: f64) -> Result<f64> {
        if !(sd >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "normal standard deviation must be >= 0, got {sd}"
            )));
        }
        // 1 - u maps [0, 1) onto (0, 1], keeping ln finite.
        let u1 = 1.0 - self.uniform01();
        let u2 = self.uniform01();
        let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
        if sd == 0.0 {
            return Ok(mean);
        }
        Ok(mean + sd * z)
    }

    /// Uniform index in `0..bound`. `bound` must be nonzero.
    fn below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        let k = (self.uniform01() * bound as f64) as usize;
        k.min(bound - 1)
    }

    /// Fisher–Yates permutation of `0..n`.
    pub fn shuffle(&mut self, n: usize) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..n).collect();
        self.shuffle_in_place(&mut perm);
        perm
    }

    /// Fisher–Yates shuffle of an existing slice, walking from the back.
    pub fn shuffle_in_place<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
