//! Seeded random streams.
//!
//! Every device owns a PCG stream keyed by `(seed, device id)`: the pair
//! determines both the generator state and the stream increment. An extra
//! stream `(seed, N + 1)` serves scenario-level draws such as search
//! permutations. Streams count their draws so the per-step draw budget can be
//! audited after a run.

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

#[derive(Debug, Clone)]
pub struct Stream {
    rng: Pcg64,
    draws: u64,
}

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        // Both the state and the increment depend on the stream id, so streams
        // sharing a seed do not share a state sequence.
        let mut state = [0u8; 16];
        Pcg64::seed_from_u64(seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)).fill(&mut state);
        let rng = Pcg64::new(u128::from_le_bytes(state), stream as u128);
        Self { rng, draws: 0 }
    }

    /// Uniform draw on [0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        self.rng.random::<f64>()
    }

    /// Uniform index in `0..len`.
    pub fn index(&mut self, len: usize) -> usize {
        self.draws += 1;
        self.rng.random_range(0..len)
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }
}

pub fn device_stream(seed: u64, device: usize) -> Stream {
    Stream::new(seed, device as u64)
}

pub fn scenario_stream(seed: u64, devices: usize) -> Stream {
    Stream::new(seed, devices as u64 + 1)
}

/// Fisher-Yates shuffle performed lazily: each yielded item costs one draw,
/// and iteration can stop at any prefix. The slice is left partially permuted,
/// which does not bias later shuffles of the same slice.
pub struct LazyShuffle<'a> {
    items: &'a mut [usize],
    next: usize,
    rng: &'a mut Stream,
}

impl<'a> LazyShuffle<'a> {
    pub fn new(items: &'a mut [usize], rng: &'a mut Stream) -> Self {
        Self { items, next: 0, rng }
    }
}

impl Iterator for LazyShuffle<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let remaining = self.items.len() - self.next;
        if remaining == 0 {
            return None;
        }
        let pick = self.next + self.rng.index(remaining);
        self.items.swap(self.next, pick);
        let item = self.items[self.next];
        self.next += 1;
        Some(item)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let remaining = self.items.len() - self.next;
        (remaining, Some(remaining))
    }
}
