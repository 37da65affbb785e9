//! Deterministic, platform-independent pseudo-randomness.
//!
//! Window construction must be bit-identical across runs and platforms, so
//! all randomness is derived from a 64-bit seed through an explicit mixing
//! function rather than an external RNG whose stream might change between
//! versions.

/// SplitMix64 finalizer; a high-quality 64 -> 64 bit mixer.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Deterministic bit for an unordered pair, used for random-graph adjacency.
#[inline]
pub fn pair_bit(seed: u64, i: u32, j: u32) -> bool {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    mix64(seed ^ mix64(((a as u64) << 32) | b as u64)) & 1 == 1
}

/// Small sequential generator for seeded sampling (test corpora, start
/// vectors). Not used in window construction itself.
#[derive(Clone, Debug)]
pub struct SplitMix {
    state: u64,
}

impl SplitMix {
    pub fn new(seed: u64) -> Self {
        SplitMix { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `0..bound` (bound > 0).
    pub fn next_below(&mut self, bound: u64) -> u64 {
        // Multiply-shift; bias is negligible for desk-scale bounds.
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    /// Uniform in `[-1, 1)`.
    pub fn next_signed_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_bit_symmetric() {
        for i in 0..50u32 {
            for j in 0..50u32 {
                assert_eq!(pair_bit(7, i, j), pair_bit(7, j, i));
            }
        }
    }

    #[test]
    fn pair_bit_roughly_balanced() {
        let ones = (0..100u32)
            .flat_map(|i| (i + 1..100).map(move |j| (i, j)))
            .filter(|&(i, j)| pair_bit(42, i, j))
            .count();
        let total = 100 * 99 / 2;
        assert!(ones > total / 3 && ones < 2 * total / 3);
    }

    #[test]
    fn splitmix_below_in_range() {
        let mut r = SplitMix::new(1);
        for _ in 0..1000 {
            assert!(r.next_below(17) < 17);
        }
    }
}
