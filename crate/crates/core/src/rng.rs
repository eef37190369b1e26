//! Deterministic RNG substream derivation.
//!
//! Parallel work (bootstrap replicates, trees, simulation runs) must be
//! reproducible independently of execution order and thread count. Every unit
//! of work therefore owns its own generator, seeded from the master seed and
//! the unit index through a splitmix-style mix. Two units never share a
//! stream, and replaying a unit in isolation reproduces it bit for bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function (Steele, Lea, Flood 2014).
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the substream seed for unit `index` under `master`.
pub fn substream_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Returns the generator owned by unit `index` under `master`.
pub fn substream(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(master, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let a: u64 = substream(7, 0).random();
        let b: u64 = substream(7, 0).random();
        let c: u64 = substream(7, 1).random();
        let d: u64 = substream(8, 0).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn seed_mix_is_not_index_additive() {
        // (master, index) pairs with equal xor/sum must not collide
        assert_ne!(substream_seed(1, 2), substream_seed(2, 1));
        assert_ne!(substream_seed(0, 3), substream_seed(3, 0));
    }
}
