//! Deterministic randomness.
//!
//! All stochastic steps take a `u64` seed and build a ChaCha8 stream from it.
//! Pipelines derive per-stage seeds from one top-level seed with
//! [`derive_seed`], so any stage can be rerun on its own.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `splitmix64(seed ^ fnv1a64(stage))`.
pub fn derive_seed(seed: u64, stage: &str) -> u64 {
    splitmix64(seed ^ fnv1a64(stage.as_bytes()))
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn stages_get_distinct_seeds() {
        let a = derive_seed(7, "cluster");
        let b = derive_seed(7, "train");
        assert_ne!(a, b);
        assert_eq!(a, derive_seed(7, "cluster"));
        assert_ne!(a, derive_seed(8, "cluster"));
    }
}
