//! Keyed random sub-streams.
//!
//! Every random quantity in a drop comes from its own ChaCha stream keyed by
//! `(seed, drop, user, purpose)`, so consumption in one stream never shifts
//! another and UEs can be processed in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Placement,
    Mobility,
    ShadowLos,
    ShadowNlos,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Placement => 0x706c_6163,
            Purpose::Mobility => 0x6d6f_6269,
            Purpose::ShadowLos => 0x7366_6c6f,
            Purpose::ShadowNlos => 0x7366_6e6c,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent, reproducible stream for one (seed, drop, user, purpose) key.
pub fn seeded_stream(base_seed: u64, drop: u64, user: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut state = base_seed;
    for word in [drop, user, purpose.tag()] {
        state = splitmix64(&mut state) ^ word;
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
