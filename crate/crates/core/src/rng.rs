//! Seeded sub-streams.
//!
//! One master seed drives a whole experiment. Each `(trial, lane)` pair gets
//! an independent ChaCha8 stream: the 256-bit key is expanded from
//! `(seed, trial)` with SplitMix64, and the lane selects the ChaCha stream
//! number under that key. Lanes are player indices, batch indices, or 0 for
//! a single processor.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamId {
    pub seed: u64,
    pub trial: u64,
    pub lane: u64,
}

impl StreamId {
    pub fn new(seed: u64, trial: u64) -> Self {
        StreamId { seed, trial, lane: 0 }
    }

    pub fn with_lane(self, lane: u64) -> Self {
        StreamId { lane, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut trial_state = self.trial ^ 0xA076_1D64_78BD_642F;
        let mut state = self.seed ^ splitmix64(&mut trial_state);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.lane);
        rng
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
