//! Deterministic per-draw random streams.
//!
//! Every draw owns a ChaCha8 stream keyed by `(master_seed, stream_id)` with the
//! draw index selecting the ChaCha stream, so results do not depend on how draws
//! are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type DrawRng = ChaCha8Rng;

/// Stream ids used by the estimators.
pub mod streams {
    pub const NUMERATOR: u64 = 1;
    pub const DENOMINATOR: u64 = 2;
    pub const SINGLE: u64 = 3;
    pub const PROPAGATOR: u64 = 4;
}

pub fn draw_rng(master_seed: u64, stream_id: u64, index: u64) -> DrawRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream_id.to_le_bytes());
    key[16..24].copy_from_slice(b"nhqmc-v1");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
