use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tag for synthetic population draws.
pub(crate) const STREAM_SYNTHETIC: u64 = 0;
/// Stream tag for bootstrap subsampling.
pub(crate) const STREAM_BOOTSTRAP: u64 = 1;
/// Stream tag for the correlation demonstration.
pub(crate) const STREAM_CORRELATION: u64 = 2;

/// ChaCha8 generator keyed directly by `(seed, trial, population, stream)`.
///
/// Any `(trial, population)` stream can be regenerated in isolation, which
/// keeps parallel runs bit-identical to serial ones.
pub fn trial_rng(seed: u64, trial: u64, population: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key
        .chunks_exact_mut(8)
        .zip([seed, trial, population, stream])
    {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
