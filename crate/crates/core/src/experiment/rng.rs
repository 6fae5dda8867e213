use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random substreams of one experiment. Channel, payload bits and
/// noise live on separate streams so estimator comparisons share identical
/// realizations trial for trial, and changing one ingredient (say the SNR,
/// which only scales the noise stream) leaves the others untouched.
#[derive(Debug, Clone, Copy)]
pub enum StreamKind {
    Channel = 0,
    Bits = 1,
    Noise = 2,
}

const STREAMS_PER_TRIAL: u64 = 8;

/// Deterministic generator for (master seed, trial, substream).
pub fn substream(master_seed: u64, trial: u64, kind: StreamKind) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial * STREAMS_PER_TRIAL + kind as u64);
    rng
}
