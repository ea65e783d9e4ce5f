//! Deterministic random streams.
//!
//! Every random draw in a run comes from a ChaCha8 generator keyed by the run
//! seed. The 64-bit ChaCha stream id is split as `purpose << 40 | index`, so
//! sample `i` of a given purpose always sees the same numbers no matter which
//! other samples were generated, or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share a stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    /// Channel samples used by the offline (outer) optimization.
    Train = 1,
    /// Held-out channel samples used for evaluation.
    Eval = 2,
    /// Initial RIS phases for training samples.
    TrainPhase = 3,
    /// Initial RIS phases for evaluation samples.
    EvalPhase = 4,
    /// The fixed coupling spectrum of the `fixed_mc` baseline.
    FixedCoupling = 5,
    /// Ad-hoc draws (tests, tools).
    Misc = 6,
}

const INDEX_BITS: u32 = 40;

pub fn stream_rng(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    assert!(index < (1 << INDEX_BITS), "stream index out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << INDEX_BITS) | index);
    rng
}

/// Derives a per-trial seed from the run seed (SplitMix64 finalizer).
pub fn trial_seed(run_seed: u64, trial: u64) -> u64 {
    let mut z = run_seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(trial.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
