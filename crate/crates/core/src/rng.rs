//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a generator addressed by
//! `(seed, path)`, where `path` names the logical task (replication index,
//! outer point, purpose tag, ...). Tasks can therefore run in any order or on
//! any thread and still see the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose tags mixed into stream paths so that unrelated draws never share a stream.
pub mod tag {
    pub const JOINT: u64 = 0x4a4f_494e;
    pub const OUTER: u64 = 0x4f55_5445;
    pub const INNER: u64 = 0x494e_4e45;
    pub const SELECT: u64 = 0x5345_4c45;
    pub const EVAL: u64 = 0x4556_414c;
    pub const NODE: u64 = 0x4e4f_4445;
    pub const BRANCH: u64 = 0x4252_414e;
    pub const REPLICATION: u64 = 0x5245_504c;
    pub const GENERATE: u64 = 0x4745_4e45;
    pub const GREEDY: u64 = 0x4752_4545;
    pub const KMEANS: u64 = 0x4b4d_4541;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a stream path into a 64-bit stream id.
pub fn stream_id(path: &[u64]) -> u64 {
    path.iter().fold(0x243f_6a88_85a3_08d3, |acc, &p| splitmix(acc ^ splitmix(p)))
}

/// Generator for the stream addressed by `(seed, path)`.
pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(path));
    rng
}

/// Derives a child seed, for APIs that take a plain seed rather than a path.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    splitmix(seed ^ stream_id(path))
}
