//! Deterministic, splittable random streams and the execution abstraction
//! that keeps Monte Carlo results independent of the degree of parallelism.

use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream families; each purpose draws from its own family of substreams.
pub mod path {
    pub const THETA: u64 = 1;
    pub const PAIRS: u64 = 2;
    pub const MIXTURE: u64 = 3;
    pub const SINGLE: u64 = 4;
    pub const NORMS: u64 = 5;
}

/// Number of samples drawn from one substream in chunked Monte Carlo loops.
pub const CHUNK: usize = 4096;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The random stream for `(seed, path, index)`. Distinct `(path, index)`
/// pairs select distinct ChaCha streams under the same key.
pub fn substream(seed: u64, path: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(splitmix(splitmix(path) ^ index));
    rng
}

/// Maps `f` over `0..count` and returns the results in index order.
///
/// Implementations may run the calls concurrently, but the output order
/// must not depend on scheduling.
pub trait Executor: Sync {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every task on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}

/// Splits `total` samples into fixed-size chunks: `(start, len)` pairs.
pub fn chunks(total: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(total.div_ceil(CHUNK));
    let mut start = 0;
    while start < total {
        let len = CHUNK.min(total - start);
        out.push((start, len));
        start += len;
    }
    out
}
