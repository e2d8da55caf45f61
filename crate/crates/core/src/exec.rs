//! Batch execution: rayon when the `parallel` feature is on, a plain loop otherwise.
//!
//! Work is always split into the same batches, each with its own RNG stream,
//! so results do not depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Points per batch of every sampled computation.
pub const BATCH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Runs `f(batch_index)` for every batch and returns the results in order.
pub fn map_batches<T, F>(exec: Execution, batches: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..batches).into_par_iter().map(f).collect()
        }
        _ => (0..batches).map(f).collect(),
    }
}

/// The generator of one batch: stream `batch` of the seed.
pub fn batch_rng(seed: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    rng
}

/// Sizes of the batches covering `total` items.
pub fn batch_sizes(total: usize) -> Vec<usize> {
    let full = total / BATCH;
    let mut v = vec![BATCH; full];
    if !total.is_multiple_of(BATCH) {
        v.push(total % BATCH);
    }
    v
}
