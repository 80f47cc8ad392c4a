//! Deterministic work splitting for Monte Carlo loops.
//!
//! Work is cut into fixed blocks of [`BLOCK_LEN`] items. Block `b` draws from
//! a ChaCha20 generator seeded with the user seed and positioned on stream `b`,
//! so the random numbers consumed by an item depend only on `(seed, item index)`.
//! Shards are contiguous runs of blocks; results are always reassembled in block
//! order, which makes every output independent of the shard count.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub const BLOCK_LEN: usize = 1024;

/// Generator for one block of work.
pub fn block_rng(seed: u64, block: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

fn block_ranges(n: usize) -> Vec<Range<usize>> {
    (0..n.div_ceil(BLOCK_LEN))
        .map(|b| b * BLOCK_LEN..((b + 1) * BLOCK_LEN).min(n))
        .collect()
}

/// Runs `f(block_index, item_range)` over every block of `0..n` and returns
/// the results in block order. `shards` worker threads are used (clamped to
/// at least one).
pub fn map_blocks<T, F>(n: usize, shards: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, Range<usize>) -> T + Sync,
{
    let ranges = block_ranges(n);
    let shards = shards.max(1).min(ranges.len().max(1));
    if shards == 1 {
        return ranges.into_iter().enumerate().map(|(b, r)| f(b, r)).collect();
    }
    let per_shard = ranges.len().div_ceil(shards);
    let indexed: Vec<(usize, Range<usize>)> = ranges.into_iter().enumerate().collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = indexed
            .chunks(per_shard)
            .map(|chunk| {
                let f = &f;
                scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|(b, r)| f(*b, r.clone()))
                        .collect::<Vec<T>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("shard worker panicked"))
            .collect()
    })
}
