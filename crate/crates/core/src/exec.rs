//! Fixed-block parallel map with schedule-independent output.

use std::ops::Range;

use rayon::prelude::*;

/// Splits `0..total` into consecutive blocks of `block` items, maps each
/// block and returns the results in block order. The block layout depends
/// only on `total` and `block`, never on `max_parallel`.
pub(crate) fn map_blocks<T, F>(total: usize, block: usize, max_parallel: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync,
{
    let block = block.max(1);
    let ranges: Vec<Range<usize>> = (0..total)
        .step_by(block)
        .map(|start| start..(start + block).min(total))
        .collect();
    if max_parallel <= 1 || ranges.len() <= 1 {
        return ranges.into_iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new()
        .num_threads(max_parallel)
        .build()
    {
        Ok(pool) => pool.install(|| ranges.into_par_iter().map(&f).collect()),
        Err(err) => {
            log::warn!("thread pool unavailable ({err}), running sequentially");
            ranges.into_iter().map(f).collect()
        }
    }
}

/// Default parallelism: every available core.
pub(crate) fn default_parallelism() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}
