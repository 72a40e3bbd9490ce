//! Thin shims over rayon with a sequential fallback.
//!
//! Parallel reductions are organized as "map ordered chunks, then merge in
//! chunk order": results are bitwise identical between the parallel and
//! sequential paths and across runs with any thread count.

/// Maps `f` over `items` and returns the results in input order.
#[cfg(feature = "parallel")]
pub fn map_ordered<T: Sync, U: Send, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Maps `f` over index chunks `[start, end)` of `0..len` and returns the
/// per-chunk results in chunk order.
#[cfg(feature = "parallel")]
pub fn map_index_chunks<U: Send, F>(len: usize, chunk: usize, f: F) -> Vec<U>
where
    F: Fn(usize, usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    let ranges: Vec<(usize, usize)> = chunk_ranges(len, chunk);
    ranges.par_iter().map(|&(a, b)| f(a, b)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_index_chunks<U, F>(len: usize, chunk: usize, f: F) -> Vec<U>
where
    F: Fn(usize, usize) -> U,
{
    chunk_ranges(len, chunk)
        .into_iter()
        .map(|(a, b)| f(a, b))
        .collect()
}

fn chunk_ranges(len: usize, chunk: usize) -> Vec<(usize, usize)> {
    let chunk = chunk.max(1);
    (0..len)
        .step_by(chunk)
        .map(|a| (a, (a + chunk).min(len)))
        .collect()
}
