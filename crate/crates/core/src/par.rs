//! Data-parallel map helpers. With the `parallel` feature (default) the
//! parallel entry points fan out over rayon; without it they fall back to
//! the sequential path. Results always come back in input order, so both
//! modes produce identical output for pure closures.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map over a slice, collecting results in input order.
#[cfg(feature = "parallel")]
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    map_collect_seq(items, f)
}

/// Always-sequential map, kept public so benchmarks can compare both paths
/// under one build.
pub fn map_collect_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Map over index ranges `[start, end)` chunked at `chunk` items. The chunk
/// boundaries depend only on `len` and `chunk`, never on thread count, so
/// any fold over the returned partials has a fixed association.
#[cfg(feature = "parallel")]
pub fn map_chunks<R, F>(len: usize, chunk: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(std::ops::Range<usize>) -> R + Sync + Send,
{
    let bounds: Vec<std::ops::Range<usize>> = chunk_ranges(len, chunk);
    bounds.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_chunks<R, F>(len: usize, chunk: usize, f: F) -> Vec<R>
where
    F: Fn(std::ops::Range<usize>) -> R,
{
    chunk_ranges(len, chunk).into_iter().map(f).collect()
}

fn chunk_ranges(len: usize, chunk: usize) -> Vec<std::ops::Range<usize>> {
    assert!(chunk > 0);
    let mut out = Vec::with_capacity(len.div_ceil(chunk));
    let mut start = 0;
    while start < len {
        let end = (start + chunk).min(len);
        out.push(start..end);
        start = end;
    }
    out
}
