//! Data-parallel seam.
//!
//! With the default `parallel` feature these helpers fan work out over a
//! rayon pool; without it they degrade to plain loops so the crate builds
//! and behaves identically (`--no-default-features`) on targets where
//! rayon is unwanted. Results must not depend on execution order, which
//! holds for every call site: chunk writes are disjoint and maps are pure.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Split `buf` into consecutive `chunk`-sized pieces and call
/// `f(chunk_index, piece)` for each.
#[cfg(feature = "parallel")]
pub fn for_each_chunk<T: Send, F>(buf: &mut [T], chunk: usize, f: F)
where
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    buf.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_chunk<T, F>(buf: &mut [T], chunk: usize, f: F)
where
    F: Fn(usize, &mut [T]),
{
    for (i, c) in buf.chunks_mut(chunk).enumerate() {
        f(i, c);
    }
}

/// `(0..n).map(f).collect()`, order-preserving.
#[cfg(feature = "parallel")]
pub fn map_n<T: Send, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_n<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
