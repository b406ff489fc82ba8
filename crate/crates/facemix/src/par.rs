//! Data-parallel map helpers with a sequential fallback.
//!
//! With the default `parallel` feature the maps fan out over rayon's
//! current thread pool; without it they run as plain iterators. Both paths
//! produce identical output for pure per-item functions: results are
//! collected in index order, so callers are independent of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Bound the global worker pool to `n` threads (0 keeps the default).
///
/// Takes effect only before the first parallel operation; later calls are
/// ignored. Without the `parallel` feature this is a no-op and work runs
/// sequentially regardless of `n`.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) {
    if n == 0 {
        return;
    }
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

/// See the `parallel` variant; sequential builds ignore the request.
#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) {}

/// Map a pure function over items, preserving order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync,
{
    items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

/// Map a pure function over items, preserving order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(usize, &T) -> U,
{
    items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

/// Fallible variant of [`map_indexed`]; the first error wins.
#[cfg(feature = "parallel")]
pub fn try_map_indexed<T, U, E, F>(items: &[T], f: F) -> Result<Vec<U>, E>
where
    T: Sync,
    U: Send,
    E: Send,
    F: Fn(usize, &T) -> Result<U, E> + Sync,
{
    items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

/// Fallible variant of [`map_indexed`]; the first error wins.
#[cfg(not(feature = "parallel"))]
pub fn try_map_indexed<T, U, E, F>(items: &[T], f: F) -> Result<Vec<U>, E>
where
    F: Fn(usize, &T) -> Result<U, E>,
{
    items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

/// Map a pure function over a range of indices, preserving order.
#[cfg(feature = "parallel")]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Map a pure function over a range of indices, preserving order.
#[cfg(not(feature = "parallel"))]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}
