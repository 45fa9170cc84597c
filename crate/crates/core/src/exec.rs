//! Execution policy and deterministic reductions.
//!
//! All reductions split their index range at fixed midpoints down to blocks of
//! [`LEAF`] items, so the floating-point association order depends only on the
//! input length. Whether the halves run on different threads changes nothing
//! in the result.

use std::ops::Range;
use std::sync::atomic::{AtomicBool, Ordering};

/// Leaf size of the reduction tree.
pub const LEAF: usize = 64;

static SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force the sequential path even when the `parallel` feature is on.
pub fn set_sequential(on: bool) {
    SEQUENTIAL.store(on, Ordering::SeqCst);
}

/// True when work is actually dispatched to rayon.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !SEQUENTIAL.load(Ordering::Relaxed)
}

fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() {
            return rayon::join(a, b);
        }
    }
    (a(), b())
}

/// Map `f` over `0..n`, preserving order.
pub fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Fold `0..n` with a fixed binary tree: `leaf` handles contiguous ranges of
/// at most [`LEAF`] indices in order, `combine` merges left and right halves.
/// Returns `None` for `n == 0`.
pub fn tree_fold<T, L, C>(n: usize, leaf: &L, combine: &C) -> Option<T>
where
    T: Send,
    L: Fn(Range<usize>) -> T + Sync,
    C: Fn(T, T) -> T + Sync,
{
    if n == 0 {
        return None;
    }
    Some(fold_range(0..n, leaf, combine))
}

fn fold_range<T, L, C>(r: Range<usize>, leaf: &L, combine: &C) -> T
where
    T: Send,
    L: Fn(Range<usize>) -> T + Sync,
    C: Fn(T, T) -> T + Sync,
{
    if r.len() <= LEAF {
        return leaf(r);
    }
    let mid = r.start + r.len() / 2;
    let (a, b) = join(
        || fold_range(r.start..mid, leaf, combine),
        || fold_range(mid..r.end, leaf, combine),
    );
    combine(a, b)
}

/// Pairwise sum of `values`; zero for an empty slice.
pub fn pairwise_sum<T>(values: &[T]) -> T
where
    T: Copy + Default + Send + Sync + std::ops::Add<Output = T>,
{
    tree_fold(
        values.len(),
        &|r: Range<usize>| values[r].iter().fold(T::default(), |acc, &v| acc + v),
        &|a, b| a + b,
    )
    .unwrap_or_default()
}
