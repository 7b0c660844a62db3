//! Index-addressed execution of independent work items.
//!
//! Results come back ordered by index regardless of how many workers ran
//! them, so callers that derive per-item randomness from the index get
//! identical output on any thread count. Thread counts themselves are the
//! caller's business: install a rayon pool and call from inside it.

/// Maps `f` over `0..count`, returning results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..count`, returning results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

/// Like [`map_indexed`], but hands `f` a per-worker scratch value built by
/// `init`. Scratch must not leak information between items that changes
/// results, or determinism across thread counts is lost.
#[cfg(feature = "parallel")]
pub fn map_indexed_init<S, T, I, F>(count: usize, init: I, f: F) -> Vec<T>
where
    S: Send,
    T: Send,
    I: Fn() -> S + Sync,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count)
        .into_par_iter()
        .map_init(&init, |scratch, i| f(scratch, i))
        .collect()
}

/// Like [`map_indexed`], but hands `f` a per-worker scratch value built by
/// `init`.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed_init<S, T, I, F>(count: usize, init: I, f: F) -> Vec<T>
where
    S: Send,
    T: Send,
    I: Fn() -> S + Sync,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    let mut scratch = init();
    (0..count).map(|i| f(&mut scratch, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_come_back_in_index_order() {
        let out = map_indexed(100, |i| i * i);
        assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn scratch_variant_preserves_order() {
        let out = map_indexed_init(50, || 0u32, |s, i| {
            *s += 1;
            i + 1
        });
        assert_eq!(out, (1..=50).collect::<Vec<_>>());
    }
}
