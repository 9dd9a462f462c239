//! Data-parallel map helper with a sequential fallback.
//!
//! Compiled with the `parallel` feature (the default), [`map_collect`]
//! fans out over rayon's global pool; without it, both entry points run
//! sequentially. Callers must be order-insensitive only in scheduling:
//! results always come back in input order, so outputs are identical
//! across modes and thread counts.

/// Map `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}

/// Always-sequential map, kept for benchmarking against [`map_collect`].
pub fn map_collect_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let items: Vec<u64> = (0..1000).collect();
        let f = |x: u64| x.wrapping_mul(2654435761).rotate_left(13);
        let a = map_collect(items.clone(), f);
        let b = map_collect_seq(items, f);
        assert_eq!(a, b);
    }
}
