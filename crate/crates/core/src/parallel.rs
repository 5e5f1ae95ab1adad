//! Deterministic fan-out of indexed work units.
//!
//! Results are always collected in index order, so any reduction performed
//! afterwards is independent of the thread count and of scheduling.

use crate::error::{Error, Result};
use rayon::prelude::*;

/// Evaluates `f(0..n)` on a pool of `width` threads and returns the results
/// in index order. `width <= 1` runs on the calling thread.
pub fn map_indexed<T, F>(width: usize, n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if width <= 1 {
        return (0..n).map(&f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(width)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

/// Like [`map_indexed`] over the elements of a slice.
pub fn map_slice<S, T, F>(width: usize, items: &[S], f: F) -> Result<Vec<T>>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> Result<T> + Sync + Send,
{
    map_indexed(width, items.len() as u64, |i| f(&items[i as usize]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_for_every_width() {
        let seq = map_indexed(1, 1000, |i| Ok(i * i)).unwrap();
        for width in [2, 3, 8] {
            assert_eq!(map_indexed(width, 1000, |i| Ok(i * i)).unwrap(), seq);
        }
    }

    #[test]
    fn errors_propagate() {
        let r: Result<Vec<u64>> = map_indexed(4, 100, |i| {
            if i == 57 { Err(Error::Invariant("boom".into())) } else { Ok(i) }
        });
        assert!(matches!(r, Err(Error::Invariant(_))));
    }
}
