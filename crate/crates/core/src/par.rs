//! Execution backend for the data-parallel loops.
//!
//! Every helper here maps an index range to a `Vec` in index order, so the
//! callers see identical output whether rayon or the sequential fallback is
//! compiled in.

#[cfg(feature = "parallel")]
mod imp {
    use rayon::prelude::*;

    pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..len).into_par_iter().map(f).collect()
    }

    pub fn map_slice<A, T, F>(items: &[A], f: F) -> Vec<T>
    where
        A: Sync,
        T: Send,
        F: Fn(&A) -> T + Sync + Send,
    {
        items.par_iter().map(f).collect()
    }

    pub fn with_workers<R, F>(workers: usize, f: F) -> R
    where
        R: Send,
        F: FnOnce() -> R + Send,
    {
        match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
            Ok(pool) => pool.install(f),
            // Pool creation only fails on resource exhaustion; run on the
            // global pool instead of failing the batch.
            Err(_) => f(),
        }
    }

    pub fn available_workers() -> usize {
        rayon::current_num_threads()
    }
}

#[cfg(not(feature = "parallel"))]
mod imp {
    pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..len).map(f).collect()
    }

    pub fn map_slice<A, T, F>(items: &[A], f: F) -> Vec<T>
    where
        A: Sync,
        T: Send,
        F: Fn(&A) -> T + Sync + Send,
    {
        items.iter().map(f).collect()
    }

    pub fn with_workers<R, F>(_workers: usize, f: F) -> R
    where
        R: Send,
        F: FnOnce() -> R + Send,
    {
        f()
    }

    pub fn available_workers() -> usize {
        1
    }
}

pub use imp::{available_workers, map_indexed, map_slice, with_workers};

/// True when the rayon backend is compiled in.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_index_order() {
        let out = map_indexed(100, |i| i * i);
        assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
        let sq = map_slice(&[3, 1, 2], |x| x * 10);
        assert_eq!(sq, vec![30, 10, 20]);
    }

    #[test]
    fn worker_pool_runs_closure() {
        let v = with_workers(2, || map_indexed(10, |i| i + 1));
        assert_eq!(v.iter().sum::<usize>(), 55);
    }
}
