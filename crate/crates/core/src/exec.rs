//! Execution strategy for the data-parallel stages.
//!
//! Every parallel stage takes an [`Execution`]. With the `parallel` feature
//! disabled, [`Execution::Parallel`] runs the same code sequentially, so
//! results never depend on the strategy.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Order-preserving map over a slice.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Fold fixed-size chunks independently and combine the partial results
    /// left to right in chunk order.
    pub fn fold_chunks<T, A, F, M>(self, items: &[T], chunk: usize, fold: F, merge: M) -> Option<A>
    where
        T: Sync,
        A: Send,
        F: Fn(&[T]) -> A + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        let chunk = chunk.max(1);
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            let partials: Vec<A> = items.par_chunks(chunk).map(&fold).collect();
            return partials.into_iter().reduce(merge);
        }
        items.chunks(chunk).map(fold).reduce(merge)
    }
}

/// Cap the worker pool for every parallel stage in this process.
pub fn configure_threads(threads: usize) -> Result<(), String> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(())
    }
}
