//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the [`Parallelism::Rayon`] mode runs on the
//! current rayon pool; without it every mode degrades to a plain loop. Output
//! order always matches input order, so results never depend on the mode or
//! on the number of threads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution mode for the data-parallel inner loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    /// Rayon when the `parallel` feature is compiled in, sequential otherwise.
    #[default]
    Rayon,
}

impl Parallelism {
    /// Whether this mode actually dispatches to rayon in the current build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Rayon
    }
}

/// `(0..len).map(f).collect()`, possibly in parallel.
pub fn map_range<R, F>(par: Parallelism, len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = par;
    (0..len).map(f).collect()
}

/// `items.iter().map(f).collect()`, possibly in parallel.
pub fn map_slice<T, R, F>(par: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = par;
    items.iter().map(f).collect()
}
