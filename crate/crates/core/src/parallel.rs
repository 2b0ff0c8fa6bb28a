//! Data-parallel execution of per-level work and of independent replications.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] dispatches to
//! rayon; without it every path runs sequentially. Results never depend on the
//! execution mode or the worker count because every consumer draws from its
//! own counter-based random stream.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    #[default]
    Sequential,
    Parallel,
}

impl Execution {
    /// Whether work will actually fan out in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

impl std::str::FromStr for Execution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sequential" | "false" | "off" => Ok(Execution::Sequential),
            "parallel" | "true" | "on" => Ok(Execution::Parallel),
            other => Err(format!("unknown execution mode `{other}`")),
        }
    }
}

/// Applies `f(i, &mut a[i], &mut b[i])` to every index and collects the results
/// in index order.
pub(crate) fn map_zip_mut<A, B, R, F>(exec: Execution, a: &mut [A], b: &mut [B], f: F) -> Vec<R>
where
    A: Send,
    B: Send,
    R: Send,
    F: Fn(usize, &mut A, &mut B) -> R + Sync + Send,
{
    debug_assert_eq!(a.len(), b.len());
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return a
            .par_iter_mut()
            .zip(b.par_iter_mut())
            .enumerate()
            .map(|(i, (x, y))| f(i, x, y))
            .collect();
    }
    let _ = exec;
    a.iter_mut()
        .zip(b.iter_mut())
        .enumerate()
        .map(|(i, (x, y))| f(i, x, y))
        .collect()
}

/// Applies `f(i, &mut items[i])` to every index.
pub(crate) fn for_each_mut<T, F>(exec: Execution, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        items.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
        return;
    }
    let _ = exec;
    items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

/// Evaluates `f(0..count)` and returns the results in index order.
pub fn map_indices<R, F>(exec: Execution, count: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..count).map(f).collect()
}

/// Runs `f` inside a pool of `workers` threads (the global pool when `None`).
pub fn with_workers<R, F>(workers: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    if let Some(n) = workers {
        match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => return pool.install(f),
            Err(e) => log::warn!("falling back to the global pool: {e}"),
        }
    }
    let _ = workers;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let mut a: Vec<u64> = (0..100).collect();
        let mut b = vec![1u64; 100];
        let mut a2 = a.clone();
        let mut b2 = b.clone();
        let f = |i: usize, x: &mut u64, y: &mut u64| {
            *x += *y;
            *y = i as u64;
            *x * 3
        };
        let seq = map_zip_mut(Execution::Sequential, &mut a, &mut b, f);
        let par = map_zip_mut(Execution::Parallel, &mut a2, &mut b2, f);
        assert_eq!(seq, par);
        assert_eq!(a, a2);
        assert_eq!(b, b2);
        let seq = map_indices(Execution::Sequential, 50, |i| i * i);
        let par = with_workers(Some(3), || map_indices(Execution::Parallel, 50, |i| i * i));
        assert_eq!(seq, par);
    }
}
