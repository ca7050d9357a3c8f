//! Execution policy for data-parallel loops.
//!
//! With the `parallel` feature (default) [`Exec::Parallel`] runs on the rayon
//! pool; without it every policy falls back to a plain sequential loop.
//! Results are always returned in input order, so outputs do not depend on
//! the policy or on the worker count.

use serde::{Deserialize, Serialize};

/// Environment variable holding the worker count for the global pool.
pub const WORKERS_ENV: &str = "IET_SKEW_WORKERS";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

impl Exec {
    /// Maps `f` over `0..n`, preserving order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Maps `f` over a slice, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// Returns the smallest index in `0..n` for which `f` yields `Some`,
    /// evaluating in chunks so that later indices are skipped once a hit is known.
    pub fn find_first<R, F>(self, n: usize, chunk: usize, f: F) -> Option<(usize, R)>
    where
        R: Send,
        F: Fn(usize) -> Option<R> + Sync + Send,
    {
        let chunk = chunk.max(1);
        let mut start = 0;
        while start < n {
            let end = (start + chunk).min(n);
            let hits = self.map_range(end - start, |k| f(start + k));
            if let Some((k, r)) = hits
                .into_iter()
                .enumerate()
                .find_map(|(k, r)| r.map(|r| (k, r)))
            {
                return Some((start + k, r));
            }
            start = end;
        }
        None
    }
}

/// Configures the global pool from [`WORKERS_ENV`]; returns the worker count if set.
pub fn init_workers_from_env() -> Option<usize> {
    let n: usize = std::env::var(WORKERS_ENV).ok()?.trim().parse().ok()?;
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Some(n)
}
