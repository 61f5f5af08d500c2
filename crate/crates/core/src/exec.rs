//! Sequential or data-parallel evaluation with a deterministic result order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "camelCase")]
pub enum Execution {
    Sequential,
    /// Rayon pool; `threads = None` uses the global pool. Runs sequentially
    /// when the `parallel` feature is off.
    #[default]
    Parallel,
}

/// Thread cap for parallel runs, read by [`map_indexed`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExecConfig {
    pub mode: Execution,
    pub threads: Option<usize>,
}

impl ExecConfig {
    pub fn sequential() -> Self {
        ExecConfig {
            mode: Execution::Sequential,
            threads: None,
        }
    }

    pub fn parallel(threads: Option<usize>) -> Self {
        ExecConfig {
            mode: Execution::Parallel,
            threads,
        }
    }
}

/// `(0..n).map(f)` collected in index order.
pub fn map_indexed<R, F>(n: usize, cfg: ExecConfig, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match cfg.mode {
        Execution::Sequential => (0..n).map(f).collect(),
        Execution::Parallel => parallel_map(n, cfg.threads, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<R, F>(n: usize, threads: Option<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            Err(_) => (0..n).map(f).collect(),
        },
        None => (0..n).into_par_iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<R, F>(n: usize, _threads: Option<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let a = map_indexed(1000, ExecConfig::sequential(), |i| i * i);
        let b = map_indexed(1000, ExecConfig::parallel(Some(3)), |i| i * i);
        assert_eq!(a, b);
    }
}
