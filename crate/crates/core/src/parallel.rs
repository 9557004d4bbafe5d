//! Order-preserving map over independent work items, data-parallel through
//! rayon when the `parallel` feature is on and sequential otherwise.

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CHDISC_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// `None` uses rayon's global pool.
    Parallel { threads: Option<usize> },
}

impl Default for Execution {
    fn default() -> Self {
        Self::from_env()
    }
}

impl Execution {
    /// Parallel when compiled with the `parallel` feature, capped by
    /// `CHDISC_THREADS`; a cap of 1 (or a build without the feature) runs
    /// sequentially. Unparseable values are ignored.
    pub fn from_env() -> Self {
        let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0);
        Self::with_threads(cap)
    }

    pub fn with_threads(cap: Option<usize>) -> Self {
        if !cfg!(feature = "parallel") || cap == Some(1) {
            Execution::Sequential
        } else {
            Execution::Parallel { threads: cap }
        }
    }

    pub fn is_parallel(&self) -> bool {
        matches!(self, Execution::Parallel { .. })
    }

    /// `items.iter().map(f)` with results in input order.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            Execution::Parallel { threads } => par_map(items, f, *threads),
        }
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, R, F>(items: &[T], f: F, threads: Option<usize>) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    match threads {
        None => items.par_iter().map(f).collect(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(_) => items.iter().map(f).collect(),
        },
    }
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, R, F>(items: &[T], f: F, _threads: Option<usize>) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let items: Vec<u64> = (0..500).collect();
        let expected: Vec<u64> = items.iter().map(|x| x * x + 1).collect();
        for exec in [Execution::Sequential, Execution::with_threads(None), Execution::with_threads(Some(3))] {
            assert_eq!(exec.map(&items, |x| x * x + 1), expected);
        }
    }

    #[test]
    fn single_thread_cap_is_sequential() {
        assert_eq!(Execution::with_threads(Some(1)), Execution::Sequential);
        assert_eq!(Execution::with_threads(Some(4)).is_parallel(), cfg!(feature = "parallel"));
    }
}
