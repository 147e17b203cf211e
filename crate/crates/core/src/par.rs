//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over a rayon pool;
//! without it, or when [`Execution::Sequential`] is requested, the same
//! closures run in order. Results are always returned in input order.

/// Environment variable read by [`configure_workers`].
pub const WORKERS_ENV: &str = "QFLUCT_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// Parallel sum of `f(i)` over `0..n`, falling back to a sequential fold.
    pub fn sum_indexed<F>(self, n: usize, f: F) -> crate::C64
    where
        F: Fn(usize) -> crate::C64 + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).sum()
            }
            _ => (0..n).map(f).sum(),
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Size the global rayon pool from `QFLUCT_WORKERS`, if set.
///
/// Returns the number of workers in effect. Calling it more than once is
/// harmless; only the first successful initialisation counts.
pub fn configure_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
        {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_preserve_order() {
        let xs: Vec<u64> = (0..100).collect();
        let a = Execution::Parallel.map(&xs, |x| x * x);
        let b = Execution::Sequential.map(&xs, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(a[7], 49);
    }

    #[test]
    fn indexed_sum_matches() {
        let f = |i: usize| crate::C64::new(i as f64, 1.0);
        let a = Execution::Parallel.sum_indexed(1000, f);
        let b = Execution::Sequential.sum_indexed(1000, f);
        assert!((a - b).norm() < 1e-9);
    }
}
