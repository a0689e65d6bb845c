//! Data-parallel map over replicate indices.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] runs on
//! rayon; without it every execution mode is serial. Results are always
//! returned in index order, so output never depends on the mode.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    /// Parallel with at most `jobs` worker threads (`None`: rayon's default).
    #[default]
    Parallel,
    ParallelJobs(usize),
}

impl Execution {
    /// `--jobs` semantics: 1 means serial, 0 means "all cores".
    pub fn from_jobs(jobs: usize) -> Self {
        match jobs {
            1 => Execution::Serial,
            0 => Execution::Parallel,
            n => Execution::ParallelJobs(n),
        }
    }
}

pub fn map_range<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Serial => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        #[cfg(feature = "parallel")]
        Execution::ParallelJobs(jobs) => {
            use rayon::prelude::*;
            match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                Ok(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
                Err(e) => {
                    log::warn!("could not build a {jobs}-thread pool ({e}); running serially");
                    (0..n).map(f).collect()
                }
            }
        }
        #[cfg(not(feature = "parallel"))]
        _ => (0..n).map(f).collect(),
    }
}
