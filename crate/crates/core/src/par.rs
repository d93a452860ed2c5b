//! Data-parallel helpers. With the `parallel` feature the work runs on a
//! rayon pool; without it everything runs sequentially on the caller's
//! thread. Results are identical either way.

/// Worker count for a batch job. `0` means "all available cores".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Jobs(pub usize);

impl Jobs {
    pub const SEQUENTIAL: Jobs = Jobs(1);
    pub const ALL: Jobs = Jobs(0);

    pub fn is_sequential(self) -> bool {
        self.0 == 1 || !cfg!(feature = "parallel")
    }
}

impl Default for Jobs {
    fn default() -> Self {
        Jobs::SEQUENTIAL
    }
}

/// `(0..n).map(f).collect()`, in index order.
pub fn map_indices<T, F>(n: usize, jobs: Jobs, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if jobs.is_sequential() {
        return (0..n).map(f).collect();
    }
    imp::map_indices(n, jobs, f)
}

pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    imp::join(a, b)
}

#[cfg(feature = "parallel")]
mod imp {
    use super::Jobs;
    use rayon::prelude::*;

    pub fn map_indices<T, F>(n: usize, jobs: Jobs, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let run = || (0..n).into_par_iter().map(&f).collect();
        if jobs.0 == 0 {
            return run();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(jobs.0).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        }
    }

    pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send,
    {
        rayon::join(a, b)
    }
}

#[cfg(not(feature = "parallel"))]
mod imp {
    use super::Jobs;

    pub fn map_indices<T, F>(n: usize, _jobs: Jobs, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }

    pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send,
    {
        (a(), b())
    }
}
