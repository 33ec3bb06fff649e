//! Execution backend for data-parallel maps.

/// How data-parallel loops are run. Results do not depend on the choice:
/// every parallel map writes to fixed slots and reductions happen in index order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        return Exec::Parallel;
        #[cfg(not(feature = "parallel"))]
        return Exec::Sequential;
    }
}

/// Below this many items the parallel backend runs inline.
pub const PARALLEL_MIN_ITEMS: usize = 512;

impl Exec {
    /// `out[i] = f(i)` for every slot.
    pub fn fill<T, F>(self, out: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => out.iter_mut().enumerate().for_each(|(i, x)| *x = f(i)),
            #[cfg(feature = "parallel")]
            Exec::Parallel if out.len() < PARALLEL_MIN_ITEMS => {
                Exec::Sequential.fill(out, f)
            }
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                out.par_iter_mut().enumerate().for_each(|(i, x)| *x = f(i));
            }
        }
    }

    /// Collects `f(i)` for `i in 0..n`, in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel if n < PARALLEL_MIN_ITEMS => Exec::Sequential.map(n, f),
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
        }
    }
}
