//! Element-wise kernels shared by the gate routines.
//!
//! Every kernel computes each output amplitude independently from the
//! input, so the parallel and sequential paths produce bit-identical
//! results. Reductions are always sequential for the same reason.

use num_complex::Complex64;

/// Below this length the parallel path is not worth the scheduling cost.
pub const PARALLEL_THRESHOLD: usize = 1 << 12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Parallel when the `parallel` feature is enabled and the output is
    /// long enough, sequential otherwise.
    #[default]
    Auto,
    /// Parallel whenever the `parallel` feature is enabled.
    Parallel,
}

impl Exec {
    #[cfg_attr(not(feature = "parallel"), allow(dead_code))]
    fn parallel_for(self, len: usize) -> bool {
        if !cfg!(feature = "parallel") {
            return false;
        }
        match self {
            Exec::Sequential => false,
            Exec::Auto => len >= PARALLEL_THRESHOLD,
            Exec::Parallel => true,
        }
    }
}

/// Builds a vector of `len` amplitudes where entry `i` is `f(i)`.
pub fn build<F>(exec: Exec, len: usize, f: F) -> Vec<Complex64>
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.parallel_for(len) {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Map over coarse work items (trajectories, shot batches), preserving order.
/// `Auto` parallelizes whenever there is more than one item.
pub fn map_items<T, R, F>(exec: Exec, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec != Exec::Sequential && items.len() > 1 {
        use rayon::prelude::*;
        return items.into_par_iter().map(f).collect();
    }
    let _ = exec;
    items.into_iter().map(f).collect()
}
