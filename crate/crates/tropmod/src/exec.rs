//! Sequential/parallel execution of independent work items.
//!
//! The expensive parts of this crate (brute-force orbit enumerations, the
//! cross-validation sweeps in [`crate::verify`]) decompose into independent
//! cells. `map_cells` runs such a batch either sequentially or on the rayon
//! pool, always returning results in input order so that output stays
//! deterministic. Without the `parallel` feature both modes run
//! sequentially.

/// How a batch of independent cells should be executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// One cell after another on the calling thread.
    Sequential,
    /// Cells distributed over the rayon thread pool (needs the `parallel`
    /// feature; falls back to sequential without it).
    #[default]
    Parallel,
}

/// Apply `f` to every item, preserving input order in the output.
pub fn map_cells<I, T, F>(mode: ExecMode, items: Vec<I>, f: F) -> Vec<T>
where
    I: Send,
    T: Send,
    F: Fn(I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == ExecMode::Parallel {
            use rayon::prelude::*;
            return items.into_par_iter().map(f).collect();
        }
    }
    let _ = mode;
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_in_both_modes() {
        let items: Vec<u64> = (0..100).collect();
        let seq = map_cells(ExecMode::Sequential, items.clone(), |x| x * x);
        let par = map_cells(ExecMode::Parallel, items, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }
}
