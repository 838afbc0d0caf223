//! Index-ordered map over a range, parallel when the `parallel` feature is
//! on.  Callers reduce the returned vector sequentially, which keeps every
//! report bitwise identical regardless of thread count.

#[cfg(feature = "parallel")]
pub(crate) fn indexed_map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn indexed_map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..len).map(f).collect()
}

pub(crate) fn indexed_map_seq<T, F>(len: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..len).map(f).collect()
}
