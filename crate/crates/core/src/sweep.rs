//! Batch helpers. With the `parallel` feature (on by default) work is
//! spread over rayon's pool; the `_seq` variants always run in order on the
//! calling thread. Results come back in input order either way.

use crate::error::Result;
use crate::families::{verify_family, FamilySpec, Report, VerifyOptions};
use crate::numberfield::FieldElement;
use crate::oracle::norm_cross_check;

#[cfg(feature = "parallel")]
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    seq_map(items, f)
}

pub fn seq_map<T, R, F: Fn(&T) -> R>(items: &[T], f: F) -> Vec<R> {
    items.iter().map(f).collect()
}

pub fn verify_sweep(specs: &[FamilySpec], opts: &VerifyOptions) -> Vec<Result<Report>> {
    par_map(specs, |s| verify_family(*s, opts))
}

pub fn verify_sweep_seq(specs: &[FamilySpec], opts: &VerifyOptions) -> Vec<Result<Report>> {
    seq_map(specs, |s| verify_family(*s, opts))
}

/// Elements whose two norm computations disagree.
pub fn norm_mismatches(elems: &[FieldElement]) -> Vec<usize> {
    par_map(elems, norm_cross_check)
        .into_iter()
        .enumerate()
        .filter_map(|(i, ok)| (!ok).then_some(i))
        .collect()
}

pub fn norm_mismatches_seq(elems: &[FieldElement]) -> Vec<usize> {
    seq_map(elems, norm_cross_check)
        .into_iter()
        .enumerate()
        .filter_map(|(i, ok)| (!ok).then_some(i))
        .collect()
}
