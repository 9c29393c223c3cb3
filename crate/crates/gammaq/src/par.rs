//! Deterministic data-parallel summation.
//!
//! Every exhaustive sum in the crate runs through [`sum_indexed`]: the index
//! range is cut into fixed-size chunks, each chunk is Kahan-summed in index
//! order, and the chunk results are combined in chunk order. The reduction
//! tree therefore does not depend on the number of worker threads, so the
//! parallel build (feature `parallel`, on by default) produces bit-identical
//! results to the sequential fallback.

use crate::scalar::{Kahan, C};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length of the fixed reduction tree.
pub const CHUNK: usize = 1024;

fn chunk_sum<F: Fn(usize) -> C>(lo: usize, hi: usize, f: &F) -> C {
    let mut k = Kahan::new();
    for i in lo..hi {
        k.add(f(i));
    }
    k.value()
}

fn combine(parts: impl Iterator<Item = C>) -> C {
    let mut k = Kahan::new();
    for p in parts {
        k.add(p);
    }
    k.value()
}

/// Sum `f(0) + f(1) + ... + f(count-1)` with the fixed reduction tree,
/// sequentially. This is the reference order for determinism claims.
pub fn sum_indexed_seq<F: Fn(usize) -> C + Sync>(count: usize, f: F) -> C {
    let parts = (0..count)
        .step_by(CHUNK)
        .map(|lo| chunk_sum(lo, (lo + CHUNK).min(count), &f));
    combine(parts)
}

/// Sum `f(0) + ... + f(count-1)` using the fixed reduction tree, distributing
/// chunks over the rayon pool when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn sum_indexed<F: Fn(usize) -> C + Sync>(count: usize, f: F) -> C {
    let parts: Vec<C> = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            chunk_sum(lo, (lo + CHUNK).min(count), &f)
        })
        .collect();
    combine(parts.into_iter())
}

/// Sequential fallback used when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn sum_indexed<F: Fn(usize) -> C + Sync>(count: usize, f: F) -> C {
    sum_indexed_seq(count, f)
}
