//! Order-fixed summation.
//!
//! Indices are split into fixed blocks, each block is reduced by a pairwise
//! recursion, and the block partials are reduced pairwise again. The grouping
//! never depends on the number of worker threads, so results are bit-identical
//! whether rayon runs on one core or many.

use rayon::prelude::*;

const BLOCK: usize = 2048;
const LEAF: usize = 16;

/// Pairwise sum of a slice.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn range_sum<const K: usize, F: Fn(usize) -> [f64; K]>(f: &F, lo: usize, hi: usize) -> [f64; K] {
    if hi - lo <= LEAF {
        let mut s = [0.0; K];
        for i in lo..hi {
            let v = f(i);
            for k in 0..K {
                s[k] += v[k];
            }
        }
        return s;
    }
    let mid = lo + (hi - lo) / 2;
    let a = range_sum(f, lo, mid);
    let b = range_sum(f, mid, hi);
    let mut s = [0.0; K];
    for k in 0..K {
        s[k] = a[k] + b[k];
    }
    s
}

fn merge<const K: usize>(parts: &[[f64; K]]) -> [f64; K] {
    if parts.is_empty() {
        return [0.0; K];
    }
    if parts.len() == 1 {
        return parts[0];
    }
    let mid = parts.len() / 2;
    let a = merge(&parts[..mid]);
    let b = merge(&parts[mid..]);
    let mut s = [0.0; K];
    for k in 0..K {
        s[k] = a[k] + b[k];
    }
    s
}

/// Deterministic parallel sum of `K` accumulators over `0..n`.
pub fn det_sum_k<const K: usize, F>(n: usize, f: F) -> [f64; K]
where
    F: Fn(usize) -> [f64; K] + Sync,
{
    let nb = n.div_ceil(BLOCK);
    let parts: Vec<[f64; K]> = (0..nb).into_par_iter().map(|b| range_sum(&f, b * BLOCK, ((b + 1) * BLOCK).min(n))).collect();
    merge(&parts)
}

/// Deterministic parallel sum of a scalar function over `0..n`.
pub fn det_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    det_sum_k::<1, _>(n, |i| [f(i)])[0]
}
