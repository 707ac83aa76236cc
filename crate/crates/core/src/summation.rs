//! Deterministic summation and the progression scan shared by the
//! equidistribution and condition checks.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Below this length sums are taken left to right.
const PAIRWISE_BASE: usize = 128;

pub fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    if v.len() <= PAIRWISE_BASE {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn pairwise_sum_f64(v: &[f64]) -> f64 {
    if v.len() <= PAIRWISE_BASE {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum_f64(a) + pairwise_sum_f64(b)
}

/// `Σ_{i < len} term(i)`.
///
/// Indices are cut into chunks of `chunk` terms. Each chunk is summed
/// pairwise, and the chunk sums are combined pairwise in index order, so the
/// result depends on `chunk` but not on the number of threads.
pub fn chunked_sum<F>(len: usize, chunk: usize, term: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let chunk = chunk.max(1);
    let partial: Vec<Complex64> = (0..len.div_ceil(chunk))
        .into_par_iter()
        .map(|c| chunk_total(c, chunk, len, &term))
        .collect();
    pairwise_sum(&partial)
}

/// Single-threaded [`chunked_sum`]; bit-identical to it.
pub fn chunked_sum_serial<F>(len: usize, chunk: usize, term: F) -> Complex64
where
    F: Fn(usize) -> Complex64,
{
    let chunk = chunk.max(1);
    let partial: Vec<Complex64> = (0..len.div_ceil(chunk))
        .map(|c| chunk_total(c, chunk, len, &term))
        .collect();
    pairwise_sum(&partial)
}

fn chunk_total<F: Fn(usize) -> Complex64>(c: usize, chunk: usize, len: usize, term: &F) -> Complex64 {
    let lo = c * chunk;
    let hi = (lo + chunk).min(len);
    let buf: Vec<Complex64> = (lo..hi).map(term).collect();
    pairwise_sum(&buf)
}

/// `{a, a+q, …, a+(len−1)q}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progression {
    pub a: u64,
    pub q: u64,
    pub len: u64,
}

/// Largest `|𝔼_{n∈P} v(n) − center|` over progressions `P ⊆ [N]` with
/// common difference `q` and length at least `min_len`, where `values[i]`
/// holds `v(i+1)`.
///
/// Each residue class is checked whole, together with windows of length
/// `min_len` whose starts advance by `⌈min_len/stride_div⌉` terms. Ties keep
/// the first progression found.
pub fn scan_modulus(
    values: &[Complex64],
    center: Complex64,
    q: u64,
    min_len: u64,
    stride_div: usize,
) -> Option<(f64, Progression)> {
    let n = values.len() as u64;
    let min_len = min_len.max(1);
    let mut best: Option<(f64, Progression)> = None;
    let mut prefix: Vec<Complex64> = Vec::new();
    for r in 1..=q.min(n) {
        let run = (n - r) / q + 1;
        if run < min_len {
            continue;
        }
        prefix.clear();
        prefix.push(Complex64::new(0.0, 0.0));
        let mut acc = Complex64::new(0.0, 0.0);
        let mut comp = Complex64::new(0.0, 0.0);
        for j in 0..run {
            let y = values[(r + j * q - 1) as usize] - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            prefix.push(acc);
        }
        let mut consider = |start: u64, len: u64| {
            let s = prefix[(start + len) as usize] - prefix[start as usize];
            let gap = (s / len as f64 - center).norm();
            if best.as_ref().is_none_or(|b| gap > b.0) {
                best = Some((
                    gap,
                    Progression {
                        a: r + start * q,
                        q,
                        len,
                    },
                ));
            }
        };
        consider(0, run);
        if min_len < run {
            let stride = min_len.div_ceil(stride_div.max(1) as u64).max(1);
            let mut s = 0;
            while s + min_len <= run {
                consider(s, min_len);
                s += stride;
            }
            consider(run - min_len, min_len);
        }
    }
    best
}

/// [`scan_modulus`] over `1 ≤ q ≤ q_max` in parallel; the reduction keeps the
/// smallest `q` among equal gaps.
pub fn scan_progressions(
    values: &[Complex64],
    center: Complex64,
    q_max: u64,
    min_len: u64,
    stride_div: usize,
) -> Option<(f64, Progression)> {
    let per_q: Vec<Option<(f64, Progression)>> = (1..=q_max.max(1))
        .into_par_iter()
        .map(|q| scan_modulus(values, center, q, min_len, stride_div))
        .collect();
    per_q.into_iter().flatten().fold(None, |b, r| match b {
        Some(b) if b.0 >= r.0 => Some(b),
        _ => Some(r),
    })
}
