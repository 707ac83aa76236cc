//! Empirical statistics for the progression-equidistribution and `L²`
//! conditions on a `W`-tricked multiplicative function.
//!
//! The `W`-tricked function is read as `n ↦ f(W(n−1)+b)` for `n ∈ [N] = {1..N}`,
//! so that `W = b = 1` gives `f` itself.

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sieve::primes_up_to;
use super::{euler_phi, MultFuncTable, SUM_CHUNK};
use crate::error::{Error, Result};
use crate::summation::{chunked_sum, pairwise_sum_f64, scan_progressions, Progression};

/// Window stride divisor for the progression scan.
const STRIDE_DIV: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub n: u64,
    pub w_equi_stat: f64,
    /// Progression attaining `w_equi_stat`, in `[N]` coordinates.
    pub w_equi_witness: Option<Progression>,
    pub lp2_ratio: f64,
    pub fl2_ratio: f64,
    /// `(b′, ratio)` for each `1 ≤ b′ ≤ W` coprime to `W`.
    pub wl2_ratios: Vec<(u64, f64)>,
    pub c_used: f64,
    pub w_used: u64,
    pub b_used: u64,
    /// Largest modulus scanned, `⌊(log N)^C⌋`.
    pub q_max: u64,
    /// Shortest progression scanned, `⌈N/(log N)^C⌉`.
    pub min_len: u64,
}

/// Index into the table of the `n`-th term of the `W`-tricked function.
#[inline]
pub fn tricked_index(w: u64, b: u64, n: u64) -> u64 {
    w * (n - 1) + b
}

/// `𝔼_{n∈[N]} f(W(n−1)+b)`.
pub fn tricked_mean(f: &MultFuncTable, w: u64, b: u64, n: u64) -> Result<Complex64> {
    if n == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    f.check_len(tricked_index(w, b, n))?;
    Ok(chunked_sum(n as usize, SUM_CHUNK, |i| f.get(tricked_index(w, b, i as u64 + 1))) / n as f64)
}

pub fn check_conditions(f: &MultFuncTable, w: u64, b: u64, c: f64, n: u64) -> Result<ConditionReport> {
    if w == 0 || b == 0 || b > w {
        return Err(Error::Config {
            path: "b".into(),
            msg: format!("need 1 ≤ b ≤ W, got W = {w}, b = {b}"),
        });
    }
    if b.gcd(&w) != 1 {
        return Err(Error::NonCoprime { b, w });
    }
    if n < 3 {
        return Err(Error::Config {
            path: "n".into(),
            msg: "N must be at least 3".into(),
        });
    }
    let logn = (n as f64).ln();
    let scale = logn.powf(c);
    if w as f64 > scale {
        return Err(Error::Config {
            path: "w".into(),
            msg: format!("W = {w} exceeds (log N)^C = {scale:.3}"),
        });
    }
    f.check_len(w * n)?;

    let q_max = scale.floor().max(1.0) as u64;
    let min_len = (n as f64 / scale).ceil().max(1.0) as u64;
    let density = euler_phi(w) as f64 / w as f64;

    let values: Vec<Complex64> = (1..=n)
        .into_par_iter()
        .map(|k| f.get(tricked_index(w, b, k)))
        .collect();
    let mean = chunked_sum(values.len(), SUM_CHUNK, |i| values[i]) / n as f64;
    let (gap, witness) = if values.iter().all(|v| *v == values[0]) {
        (0.0, None)
    } else {
        match scan_progressions(&values, mean, q_max, min_len, STRIDE_DIV) {
            Some((g, p)) => (g, Some(p)),
            None => (0.0, None),
        }
    };
    drop(values);

    let primes = primes_up_to(n);
    let lp2: Vec<f64> = primes
        .par_iter()
        .map(|&p| f.get(p as u64).norm_sqr() * (p as f64).ln())
        .collect();
    let lp2_ratio = pairwise_sum_f64(&lp2) / n as f64;

    let fl2_ratio = chunked_sum(n as usize, SUM_CHUNK, |i| Complex64::new(f.get(i as u64 + 1).norm_sqr(), 0.0)).re
        / n as f64;

    let wl2_ratios = (1..=w)
        .filter(|bp| bp.gcd(&w) == 1)
        .map(|bp| {
            let s = chunked_sum(n as usize, SUM_CHUNK, |i| {
                Complex64::new(f.get(tricked_index(w, bp, i as u64 + 1)).norm_sqr(), 0.0)
            });
            (bp, density * s.re / n as f64)
        })
        .collect();

    Ok(ConditionReport {
        n,
        w_equi_stat: density * gap * logn,
        w_equi_witness: witness,
        lp2_ratio,
        fl2_ratio,
        wl2_ratios,
        c_used: c,
        w_used: w,
        b_used: b,
        q_max,
        min_len,
    })
}
