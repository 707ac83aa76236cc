//! The log-weighted sum `Σ_{n∈[N]} log(m) f(m) F(g(n)Γ)`, `m = W(n−1)+b`,
//! split by expanding `log m = Σ_{p^k | m} log p`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{nil_value, validate, CorrelationOptions};
use crate::error::Result;
use crate::multfunc::conditions::tricked_index;
use crate::multfunc::sieve::{factor_with, smallest_prime_factor, SieveConfig};
use crate::multfunc::MultFuncTable;
use crate::nilgroup::LipschitzTestFunction;
use crate::polyseq::PolySequence;
use crate::scalar::Scalar;

/// Contribution of primes `lo < p ≤ hi` to a split part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicBin {
    pub lo: f64,
    pub hi: f64,
    pub value: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MVDecomposition {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "U")]
    pub u: u64,
    /// The log-weighted sum computed directly.
    pub total: Complex64,
    /// `Σ_{p | m, p ≤ U} log p f(p) f(m/p) F`.
    pub small_prime_part: Complex64,
    /// `Σ_{p | m, p > U} log p f(p) f(m/p) F`.
    pub large_prime_part: Complex64,
    /// `Σ_{p^k | m, k ≥ 2} log p f(m) F`.
    pub prime_power_part: Complex64,
    /// `Σ_{p | m} log p (f(m) − f(p) f(m/p)) F`, supported on `p² | m` when `f` is multiplicative.
    pub nonsplit_part: Complex64,
    /// Small primes in `(2^{−k−1}U, 2^{−k}U]`, then large primes in `(2^k U, 2^{k+1}U]`.
    pub dyadic_breakdown: Vec<DyadicBin>,
}

impl MVDecomposition {
    pub fn reassembled(&self) -> Complex64 {
        self.small_prime_part + self.large_prime_part + self.prime_power_part + self.nonsplit_part
    }

    /// `|parts − total| / max(|total|, 1)`.
    pub fn relative_error(&self) -> f64 {
        (self.reassembled() - self.total).norm() / self.total.norm().max(1.0)
    }
}

#[derive(Clone)]
struct Acc {
    total: Complex64,
    small: Complex64,
    large: Complex64,
    pp: Complex64,
    nonsplit: Complex64,
    small_bins: Vec<Complex64>,
    large_bins: Vec<Complex64>,
}

impl Acc {
    fn new(nsmall: usize, nlarge: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Acc {
            total: z,
            small: z,
            large: z,
            pp: z,
            nonsplit: z,
            small_bins: vec![z; nsmall],
            large_bins: vec![z; nlarge],
        }
    }

    fn merge(mut self, o: &Acc) -> Acc {
        self.total += o.total;
        self.small += o.small;
        self.large += o.large;
        self.pp += o.pp;
        self.nonsplit += o.nonsplit;
        for (a, b) in self.small_bins.iter_mut().zip(&o.small_bins) {
            *a += b;
        }
        for (a, b) in self.large_bins.iter_mut().zip(&o.large_bins) {
            *a += b;
        }
        self
    }
}

/// Index `k` with `2^{−k−1}U < p ≤ 2^{−k}U`.
fn small_bin(p: u64, u: u64) -> usize {
    let mut k = 0;
    let mut hi = u as f64;
    while (p as f64) <= hi / 2.0 {
        hi /= 2.0;
        k += 1;
    }
    k
}

/// Index `k` with `2^k U < p ≤ 2^{k+1}U`.
fn large_bin(p: u64, u: u64) -> usize {
    let mut k = 0;
    let mut hi = 2.0 * u as f64;
    while (p as f64) > hi {
        hi *= 2.0;
        k += 1;
    }
    k
}

/// `U = ⌊N^{2/3}⌋`.
pub fn cutoff(n: u64) -> u64 {
    let n2 = n as u128 * n as u128;
    let mut u = (n as f64).powf(2.0 / 3.0).round() as u128;
    while u * u * u > n2 {
        u -= 1;
    }
    while (u + 1).pow(3) <= n2 {
        u += 1;
    }
    u as u64
}

pub fn log_weight_decompose<S: Scalar>(
    f: &MultFuncTable,
    g: &PolySequence<S>,
    big_f: &LipschitzTestFunction,
    n: u64,
    w: u64,
    b: u64,
    opts: &CorrelationOptions,
) -> Result<MVDecomposition> {
    validate(f, n, w, b)?;
    big_f.check_manifold(g.manifold())?;
    let u = cutoff(n);
    let max_m = if n == 0 { 1 } else { tricked_index(w, b, n) };
    let spf = smallest_prime_factor(max_m, &SieveConfig::default())?;
    let nsmall = small_bin(1, u.max(1)) + 1;
    let nlarge = large_bin(max_m.max(1), u.max(1)) + 1;

    let chunk = opts.chunk_size.max(1) as u64;
    let chunks: Vec<Acc> = (0..n.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut acc = Acc::new(nsmall, nlarge);
            for i in c * chunk + 1..=((c + 1) * chunk).min(n) {
                let m = tricked_index(w, b, i);
                let fm = f.get(m);
                let big = nil_value(g, big_f, i);
                acc.total += (m as f64).ln() * fm * big;
                for (p, e) in factor_with(&spf, m) {
                    let lp = (p as f64).ln();
                    let split = f.get(p) * f.get(m / p);
                    let sv = lp * split * big;
                    if p <= u {
                        acc.small += sv;
                        acc.small_bins[small_bin(p, u)] += sv;
                    } else {
                        acc.large += sv;
                        acc.large_bins[large_bin(p, u)] += sv;
                    }
                    acc.nonsplit += lp * (fm - split) * big;
                    if e >= 2 {
                        acc.pp += (e - 1) as f64 * lp * fm * big;
                    }
                }
            }
            acc
        })
        .collect();
    let total = chunks.iter().fold(Acc::new(nsmall, nlarge), |a, c| a.merge(c));

    let uf = u as f64;
    let mut bins = Vec::new();
    for (k, v) in total.small_bins.iter().enumerate() {
        let hi = uf / 2f64.powi(k as i32);
        bins.push(DyadicBin {
            lo: hi / 2.0,
            hi,
            value: *v,
        });
    }
    for (k, v) in total.large_bins.iter().enumerate() {
        let lo = uf * 2f64.powi(k as i32);
        bins.push(DyadicBin {
            lo,
            hi: 2.0 * lo,
            value: *v,
        });
    }
    Ok(MVDecomposition {
        n,
        u,
        total: total.total,
        small_prime_part: total.small,
        large_prime_part: total.large,
        prime_power_part: total.pp,
        nonsplit_part: total.nonsplit,
        dyadic_breakdown: bins,
    })
}
