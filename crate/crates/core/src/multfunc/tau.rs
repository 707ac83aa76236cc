//! Ramanujan `τ(n)` from `Δ = q η(q)^{24}`, where `η³ = Σ (−1)^k (2k+1) q^{k(k+1)/2}`.
//!
//! Values are held as residues modulo the five [`ntt::PRIMES`] and
//! reconstructed on demand, since `|τ(n)|` passes `2^{127}` well before `10⁷`.

use std::sync::Arc;

use num_bigint::BigInt;
use rayon::prelude::*;

use super::ntt::{self, Wide, PRIMES};
use super::{Kind, MultFuncTable, Normalization, Values};
use crate::error::{Error, Result};

/// Default upper limit on `N` for [`tau_table`].
pub const DEFAULT_CAP: u64 = 10_000_000;

/// Below this length the sparse path is used.
const SPARSE_LIMIT: u64 = 4096;

/// Sparse `η³` truncated to degree `< len` as `(exponent, coefficient)`.
fn eta_cubed(len: usize) -> Vec<(usize, i64)> {
    let mut out = Vec::new();
    let mut k = 0usize;
    while k * (k + 1) / 2 < len {
        let c = (2 * k + 1) as i64;
        out.push((k * (k + 1) / 2, if k % 2 == 0 { c } else { -c }));
        k += 1;
    }
    out
}

/// `τ(1..=n)` exactly, by seven multiplications with sparse `η³`.
/// Slot 0 holds zero. Fails with `Overflow` if an intermediate leaves `i128`.
pub fn tau_sparse(n: u64) -> Result<Vec<i128>> {
    let len = n as usize;
    let e3 = eta_cubed(len);
    let mut acc = vec![0i128; len];
    for &(e, c) in &e3 {
        acc[e] = c as i128;
    }
    for _ in 0..7 {
        let mut next = vec![0i128; len];
        for (i, &a) in acc.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for &(e, c) in &e3 {
                if i + e >= len {
                    break;
                }
                let t = a.checked_mul(c as i128).ok_or(Error::Overflow(i as i128))?;
                next[i + e] = next[i + e].checked_add(t).ok_or(Error::Overflow(i as i128))?;
            }
        }
        acc = next;
    }
    let mut out = Vec::with_capacity(len + 1);
    out.push(0);
    out.extend(acc);
    Ok(out)
}

/// Exact `τ(1..=N)` with a normalized copy `τ(n)/n^{11/2}`.
#[derive(Clone, Debug)]
pub struct TauTable {
    residues: Vec<[u32; 5]>,
    normalized: Vec<f64>,
}

impl TauTable {
    pub fn len(&self) -> u64 {
        self.residues.len() as u64 - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn wide(&self, n: u64) -> Wide {
        Wide::from_residues(&self.residues[n as usize])
    }

    pub fn tau(&self, n: u64) -> BigInt {
        self.wide(n).to_bigint()
    }

    /// `τ(n)` when it fits in `i128`.
    pub fn tau_i128(&self, n: u64) -> Option<i128> {
        self.wide(n).to_i128()
    }

    /// `τ(n) n^{−11/2}`.
    pub fn normalized(&self, n: u64) -> f64 {
        self.normalized[n as usize]
    }

    pub fn residues(&self) -> &[[u32; 5]] {
        &self.residues
    }

    pub fn from_residues(residues: Vec<[u32; 5]>) -> Self {
        let normalized = residues
            .par_iter()
            .enumerate()
            .map(|(n, r)| {
                if n == 0 {
                    0.0
                } else {
                    Wide::from_residues(r).to_f64() / (n as f64).powf(5.5)
                }
            })
            .collect();
        TauTable {
            residues,
            normalized,
        }
    }

    fn from_exact(v: &[i128]) -> Self {
        Self::from_residues(v.iter().map(|&x| Wide::from_i128(x).residues()).collect())
    }

    /// Primes `p ≤ p_max` with `τ(p)² > 4 p^{11}`.
    pub fn deligne_violations(&self, p_max: u64) -> Vec<u64> {
        let primes = super::sieve::primes_up_to(p_max.min(self.len()));
        primes
            .par_iter()
            .filter_map(|&p| {
                let p = p as u64;
                let t = self.tau(p);
                let bound = BigInt::from(4) * BigInt::from(p).pow(11);
                (&t * &t > bound).then_some(p)
            })
            .collect()
    }

    /// Prime powers `p^{k+1} ≤ bound`, `k ≥ 1`, where
    /// `τ(p) τ(p^k) ≠ τ(p^{k+1}) + p^{11} τ(p^{k−1})`.
    pub fn hecke_violations(&self, bound: u64) -> Vec<(u64, u32)> {
        let bound = bound.min(self.len());
        let primes = super::sieve::primes_up_to(bound.isqrt());
        primes
            .par_iter()
            .flat_map_iter(|&p| {
                let p = p as u64;
                let p11 = BigInt::from(p).pow(11);
                let tp = self.tau(p);
                let mut bad = Vec::new();
                let (mut prev, mut cur, mut pk, mut k) = (self.tau(1), tp.clone(), p, 1u32);
                while let Some(next_pk) = pk.checked_mul(p).filter(|&x| x <= bound) {
                    let next = self.tau(next_pk);
                    if &tp * &cur != &next + &p11 * &prev {
                        bad.push((p, k));
                    }
                    prev = cur;
                    cur = next;
                    pk = next_pk;
                    k += 1;
                }
                bad
            })
            .collect()
    }
}

/// `τ(1..=n)` with the default cap.
pub fn tau_table(n: u64) -> Result<TauTable> {
    tau_table_with_cap(n, DEFAULT_CAP)
}

pub fn tau_table_with_cap(n: u64, cap: u64) -> Result<TauTable> {
    if n > cap {
        return Err(Error::CapacityExceeded(format!("tau table to {n} exceeds the cap {cap}")));
    }
    if n > 1 << (ntt::MAX_LOG2 - 1) {
        return Err(Error::CapacityExceeded(format!(
            "tau table to {n} exceeds the transform length 2^{}",
            ntt::MAX_LOG2
        )));
    }
    if n <= SPARSE_LIMIT {
        return Ok(TauTable::from_exact(&tau_sparse(n)?));
    }
    Ok(TauTable::from_residues(tau_ntt(n)))
}

/// Residues of `τ(1..=n)`: `η⁶` exactly from two sparse factors, then
/// `η¹²` and `η²⁴` by truncated squaring modulo each prime.
fn tau_ntt(n: u64) -> Vec<[u32; 5]> {
    let len = n as usize;
    let e3 = eta_cubed(len);
    let mut e6 = vec![0i64; len];
    for &(i, a) in &e3 {
        for &(j, b) in &e3 {
            if i + j >= len {
                break;
            }
            e6[i + j] += a * b;
        }
    }
    let per_prime: Vec<Vec<u32>> = (0..PRIMES.len())
        .into_par_iter()
        .map(|idx| {
            let p = PRIMES[idx];
            let a: Vec<u32> = e6.iter().map(|&x| ntt::reduce_i64(x, p)).collect();
            let a = ntt::square_mod(idx, &a, len);
            ntt::square_mod(idx, &a, len)
        })
        .collect();
    let mut out = Vec::with_capacity(len + 1);
    out.push([0u32; 5]);
    out.extend((0..len).map(|i| std::array::from_fn(|k| per_prime[k][i])));
    out
}

/// `λ_Δ(n) = τ(n) n^{−11/2}`, keeping the exact table alongside.
pub fn normalize_gl2(tau: Arc<TauTable>) -> MultFuncTable {
    let values = Values::Real(tau.normalized.clone());
    MultFuncTable::new(Kind::LambdaPiGl2, Normalization::Analytic, "lambda_delta", values).with_tau(tau)
}

/// `τ` residues as a table whose values are `τ(n)` as floats.
pub fn tau_as_table(tau: &TauTable) -> MultFuncTable {
    let values = (0..=tau.len())
        .map(|n| if n == 0 { 0.0 } else { tau.wide(n).to_f64() })
        .collect();
    MultFuncTable::new(Kind::Custom, Normalization::Arithmetic, "tau", Values::Real(values))
}
