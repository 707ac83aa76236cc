//! Segmented sieves for μ, Liouville λ, Λ and smallest prime factors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveConfig {
    /// Upper bound on table memory in bytes.
    pub memory_budget: u64,
    /// Numbers per segment.
    pub segment: usize,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            memory_budget: 3 << 30,
            segment: 1 << 17,
        }
    }
}

impl SieveConfig {
    pub(crate) fn check(&self, n: u64, bytes_per_entry: u64) -> Result<()> {
        if n >= u32::MAX as u64 {
            return Err(Error::CapacityExceeded(format!("N = {n} exceeds the u32 index range")));
        }
        let need = (n + 1) * bytes_per_entry;
        if need > self.memory_budget {
            return Err(Error::CapacityExceeded(format!(
                "N = {n} needs {need} bytes, budget is {}",
                self.memory_budget
            )));
        }
        Ok(())
    }
}

/// Primes `≤ n` by the sieve of Eratosthenes on odd numbers.
pub fn primes_up_to(n: u64) -> Vec<u32> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let half = (n - 1) / 2; // odd numbers 3, 5, …, ≤ n
    let mut composite = vec![false; half + 1];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= n {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = (p * p - 1) / 2;
            while j <= half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut out = vec![2u32];
    out.extend((1..=half).filter(|&i| !composite[i]).map(|i| (2 * i + 1) as u32));
    out
}

fn base_primes(n: u64) -> Vec<u32> {
    primes_up_to(n.isqrt())
}

fn first_multiple(p: u64, lo: u64) -> u64 {
    lo.div_ceil(p) * p
}

/// `μ(0..=n)` with `μ(0) = 0`.
pub fn mobius(n: u64, cfg: &SieveConfig) -> Result<Vec<i8>> {
    cfg.check(n, 1)?;
    let primes = base_primes(n);
    let mut out = vec![0i8; n as usize + 1];
    out.par_chunks_mut(cfg.segment)
        .enumerate()
        .for_each(|(si, seg)| {
            let lo = (si * cfg.segment) as u64;
            let hi = lo + seg.len() as u64;
            let mut prod = vec![1u32; seg.len()];
            seg.fill(1);
            for &p in &primes {
                let p = p as u64;
                if p * p >= hi {
                    break;
                }
                let mut j = first_multiple(p, lo).max(p);
                while j < hi {
                    let k = (j - lo) as usize;
                    seg[k] = -seg[k];
                    prod[k] *= p as u32;
                    j += p;
                }
                let p2 = p * p;
                let mut j = first_multiple(p2, lo).max(p2);
                while j < hi {
                    seg[(j - lo) as usize] = 0;
                    j += p2;
                }
            }
            for (k, v) in seg.iter_mut().enumerate() {
                let x = lo + k as u64;
                if x == 0 {
                    *v = 0;
                } else if *v != 0 && prod[k] as u64 != x {
                    *v = -*v;
                }
            }
        });
    Ok(out)
}

/// `λ(0..=n) = (−1)^{Ω(n)}` with `λ(0) = 0`.
pub fn liouville(n: u64, cfg: &SieveConfig) -> Result<Vec<i8>> {
    cfg.check(n, 1)?;
    let primes = base_primes(n);
    let mut out = vec![0i8; n as usize + 1];
    out.par_chunks_mut(cfg.segment)
        .enumerate()
        .for_each(|(si, seg)| {
            let lo = (si * cfg.segment) as u64;
            let hi = lo + seg.len() as u64;
            let mut prod = vec![1u32; seg.len()];
            seg.fill(1);
            for &p in &primes {
                let p = p as u64;
                if p * p >= hi {
                    break;
                }
                let mut pk = p;
                while pk < hi {
                    let mut j = first_multiple(pk, lo).max(pk);
                    while j < hi {
                        let k = (j - lo) as usize;
                        seg[k] = -seg[k];
                        prod[k] *= p as u32;
                        j += pk;
                    }
                    pk *= p;
                }
            }
            for (k, v) in seg.iter_mut().enumerate() {
                let x = lo + k as u64;
                if x == 0 {
                    *v = 0;
                } else if prod[k] as u64 != x {
                    *v = -*v;
                }
            }
        });
    Ok(out)
}

/// For each `n ≤ N`, the prime `p` when `n = p^k` with `k ≥ 1`, else 0.
/// `Λ(n) = log p` is evaluated from this on demand.
pub fn prime_power_base(n: u64, cfg: &SieveConfig) -> Result<Vec<u32>> {
    cfg.check(n, 4)?;
    let primes = base_primes(n);
    let mut out = vec![0u32; n as usize + 1];
    out.par_chunks_mut(cfg.segment)
        .enumerate()
        .for_each(|(si, seg)| {
            let lo = (si * cfg.segment) as u64;
            let hi = lo + seg.len() as u64;
            let mut composite = vec![false; seg.len()];
            for &p in &primes {
                let p = p as u64;
                if p * p >= hi {
                    break;
                }
                let mut j = first_multiple(p, lo).max(p * p);
                while j < hi {
                    composite[(j - lo) as usize] = true;
                    j += p;
                }
            }
            for (k, v) in seg.iter_mut().enumerate() {
                let x = lo + k as u64;
                if x >= 2 && !composite[k] {
                    *v = x as u32;
                }
            }
        });
    for &p in &primes {
        let mut pk = p as u64 * p as u64;
        while pk <= n {
            out[pk as usize] = p;
            pk *= p as u64;
        }
    }
    Ok(out)
}

/// `spf[n]` is the least prime dividing `n`, with `spf[0] = spf[1] = 0`.
pub fn smallest_prime_factor(n: u64, cfg: &SieveConfig) -> Result<Vec<u32>> {
    cfg.check(n, 4)?;
    let primes = base_primes(n);
    let mut out = vec![0u32; n as usize + 1];
    out.par_chunks_mut(cfg.segment)
        .enumerate()
        .for_each(|(si, seg)| {
            let lo = (si * cfg.segment) as u64;
            let hi = lo + seg.len() as u64;
            for &p in &primes {
                let p = p as u64;
                if p * p >= hi {
                    break;
                }
                let mut j = first_multiple(p, lo).max(p * p);
                while j < hi {
                    let v = &mut seg[(j - lo) as usize];
                    if *v == 0 {
                        *v = p as u32;
                    }
                    j += p;
                }
            }
            for (k, v) in seg.iter_mut().enumerate() {
                let x = lo + k as u64;
                if x >= 2 && *v == 0 {
                    *v = x as u32;
                }
            }
        });
    Ok(out)
}

/// `(p, e)` pairs of `n` read off a smallest-prime-factor table.
pub fn factor_with(spf: &[u32], mut n: u64) -> smallvec::SmallVec<[(u64, u32); 8]> {
    let mut out = smallvec::SmallVec::new();
    while n > 1 {
        let p = spf[n as usize] as u64;
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        out.push((p, e));
    }
    out
}
