//! Pointwise checks of `log n = Σ_{d|n} Λ(d)` and of Vaughan's identity.

use crate::error::Result;
use crate::multfunc::sieve::{mobius, prime_power_base, SieveConfig};

use super::icbrt;

fn lambda_table(n: u64) -> Result<Vec<f64>> {
    let base = prime_power_base(n, &SieveConfig::default())?;
    Ok(base.iter().map(|&p| if p == 0 { 0.0 } else { (p as f64).ln() }).collect())
}

/// `max_{n ≤ N} |log n − Σ_{d|n} Λ(d)|`.
pub fn von_mangoldt_log_identity(n: u64) -> Result<f64> {
    let lam = lambda_table(n)?;
    let mut acc = vec![0.0f64; n as usize + 1];
    for d in 2..=n as usize {
        if lam[d] != 0.0 {
            for m in (d..=n as usize).step_by(d) {
                acc[m] += lam[d];
            }
        }
    }
    Ok((1..=n as usize)
        .map(|m| ((m as f64).ln() - acc[m]).abs())
        .fold(0.0, f64::max))
}

/// The four terms of Vaughan's identity at every `n ≤ N`, with `V = ⌊N^{1/3}⌋`:
/// `Λ(n)1_{n≤V}`, `−Σ_{d|n} a_d`, `Σ_{d|n, d≤V} μ(d) log(n/d)` and
/// `Σ_{mk=n, m,k>V} Λ(m) b_k`.
pub fn vaughan_terms(n: u64) -> Result<[Vec<f64>; 4]> {
    let len = n as usize + 1;
    let v = icbrt(n) as usize;
    let lam = lambda_table(n)?;
    let mu = mobius(n, &SieveConfig::default())?;

    let mut t1 = vec![0.0; len];
    t1[..=v.min(n as usize)].copy_from_slice(&lam[..=v.min(n as usize)]);

    // a_d = Σ_{bc=d, b,c ≤ V} μ(b) Λ(c), supported on d ≤ V²
    let mut a = vec![0.0; v * v + 1];
    for bb in 1..=v {
        if mu[bb] == 0 {
            continue;
        }
        for c in 2..=v {
            a[bb * c] += mu[bb] as f64 * lam[c];
        }
    }
    let mut t2 = vec![0.0; len];
    for (d, &ad) in a.iter().enumerate().skip(1) {
        if ad != 0.0 && d < len {
            for m in (d..len).step_by(d) {
                t2[m] -= ad;
            }
        }
    }

    let mut t3 = vec![0.0; len];
    for d in 1..=v {
        if mu[d] == 0 {
            continue;
        }
        for (k, m) in (d..len).step_by(d).enumerate() {
            t3[m] += mu[d] as f64 * ((k + 1) as f64).ln();
        }
    }

    // b_k = Σ_{c|k, c>V} μ(c), needed for k ≤ N/(V+1)
    let kmax = n as usize / (v + 1);
    let mut bk = vec![0i64; kmax + 1];
    for c in v + 1..=kmax {
        if mu[c] != 0 {
            for k in (c..=kmax).step_by(c) {
                bk[k] += mu[c] as i64;
            }
        }
    }
    let mut t4 = vec![0.0; len];
    for m in v + 1..len {
        if lam[m] == 0.0 {
            continue;
        }
        for k in v + 1..=(n as usize / m) {
            if bk[k] != 0 {
                t4[m * k] += lam[m] * bk[k] as f64;
            }
        }
    }
    Ok([t1, t2, t3, t4])
}

/// `max_{n ≤ N} |Λ(n) − (sum of the four Vaughan terms)|`.
pub fn vaughan_check(n: u64) -> Result<f64> {
    let lam = lambda_table(n)?;
    let [t1, t2, t3, t4] = vaughan_terms(n)?;
    Ok((1..=n as usize)
        .map(|m| (lam[m] - (t1[m] + t2[m] + t3[m] + t4[m])).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_identities() {
        assert!(von_mangoldt_log_identity(200).unwrap() < 1e-12);
        assert!(vaughan_check(1000).unwrap() < 1e-9);
    }
}
