//! Satake parameters, Euler-product extension and coefficient-file ingestion.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sieve::{primes_up_to, smallest_prime_factor, SieveConfig};
use super::tau::TauTable;
use super::{Kind, MultFuncTable, Normalization, Values};
use crate::error::{Error, Result};

/// Relative slack in the log-scale comparison of the Satake bound.
const BOUND_SLACK: f64 = 1e-12;

/// Largest allowed disagreement between an imported `a_n` list and its
/// Euler-product extension.
pub const IMPORT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    BuiltinDelta,
    Imported,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomorphicSpec {
    pub m_rank: usize,
    pub satake_params: BTreeMap<u64, Vec<Complex64>>,
    pub source: Source,
    pub conductor_label: String,
    /// Archimedean parameters, carried along untouched.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub archimedean: Option<serde_json::Value>,
}

/// Parameters of `Δ` at primes `p ≤ p_max`: the roots of `x² − λ(p) x + 1`.
pub fn builtin_delta(tau: &TauTable, p_max: u64) -> AutomorphicSpec {
    let satake_params = primes_up_to(p_max.min(tau.len()))
        .into_iter()
        .map(|p| {
            let lam = tau.normalized(p as u64);
            let re = lam / 2.0;
            let im = (1.0 - re * re).max(0.0).sqrt();
            (p as u64, vec![Complex64::new(re, im), Complex64::new(re, -im)])
        })
        .collect();
    AutomorphicSpec {
        m_rank: 2,
        satake_params,
        source: Source::BuiltinDelta,
        conductor_label: "1.12.a.a".into(),
        archimedean: None,
    }
}

/// Complete homogeneous symmetric polynomials `h_0..=h_kmax` of `alphas`.
pub fn complete_homogeneous(alphas: &[Complex64], kmax: usize) -> Vec<Complex64> {
    // elementary symmetric polynomials
    let mut e = vec![Complex64::new(0.0, 0.0); alphas.len() + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for (i, &a) in alphas.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            let prev = e[j - 1];
            e[j] += a * prev;
        }
    }
    let mut h = vec![Complex64::new(1.0, 0.0)];
    for k in 1..=kmax {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..=k.min(alphas.len()) {
            let term = e[j] * h[k - j];
            if j % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        h.push(acc);
    }
    h
}

/// `λ(n)` for `n ≤ N` from `λ(p^k) = h_k(α(p))` and multiplicativity.
pub fn hecke_extend(spec: &AutomorphicSpec, n: u64) -> Result<MultFuncTable> {
    let primes = primes_up_to(n);
    if let Some(&p) = primes.iter().find(|&&p| !spec.satake_params.contains_key(&(p as u64))) {
        return Err(Error::MissingPrimeData(p as u64));
    }
    let spf = smallest_prime_factor(n, &SieveConfig::default())?;
    let mut v = vec![Complex64::new(0.0, 0.0); n as usize + 1];
    if n >= 1 {
        v[1] = Complex64::new(1.0, 0.0);
    }
    for &p in &primes {
        let p = p as u64;
        let mut kmax = 0;
        let mut pk = 1u64;
        while pk * p <= n {
            pk *= p;
            kmax += 1;
        }
        let h = complete_homogeneous(&spec.satake_params[&p], kmax);
        let mut pk = 1u64;
        for hk in h.iter().skip(1) {
            pk *= p;
            v[pk as usize] = *hk;
        }
    }
    for m in 2..=n {
        let p = spf[m as usize] as u64;
        let mut pk = p;
        let mut rest = m / p;
        while rest % p == 0 {
            rest /= p;
            pk *= p;
        }
        if rest > 1 {
            v[m as usize] = v[pk as usize] * v[rest as usize];
        }
    }
    let kind = match spec.source {
        Source::BuiltinDelta => Kind::LambdaPiGl2,
        Source::Imported => Kind::LambdaPiImported,
    };
    Ok(MultFuncTable::new(
        kind,
        Normalization::Analytic,
        spec.conductor_label.clone(),
        Values::Complex(v),
    ))
}

/// Coefficient-file layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LfuncFile {
    pub label: String,
    pub rank: usize,
    pub normalization: String,
    pub primes: Vec<PrimeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub archimedean: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeEntry {
    pub p: u64,
    pub alphas: Vec<[f64; 2]>,
}

impl LfuncFile {
    pub fn from_spec(spec: &AutomorphicSpec, coefficients: Option<&MultFuncTable>) -> Self {
        LfuncFile {
            label: spec.conductor_label.clone(),
            rank: spec.m_rank,
            normalization: "analytic".into(),
            primes: spec
                .satake_params
                .iter()
                .map(|(&p, a)| PrimeEntry {
                    p,
                    alphas: a.iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
            coefficients: coefficients.map(|t| {
                (1..=t.len())
                    .map(|n| {
                        let z = t.get(n);
                        [z.re, z.im]
                    })
                    .collect()
            }),
            archimedean: spec.archimedean.clone(),
        }
    }
}

/// Checks `|α_j(p)| ≤ p^{1/2 − 1/(m²+1)}`, returning the first violation.
pub fn check_satake_bound(spec: &AutomorphicSpec) -> Result<()> {
    let m2 = (spec.m_rank * spec.m_rank) as f64;
    let exponent = 0.5 - 1.0 / (m2 + 1.0);
    for (&p, alphas) in &spec.satake_params {
        let limit = exponent * (p as f64).ln();
        for (j, a) in alphas.iter().enumerate() {
            let lhs = a.norm().ln();
            if lhs > limit + BOUND_SLACK * limit.abs().max(1.0) {
                return Err(Error::BoundViolation { p, j: j + 1 });
            }
        }
    }
    Ok(())
}

/// Reads a coefficient file. A full `a_n` list becomes the table; otherwise
/// the table is the Euler-product extension of the prime data.
pub fn import_lfunc_coeffs(path: &Path) -> Result<(AutomorphicSpec, MultFuncTable)> {
    import_lfunc_with_seed(path, 0)
}

/// As [`import_lfunc_coeffs`], with `seed` choosing the multiplicativity spot checks.
pub fn import_lfunc_with_seed(path: &Path, seed: u64) -> Result<(AutomorphicSpec, MultFuncTable)> {
    let text = std::fs::read_to_string(path)?;
    import_lfunc_str_with(&text, seed)
}

pub fn import_lfunc_str(text: &str) -> Result<(AutomorphicSpec, MultFuncTable)> {
    import_lfunc_str_with(text, 0)
}

pub fn import_lfunc_str_with(text: &str, seed: u64) -> Result<(AutomorphicSpec, MultFuncTable)> {
    let file: LfuncFile = serde_json::from_str(text).map_err(|e| Error::SchemaError(e.to_string()))?;
    if file.normalization != "analytic" {
        return Err(Error::SchemaError(format!(
            "normalization must be \"analytic\", got {:?}",
            file.normalization
        )));
    }
    if file.rank < 2 {
        return Err(Error::SchemaError(format!("rank must be at least 2, got {}", file.rank)));
    }
    if file.primes.is_empty() {
        return Err(Error::SchemaError("empty prime list".into()));
    }
    if file.coefficients.as_ref().is_some_and(|c| c.is_empty()) {
        return Err(Error::SchemaError("empty coefficient list".into()));
    }
    let mut satake_params = BTreeMap::new();
    for entry in &file.primes {
        if entry.alphas.len() != file.rank {
            return Err(Error::SchemaError(format!(
                "p = {} has {} parameters, rank is {}",
                entry.p,
                entry.alphas.len(),
                file.rank
            )));
        }
        let alphas = entry.alphas.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        if satake_params.insert(entry.p, alphas).is_some() {
            return Err(Error::SchemaError(format!("p = {} listed twice", entry.p)));
        }
    }
    let spec = AutomorphicSpec {
        m_rank: file.rank,
        satake_params,
        source: Source::Imported,
        conductor_label: file.label.clone(),
        archimedean: file.archimedean.clone(),
    };
    check_satake_bound(&spec)?;

    // the table reaches just below the first prime without data
    let pmax = spec.satake_params.keys().max().copied().unwrap_or(1);
    let reach = primes_up_to(2 * pmax + 2)
        .into_iter()
        .map(|p| p as u64)
        .find(|p| !spec.satake_params.contains_key(p))
        .unwrap_or(2 * pmax + 2)
        - 1;

    let table = match &file.coefficients {
        None => hecke_extend(&spec, reach)?,
        Some(coeffs) => {
            let mut v = vec![Complex64::new(0.0, 0.0)];
            v.extend(coeffs.iter().map(|&[re, im]| Complex64::new(re, im)));
            let table = MultFuncTable::new(
                Kind::LambdaPiImported,
                Normalization::Analytic,
                file.label.clone(),
                Values::Complex(v),
            );
            let overlap = reach.min(table.len());
            let euler = hecke_extend(&spec, overlap)?;
            for n in 1..=overlap {
                let d = (euler.get(n) - table.get(n)).norm();
                if d > IMPORT_TOL {
                    return Err(Error::SchemaError(format!(
                        "a_{n} differs from the Euler product by {d:.3e}"
                    )));
                }
            }
            let defect = table.multiplicativity_defect(1000, seed);
            if defect > IMPORT_TOL {
                return Err(Error::SchemaError(format!(
                    "coefficients are not multiplicative (defect {defect:.3e})"
                )));
            }
            table
        }
    };
    Ok((spec, table))
}
