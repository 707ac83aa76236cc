//! Tables of multiplicative functions and the class conditions they are
//! checked against.

pub mod automorphic;
pub mod conditions;
pub mod ntt;
pub mod sieve;
pub mod tau;

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summation::chunked_sum;

pub use automorphic::{builtin_delta, hecke_extend, import_lfunc_coeffs, AutomorphicSpec, LfuncFile, Source};
pub use conditions::{check_conditions, ConditionReport};
pub use sieve::SieveConfig;
pub use tau::{normalize_gl2, tau_table, TauTable};

/// Chunk length used by table-level sums.
pub const SUM_CHUNK: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Mobius,
    Liouville,
    LambdaPiGl2,
    LambdaPiImported,
    MobiusTimesLambda,
    VonMangoldt,
    /// Anything built with [`MultFuncTable::from_fn`].
    Custom,
}

impl Kind {
    /// Multiplicative kinds have `f(1) = 1` and `f(mn) = f(m) f(n)` for coprime `m, n`.
    pub fn is_multiplicative(self) -> bool {
        !matches!(self, Kind::VonMangoldt | Kind::Custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Arithmetic,
    Analytic,
}

/// Storage for `f(0..=N)`; slot 0 is unused and holds zero.
#[derive(Clone, Debug, PartialEq)]
pub enum Values {
    Small(Vec<i8>),
    /// `p` where `n = p^k`, else 0; read as `log p`.
    PrimePowers(Vec<u32>),
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Values {
    fn len(&self) -> usize {
        match self {
            Values::Small(v) => v.len(),
            Values::PrimePowers(v) => v.len(),
            Values::Real(v) => v.len(),
            Values::Complex(v) => v.len(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MultFuncTable {
    pub kind: Kind,
    pub normalization: Normalization,
    pub label: String,
    values: Values,
    exact_tau: Option<Arc<TauTable>>,
}

impl MultFuncTable {
    pub fn new(kind: Kind, normalization: Normalization, label: impl Into<String>, values: Values) -> Self {
        MultFuncTable {
            kind,
            normalization,
            label: label.into(),
            values,
            exact_tau: None,
        }
    }

    pub(crate) fn with_tau(mut self, tau: Arc<TauTable>) -> Self {
        self.exact_tau = Some(tau);
        self
    }

    pub fn sieve_mobius(n: u64, cfg: &SieveConfig) -> Result<Self> {
        let v = sieve::mobius(n, cfg)?;
        Ok(Self::new(Kind::Mobius, Normalization::Arithmetic, "mobius", Values::Small(v)))
    }

    pub fn sieve_liouville(n: u64, cfg: &SieveConfig) -> Result<Self> {
        let v = sieve::liouville(n, cfg)?;
        Ok(Self::new(Kind::Liouville, Normalization::Arithmetic, "liouville", Values::Small(v)))
    }

    pub fn sieve_von_mangoldt(n: u64, cfg: &SieveConfig) -> Result<Self> {
        let v = sieve::prime_power_base(n, cfg)?;
        Ok(Self::new(
            Kind::VonMangoldt,
            Normalization::Arithmetic,
            "von_mangoldt",
            Values::PrimePowers(v),
        ))
    }

    /// `f(n) = value(n)` for `1 ≤ n ≤ N`.
    pub fn from_fn(label: impl Into<String>, n: u64, value: impl Fn(u64) -> Complex64) -> Self {
        let mut v = Vec::with_capacity(n as usize + 1);
        v.push(Complex64::new(0.0, 0.0));
        v.extend((1..=n).map(value));
        Self::new(Kind::Custom, Normalization::Arithmetic, label, Values::Complex(v))
    }

    /// The constant function 1.
    pub fn one(n: u64) -> Self {
        Self::from_fn("one", n, |_| Complex64::new(1.0, 0.0))
    }

    /// `N`; the table covers `1 ≤ n ≤ N`.
    pub fn len(&self) -> u64 {
        self.values.len().saturating_sub(1) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    /// The exact `τ` table behind a normalized GL₂ table.
    pub fn exact_tau(&self) -> Option<&Arc<TauTable>> {
        self.exact_tau.as_ref()
    }

    /// `f(n)`, with `f(0) = 0`. Panics past the end of the table.
    #[inline]
    pub fn get(&self, n: u64) -> Complex64 {
        let i = n as usize;
        match &self.values {
            Values::Small(v) => Complex64::new(v[i] as f64, 0.0),
            Values::PrimePowers(v) => match v[i] {
                0 => Complex64::new(0.0, 0.0),
                p => Complex64::new((p as f64).ln(), 0.0),
            },
            Values::Real(v) => Complex64::new(v[i], 0.0),
            Values::Complex(v) => v[i],
        }
    }

    /// Integer value for the exact kinds.
    pub fn get_int(&self, n: u64) -> Option<i64> {
        match &self.values {
            Values::Small(v) => Some(v[n as usize] as i64),
            _ => None,
        }
    }

    pub fn check_len(&self, need: u64) -> Result<()> {
        if need > self.len() {
            return Err(Error::TableTooShort {
                need,
                have: self.len(),
            });
        }
        Ok(())
    }

    /// `p ↦ f(p)` for primes `p ≤ N`.
    pub fn prime_values(&self) -> BTreeMap<u64, Complex64> {
        sieve::primes_up_to(self.len())
            .into_iter()
            .map(|p| (p as u64, self.get(p as u64)))
            .collect()
    }

    /// `n ↦ f(n) g(n)` on the common range.
    pub fn pointwise(&self, other: &MultFuncTable) -> MultFuncTable {
        let n = self.len().min(other.len());
        let kind = match (self.kind, other.kind) {
            (Kind::Mobius, Kind::LambdaPiGl2) | (Kind::LambdaPiGl2, Kind::Mobius) => Kind::MobiusTimesLambda,
            (Kind::Mobius, Kind::LambdaPiImported) | (Kind::LambdaPiImported, Kind::Mobius) => {
                Kind::MobiusTimesLambda
            }
            _ => Kind::Custom,
        };
        let normalization = if self.normalization == Normalization::Analytic
            || other.normalization == Normalization::Analytic
        {
            Normalization::Analytic
        } else {
            Normalization::Arithmetic
        };
        let values = match (&self.values, &other.values) {
            (Values::Small(a), Values::Small(b)) => {
                Values::Small((0..=n as usize).map(|i| a[i] * b[i]).collect())
            }
            (Values::Small(a), Values::Real(b)) | (Values::Real(b), Values::Small(a)) => {
                Values::Real((0..=n as usize).map(|i| a[i] as f64 * b[i]).collect())
            }
            _ => Values::Complex((0..=n).map(|i| self.get(i) * other.get(i)).collect()),
        };
        MultFuncTable::new(kind, normalization, format!("{}*{}", self.label, other.label), values)
    }

    /// Largest `|f(mn) − f(m) f(n)|` over `samples` random coprime pairs with
    /// `mn ≤ N`, both factors at least 2.
    pub fn multiplicativity_defect(&self, samples: usize, seed: u64) -> f64 {
        let n = self.len();
        if n < 6 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let mut done = 0;
        while done < samples {
            let a = rng.gen_range(2..=n / 2);
            let b = rng.gen_range(2..=(n / a).max(2));
            if a * b > n || a.gcd(&b) != 1 {
                continue;
            }
            worst = worst.max((self.get(a * b) - self.get(a) * self.get(b)).norm());
            done += 1;
        }
        worst
    }

    /// CSV with columns `n, re, im`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,re,im")?;
        for n in 1..=self.len() {
            let v = self.get(n);
            writeln!(w, "{n},{},{}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// `Σ_{n ≤ N, n ≡ b (mod q)} f(n)`.
pub fn ap_sum(f: &MultFuncTable, q: u64, b: u64, n: u64) -> Result<Complex64> {
    if q == 0 || b == 0 || b > q {
        return Err(Error::SchemaError(format!("need 1 ≤ b ≤ q, got q = {q}, b = {b}")));
    }
    f.check_len(n)?;
    if b > n {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let len = ((n - b) / q + 1) as usize;
    Ok(chunked_sum(len, SUM_CHUNK, |j| f.get(b + j as u64 * q)))
}

/// Euler's totient by trial division.
pub fn euler_phi(mut n: u64) -> u64 {
    let mut out = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}
