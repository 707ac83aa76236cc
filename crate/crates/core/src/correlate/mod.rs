//! Centered correlations of `W`-tricked multiplicative functions with
//! nilsequences, and the identities used to split them.

pub mod mv;
pub mod vaughan;

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multfunc::conditions::tricked_index;
use crate::multfunc::{euler_phi, MultFuncTable};
use crate::nilgroup::LipschitzTestFunction;
use crate::polyseq::PolySequence;
use crate::scalar::Scalar;
use crate::summation::{chunked_sum, chunked_sum_serial};

pub use mv::{log_weight_decompose, DyadicBin, MVDecomposition};
pub use vaughan::{vaughan_check, von_mangoldt_log_identity};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationOptions {
    /// Terms per chunk; part of the result's identity.
    pub chunk_size: usize,
    /// Sample count for the Lipschitz estimate.
    pub lip_grid: usize,
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        CorrelationOptions {
            chunk_size: 1 << 16,
            lip_grid: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "W")]
    pub w: u64,
    pub b: u64,
    #[serde(rename = "S")]
    pub s: Complex64,
    pub mean_f: Complex64,
    pub lip_estimate: f64,
    pub decay_stat: f64,
    pub runtime_ms: u64,
}

impl CorrelationReport {
    pub const CSV_HEADER: [&'static str; 9] =
        ["N", "W", "b", "re(S)", "im(S)", "|S|", "decay_stat", "lip_estimate", "runtime_ms"];

    pub fn csv_record(&self) -> [String; 9] {
        [
            self.n.to_string(),
            self.w.to_string(),
            self.b.to_string(),
            self.s.re.to_string(),
            self.s.im.to_string(),
            self.s.norm().to_string(),
            self.decay_stat.to_string(),
            self.lip_estimate.to_string(),
            self.runtime_ms.to_string(),
        ]
    }
}

pub fn write_reports_csv<W: Write>(reports: &[CorrelationReport], w: W) -> std::io::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CorrelationReport::CSV_HEADER)?;
    for r in reports {
        wr.write_record(r.csv_record())?;
    }
    wr.flush()
}

/// `|S| log N / (1 + lip)`.
pub fn decay_stat(s: Complex64, n: u64, lip: f64) -> f64 {
    s.norm() * (n as f64).ln() / (1.0 + lip)
}

pub(crate) fn validate(f: &MultFuncTable, n: u64, w: u64, b: u64) -> Result<()> {
    if w == 0 || b == 0 {
        return Err(Error::Config {
            path: "W".into(),
            msg: format!("W and b must be positive, got W = {w}, b = {b}"),
        });
    }
    if b.gcd(&w) != 1 {
        return Err(Error::NonCoprime { b, w });
    }
    if n > 0 {
        f.check_len(tricked_index(w, b, n))?;
    }
    Ok(())
}

/// `F(g(n)Γ)`.
#[inline]
pub(crate) fn nil_value<S: Scalar>(g: &PolySequence<S>, big_f: &LipschitzTestFunction, n: u64) -> Complex64 {
    let x = g.eval_unchecked(n as i128);
    let t = g.manifold().frac(&x).to_f64();
    big_f.eval_frac(&t)
}

fn check_inputs<S: Scalar>(g: &PolySequence<S>, big_f: &LipschitzTestFunction, n: u64) -> Result<()> {
    big_f.check_manifold(g.manifold())?;
    if n as i128 > crate::polyseq::EVAL_GUARD {
        return Err(Error::Overflow(n as i128));
    }
    Ok(())
}

/// `S = (φ(W)/(WN)) Σ_{n∈[N]} (f(W(n−1)+b) − 𝔼) F(g(n)Γ)` with
/// `𝔼 = (1/N) Σ_{n∈[N]} f(W(n−1)+b)`.
pub fn correlation_sum<S: Scalar>(
    f: &MultFuncTable,
    g: &PolySequence<S>,
    big_f: &LipschitzTestFunction,
    n: u64,
    w: u64,
    b: u64,
) -> Result<CorrelationReport> {
    correlation_sum_with(f, g, big_f, n, w, b, &CorrelationOptions::default())
}

pub fn correlation_sum_with<S: Scalar>(
    f: &MultFuncTable,
    g: &PolySequence<S>,
    big_f: &LipschitzTestFunction,
    n: u64,
    w: u64,
    b: u64,
    opts: &CorrelationOptions,
) -> Result<CorrelationReport> {
    big_f.check_manifold(g.manifold())?;
    let lip = big_f.estimate_lip(g.manifold(), opts.lip_grid);
    correlation_inner(f, g, big_f, n, w, b, opts, lip, true)
}

/// [`correlation_sum_with`] on one thread, for reproducibility checks.
pub fn correlation_sum_serial<S: Scalar>(
    f: &MultFuncTable,
    g: &PolySequence<S>,
    big_f: &LipschitzTestFunction,
    n: u64,
    w: u64,
    b: u64,
    opts: &CorrelationOptions,
) -> Result<CorrelationReport> {
    big_f.check_manifold(g.manifold())?;
    let lip = big_f.estimate_lip(g.manifold(), opts.lip_grid);
    correlation_inner(f, g, big_f, n, w, b, opts, lip, false)
}

#[allow(clippy::too_many_arguments)]
fn correlation_inner<S: Scalar>(
    f: &MultFuncTable,
    g: &PolySequence<S>,
    big_f: &LipschitzTestFunction,
    n: u64,
    w: u64,
    b: u64,
    opts: &CorrelationOptions,
    lip: f64,
    parallel: bool,
) -> Result<CorrelationReport> {
    validate(f, n, w, b)?;
    check_inputs(g, big_f, n)?;
    let start = Instant::now();
    let len = n as usize;
    let sum = |term: &(dyn Fn(usize) -> Complex64 + Sync)| {
        if parallel {
            chunked_sum(len, opts.chunk_size, term)
        } else {
            chunked_sum_serial(len, opts.chunk_size, term)
        }
    };
    let fval = |i: usize| f.get(tricked_index(w, b, i as u64 + 1));
    let zero = Complex64::new(0.0, 0.0);
    let mean = if n == 0 { zero } else { sum(&fval) / n as f64 };
    // a constant F pairs with the centered f to give exactly zero
    let s = if n == 0 || big_f.expression.is_constant() {
        zero
    } else {
        let raw = sum(&|i| (fval(i) - mean) * nil_value(g, big_f, i as u64 + 1));
        raw * (euler_phi(w) as f64 / (w as f64 * n as f64))
    };
    Ok(CorrelationReport {
        n,
        w,
        b,
        s,
        mean_f: mean,
        lip_estimate: lip,
        decay_stat: decay_stat(s, n, lip),
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// One [`CorrelationReport`] per entry of the increasing list `ns`.
pub fn decay_scan<S: Scalar>(
    f: &MultFuncTable,
    g: &PolySequence<S>,
    big_f: &LipschitzTestFunction,
    ns: &[u64],
    w: u64,
    b: u64,
    opts: &CorrelationOptions,
) -> Result<Vec<CorrelationReport>> {
    if ns.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::Config {
            path: "N_list".into(),
            msg: "N_list must be strictly increasing".into(),
        });
    }
    if let Some(&last) = ns.last() {
        validate(f, last, w, b)?;
    }
    big_f.check_manifold(g.manifold())?;
    let lip = big_f.estimate_lip(g.manifold(), opts.lip_grid);
    ns.iter()
        .map(|&n| correlation_inner(f, g, big_f, n, w, b, opts, lip, true))
        .collect()
}

/// Integer cube root.
pub fn icbrt(n: u64) -> u64 {
    let mut r = (n as f64).cbrt().round() as u64;
    while r * r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}
