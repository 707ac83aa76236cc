//! Empirical equidistribution tests for polynomial orbits on a nilmanifold,
//! and a character search for Leibman-type obstructions.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::nilgroup::{Element, LipschitzTestFunction, Nilmanifold, ProductManifold};
use crate::polyseq::{char_compose, enumerate_characters, HorizontalCharacter, PolySequence};
use crate::scalar::Scalar;
pub use crate::summation::Progression;
use crate::summation::{pairwise_sum, scan_modulus};

/// How `|avg − ∫F|` is scaled before comparing with `δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GapNorm {
    /// Divide by the grammar's bound on `sup |F|`.
    #[default]
    Sup,
    /// Divide by `‖F‖_Lip`: the declared bound, else a sampled estimate.
    Lip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquidistOptions {
    pub norm: GapNorm,
    /// Sample count for `estimate_lip` when no bound is declared.
    pub lip_grid: usize,
    /// Start offsets of short windows advance by `ceil(L/stride_div)`.
    pub stride_div: usize,
}

impl Default for EquidistOptions {
    fn default() -> Self {
        EquidistOptions {
            norm: GapNorm::Sup,
            lip_grid: 2000,
            stride_div: 32,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Worst window found for one test function and one modulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub q: u64,
    pub a: u64,
    #[serde(rename = "L")]
    pub len: u64,
    pub test_fn: String,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquidistReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub delta: f64,
    pub worst_test_fn: String,
    pub worst_gap: f64,
    pub verdict: Verdict,
    pub witness_progression: Option<Progression>,
    pub rows: Vec<GapRow>,
}

impl EquidistReport {
    /// Columns `N,delta,q,a,L,test_fn,gap`, one line per row.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["N", "delta", "q", "a", "L", "test_fn", "gap"])?;
        for r in &self.rows {
            wr.write_record([
                self.n.to_string(),
                self.delta.to_string(),
                r.q.to_string(),
                r.a.to_string(),
                r.len.to_string(),
                r.test_fn.clone(),
                r.gap.to_string(),
            ])?;
        }
        wr.flush()
    }
}

/// `{e(k t_coord) : 1 ≤ |k| ≤ kmax}`, ordered `1, −1, 2, −2, …`.
pub fn character_family(coord: usize, kmax: i64) -> Vec<LipschitzTestFunction> {
    (1..=kmax)
        .flat_map(|k| [k, -k])
        .map(|k| LipschitzTestFunction::character(coord, k))
        .collect()
}

/// The horizontal characters of `manifold` with `|k|_∞ ≤ q_max` as test functions.
pub fn horizontal_family(manifold: &Nilmanifold, q_max: u64) -> Vec<LipschitzTestFunction> {
    enumerate_characters(manifold, q_max)
        .map(|c| character_test_fn(&c))
        .collect()
}

pub fn character_test_fn(c: &HorizontalCharacter) -> LipschitzTestFunction {
    use crate::nilgroup::TestFn;
    let factors: Vec<TestFn> = c
        .k
        .iter()
        .enumerate()
        .filter(|(_, &k)| k != 0)
        .map(|(i, &k)| TestFn::phase(i, k))
        .collect();
    LipschitzTestFunction::labeled(format!("e(k·x) k={:?}", c.k), TestFn::product(factors))
}

/// Reduced coordinates of `g(1), …, g(N)`, flattened row by row.
pub fn orbit_points<S: Scalar>(g: &PolySequence<S>, n: u64) -> Vec<f64> {
    let m = g.manifold().dim();
    let mut out = vec![0.0; n as usize * m];
    out.par_chunks_mut(m.max(1) * 4096)
        .enumerate()
        .for_each(|(ci, chunk)| {
            let base = ci as u64 * 4096;
            for (r, row) in chunk.chunks_mut(m.max(1)).enumerate() {
                let x: Element<S> = g.eval_unchecked((base + r as u64 + 1) as i128);
                let f = g.manifold().frac(&x);
                for (o, c) in row.iter_mut().zip(&f.coords) {
                    *o = c.as_f64();
                }
            }
        });
    out
}

struct Prepared {
    label: String,
    integral: Complex64,
    scale: f64,
    values: Vec<Complex64>,
}

fn prepare(
    manifold: &Nilmanifold,
    points: &[f64],
    family: &[LipschitzTestFunction],
    opts: &EquidistOptions,
) -> Result<Vec<Prepared>> {
    let m = manifold.dim();
    let mut out = Vec::with_capacity(family.len());
    for f in family {
        f.check_manifold(manifold)?;
        let integral = f.integral()?;
        let scale = match opts.norm {
            GapNorm::Sup => f.sup_bound(),
            GapNorm::Lip => f
                .declared_lip_bound
                .unwrap_or_else(|| f.estimate_lip(manifold, opts.lip_grid)),
        };
        let values: Vec<Complex64> = points
            .par_chunks(m.max(1))
            .map(|t| f.eval_frac(t))
            .collect();
        out.push(Prepared {
            label: f.label.clone(),
            integral,
            scale: if scale > 0.0 { scale } else { 1.0 },
            values,
        });
    }
    Ok(out)
}

/// `max_F |𝔼_{n∈[N]} F(g(n)Γ) − ∫F| / ‖F‖` with `[N] = {1, …, N}`.
pub fn empirical_discrepancy<S: Scalar>(
    g: &PolySequence<S>,
    n: u64,
    family: &[LipschitzTestFunction],
    delta: f64,
) -> Result<EquidistReport> {
    empirical_discrepancy_with(g, n, family, delta, &EquidistOptions::default())
}

pub fn empirical_discrepancy_with<S: Scalar>(
    g: &PolySequence<S>,
    n: u64,
    family: &[LipschitzTestFunction],
    delta: f64,
    opts: &EquidistOptions,
) -> Result<EquidistReport> {
    let points = orbit_points(g, n);
    let prepared = prepare(g.manifold(), &points, family, opts)?;
    let rows: Vec<GapRow> = prepared
        .iter()
        .map(|p| {
            let s = pairwise_sum(&p.values);
            GapRow {
                q: 1,
                a: 1,
                len: n,
                test_fn: p.label.clone(),
                gap: ((s / n as f64) - p.integral).norm() / p.scale,
            }
        })
        .collect();
    Ok(summarize(n, delta, rows, false))
}

/// Scans progressions `a + q·[L] ⊂ [N]` with `q ≤ ⌈1/δ⌉` and `L ≥ δN`.
///
/// For every modulus and residue class this checks the whole class and
/// windows of the minimal length `⌈δN⌉` whose starts advance by
/// `⌈L/stride_div⌉` terms, using prefix sums.
pub fn total_discrepancy<S: Scalar>(
    g: &PolySequence<S>,
    n: u64,
    family: &[LipschitzTestFunction],
    delta: f64,
) -> Result<EquidistReport> {
    total_discrepancy_with(g, n, family, delta, &EquidistOptions::default())
}

pub fn total_discrepancy_with<S: Scalar>(
    g: &PolySequence<S>,
    n: u64,
    family: &[LipschitzTestFunction],
    delta: f64,
    opts: &EquidistOptions,
) -> Result<EquidistReport> {
    let points = orbit_points(g, n);
    let prepared = prepare(g.manifold(), &points, family, opts)?;
    let min_len = ((delta * n as f64).ceil() as u64).max(1);
    let q_max = ((1.0 / delta).ceil() as u64).max(1);
    let jobs: Vec<(usize, u64)> = (0..prepared.len())
        .flat_map(|f| (1..=q_max).map(move |q| (f, q)))
        .collect();
    let rows: Vec<GapRow> = jobs
        .par_iter()
        .filter_map(|&(fi, q)| scan_prepared(&prepared[fi], q, min_len, opts.stride_div))
        .collect();
    Ok(summarize(n, delta, rows, true))
}

fn scan_prepared(p: &Prepared, q: u64, min_len: u64, stride_div: usize) -> Option<GapRow> {
    let (gap, prog) = scan_modulus(&p.values, p.integral, q, min_len, stride_div)?;
    Some(GapRow {
        q,
        a: prog.a,
        len: prog.len,
        test_fn: p.label.clone(),
        gap: gap / p.scale,
    })
}

fn summarize(n: u64, delta: f64, rows: Vec<GapRow>, total: bool) -> EquidistReport {
    // Ties keep the earliest row, so the result does not depend on scheduling.
    let worst = rows
        .iter()
        .fold(None::<&GapRow>, |b, r| match b {
            Some(b) if b.gap >= r.gap => Some(b),
            _ => Some(r),
        })
        .cloned();
    let worst_gap = worst.as_ref().map_or(0.0, |r| r.gap);
    EquidistReport {
        n,
        delta,
        worst_test_fn: worst.as_ref().map_or_else(String::new, |r| r.test_fn.clone()),
        worst_gap,
        verdict: if worst_gap <= delta {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        witness_progression: worst.filter(|_| total).map(|r| Progression {
            a: r.a,
            q: r.q,
            len: r.len,
        }),
        rows,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeibmanWitness {
    pub character: HorizontalCharacter,
    pub norm: f64,
    pub search_bound: u64,
}

/// Search knobs; `from_delta` gives `Q_max = ⌈δ⁻²⌉` and `norm_bound = δ⁻²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeibmanParams {
    pub q_max: u64,
    pub norm_bound: f64,
}

impl LeibmanParams {
    pub fn from_delta(delta: f64) -> Self {
        let b = delta.powi(-2);
        LeibmanParams {
            q_max: b.ceil() as u64,
            norm_bound: b,
        }
    }
}

/// First character, in enumeration order, with `‖η∘g‖_{C^∞[N]} ≤ norm_bound`.
///
/// `None` only says that no obstruction exists up to `q_max`.
pub fn leibman_search<S: Scalar>(
    g: &PolySequence<S>,
    n: u64,
    q_max: u64,
    norm_bound: f64,
) -> Option<LeibmanWitness> {
    let chars: Vec<HorizontalCharacter> = enumerate_characters(g.manifold(), q_max).collect();
    chars.par_iter().find_map_first(|c| {
        let t = char_compose(c, g).ok()?;
        let norm = t.smoothness_norm(n);
        (norm <= norm_bound).then(|| LeibmanWitness {
            character: c.clone(),
            norm,
            search_bound: q_max,
        })
    })
}

/// `m ↦ (g(q p m + a_p), g(q p₂ m + a_p₂))` on `G × G`.
pub fn product_sequence<S: Scalar>(
    g: &PolySequence<S>,
    q: i64,
    p: i64,
    a_p: i64,
    p2: i64,
    a_p2: i64,
) -> Result<(ProductManifold, PolySequence<S>)> {
    let m = g.manifold();
    let prod = ProductManifold::new(m, m)?;
    let left = g.affine_substitute(q * p, a_p);
    let right = g.affine_substitute(q * p2, a_p2);
    let len = left.coeffs().len().max(right.coeffs().len());
    let id = m.identity::<S>();
    let coeffs = (0..len)
        .map(|i| {
            prod.join(
                left.coeffs().get(i).unwrap_or(&id),
                right.coeffs().get(i).unwrap_or(&id),
            )
        })
        .collect();
    let seq = PolySequence::new(prod.manifold.clone(), coeffs)?;
    Ok((prod, seq))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_order() {
        let f = character_family(0, 2);
        let labels: Vec<&str> = f.iter().map(|f| f.label.as_str()).collect();
        assert_eq!(labels, ["e(1x1)", "e(-1x1)", "e(2x1)", "e(-2x1)"]);
    }

    #[test]
    fn params_from_delta() {
        let p = LeibmanParams::from_delta(0.1);
        assert_eq!(p.q_max, 100);
        assert!((p.norm_bound - 100.0).abs() < 1e-9);
    }
}
