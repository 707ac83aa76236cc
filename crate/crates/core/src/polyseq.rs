//! Polynomial sequences `g : ℤ → G` in binomial (Taylor) form, torus
//! polynomials with their smoothness norms, and horizontal characters.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nilgroup::{Element, Nilmanifold};
use crate::scalar::{dist_to_int, dist_to_int_exact, RealConst, Scalar};

/// Arguments beyond this magnitude are refused.
pub const EVAL_GUARD: i128 = 1 << 53;

/// Tolerance for `g_i ∈ G_i` on float coefficients.
pub const COEFF_TOL: f64 = 1e-12;

/// Generalized binomial coefficient `C(n, k)` for any integer `n`, or `None`
/// on `i128` overflow.
pub fn binom_i128(n: i128, k: u32) -> Option<i128> {
    let mut r: i128 = 1;
    for i in 0..k as i128 {
        r = r.checked_mul(n - i)? / (i + 1);
    }
    Some(r)
}

pub fn binom_big(n: &BigInt, k: u32) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * (n - BigInt::from(i)) / BigInt::from(i + 1);
    }
    r
}

/// `g(n) = g_0 · g_1^{C(n,1)} ⋯ g_d^{C(n,d)}` on a fixed nilmanifold.
#[derive(Clone, Debug)]
pub struct PolySequence<S> {
    manifold: Arc<Nilmanifold>,
    coeffs: Vec<Element<S>>,
}

impl<S: Scalar> PolySequence<S> {
    /// Checks dimensions and `g_i ∈ G_i` (with `G_i` trivial past the degree).
    pub fn new(manifold: Arc<Nilmanifold>, coeffs: Vec<Element<S>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidSpec("a sequence needs at least g_0".into()));
        }
        for (i, c) in coeffs.iter().enumerate() {
            manifold.check(c)?;
            if !manifold.in_subgroup(i, c, COEFF_TOL) {
                return Err(Error::NotInFiltration(i));
            }
        }
        Ok(PolySequence { manifold, coeffs })
    }

    /// Skips the filtration check; used to plant malformed sequences.
    pub fn new_unchecked(manifold: Arc<Nilmanifold>, coeffs: Vec<Element<S>>) -> Self {
        PolySequence { manifold, coeffs }
    }

    /// The constant sequence at the identity.
    pub fn identity(manifold: Arc<Nilmanifold>) -> Self {
        let id = manifold.identity();
        PolySequence {
            manifold,
            coeffs: vec![id],
        }
    }

    /// Torus sequence `n ↦ Σ_i C(n,i) α_i` in one dimension.
    pub fn torus_1d(alphas: &[S]) -> Self {
        let degree = alphas.len().saturating_sub(1).max(1);
        let manifold = Nilmanifold::torus(1, degree);
        let coeffs = alphas.iter().map(|a| Element::new([a.clone()])).collect();
        PolySequence { manifold, coeffs }
    }

    pub fn manifold(&self) -> &Arc<Nilmanifold> {
        &self.manifold
    }

    pub fn coeffs(&self) -> &[Element<S>] {
        &self.coeffs
    }

    /// Length of the binomial expansion minus one.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, n: i64) -> Result<Element<S>> {
        self.eval_i128(n as i128)
    }

    pub fn eval_i128(&self, n: i128) -> Result<Element<S>> {
        if n.abs() > EVAL_GUARD {
            return Err(Error::Overflow(n));
        }
        Ok(self.eval_unchecked(n))
    }

    pub(crate) fn eval_unchecked(&self, n: i128) -> Element<S> {
        let m = &self.manifold;
        if m.is_abelian() {
            let mut out = self.coeffs[0].clone();
            for (i, c) in self.coeffs.iter().enumerate().skip(1) {
                let b = match binom_i128(n, i as u32) {
                    Some(b) => S::from_i128(b),
                    None => S::from_bigint(&binom_big(&BigInt::from(n), i as u32)),
                };
                for (o, x) in out.coords.iter_mut().zip(&c.coords) {
                    *o = o.clone() + b.clone() * x.clone();
                }
            }
            return out;
        }
        let mut out = self.coeffs[0].clone();
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            if c.is_identity() {
                continue;
            }
            let p = match binom_i128(n, i as u32) {
                Some(b) => m.pow_i128(c, b),
                None => m.pow_unchecked(c, &binom_big(&BigInt::from(n), i as u32)),
            };
            out = m.mul_unchecked(&out, &p);
        }
        out
    }

    /// Number of binomial coefficients a derived sequence may need, minus one.
    fn taylor_len(&self) -> usize {
        self.degree().max(self.manifold.degree())
    }

    /// Binomial-form coefficients of the sequence through the values
    /// `v(0), …, v(d)`: `c_j = (c_0 c_1^{C(j,1)} ⋯ c_{j-1}^{C(j,j-1)})⁻¹ v(j)`.
    pub fn interpolate(manifold: Arc<Nilmanifold>, values: &[Element<S>]) -> Self {
        let m = manifold.clone();
        let mut coeffs: Vec<Element<S>> = Vec::with_capacity(values.len());
        for (j, v) in values.iter().enumerate() {
            let mut partial = m.identity::<S>();
            for (i, c) in coeffs.iter().enumerate() {
                let b = binom_i128(j as i128, i as u32).expect("small binomial");
                partial = m.mul_unchecked(&partial, &m.pow_i128(c, b));
            }
            coeffs.push(m.mul_unchecked(&m.inv_unchecked(&partial), v));
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(Element::is_identity) {
            coeffs.pop();
        }
        PolySequence { manifold, coeffs }
    }

    /// `n ↦ g(n + h) g(n)⁻¹`.
    pub fn discrete_derivative(&self, h: i64) -> Self {
        let m = &self.manifold;
        if h == 0 {
            return PolySequence::identity(m.clone());
        }
        if m.is_abelian() {
            // β_j = Σ_{i>j} α_i C(h, i−j), from Vandermonde's identity.
            let d = self.degree();
            let mut coeffs = Vec::with_capacity(d.max(1));
            for j in 0..d.max(1) {
                let mut b = m.identity::<S>();
                for i in (j + 1)..=d {
                    let w = S::from_bigint(&binom_big(&BigInt::from(h), (i - j) as u32));
                    for (o, x) in b.coords.iter_mut().zip(&self.coeffs[i].coords) {
                        *o = o.clone() + w.clone() * x.clone();
                    }
                }
                coeffs.push(b);
            }
            return PolySequence {
                manifold: m.clone(),
                coeffs,
            };
        }
        let values: Vec<Element<S>> = (0..=self.taylor_len() as i128)
            .map(|n| {
                let a = self.eval_unchecked(n + h as i128);
                let b = self.eval_unchecked(n);
                m.mul_unchecked(&a, &m.inv_unchecked(&b))
            })
            .collect();
        PolySequence::interpolate(m.clone(), &values)
    }

    /// `n ↦ g(a n + b)`.
    pub fn affine_substitute(&self, a: i64, b: i64) -> Self {
        let values: Vec<Element<S>> = (0..=self.taylor_len() as i128)
            .map(|n| self.eval_unchecked(a as i128 * n + b as i128))
            .collect();
        PolySequence::interpolate(self.manifold.clone(), &values)
    }

    /// Samples iterated derivatives `∂_{h_1}⋯∂_{h_i} g(n)` and reports every
    /// one with a coordinate outside `G_i` larger than `1e-9`.
    pub fn check_filtration_membership(&self, samples: usize, seed: u64) -> MembershipReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = &self.manifold;
        let top = self.degree().max(m.degree()) + 1;
        let mut violations = Vec::new();
        let mut checked = 0;
        for _ in 0..samples {
            for i in 1..=top {
                let shifts: Vec<i64> = (0..i).map(|_| rng.gen_range(-20..=20)).collect();
                let n: i64 = rng.gen_range(-100..=100);
                let v = self.iterated_derivative_at(&shifts, n as i128);
                checked += 1;
                let worst = m.worst_outside(i, &v);
                if worst > MEMBERSHIP_TOL {
                    violations.push(Violation {
                        level: i,
                        shifts,
                        n,
                        magnitude: worst,
                    });
                }
            }
        }
        MembershipReport {
            samples,
            checked,
            violations,
        }
    }

    /// `∂_{h_1}⋯∂_{h_k} g(n)`, evaluated pointwise from its definition.
    pub fn iterated_derivative_at(&self, shifts: &[i64], n: i128) -> Element<S> {
        let m = &self.manifold;
        match shifts.split_last() {
            None => self.eval_unchecked(n),
            Some((&h, rest)) => {
                let a = self.iterated_derivative_at(rest, n + h as i128);
                let b = self.iterated_derivative_at(rest, n);
                m.mul_unchecked(&a, &m.inv_unchecked(&b))
            }
        }
    }

    pub fn to_json(&self, manifold_ref: &str) -> PolySequenceJson {
        PolySequenceJson {
            manifold_ref: manifold_ref.to_string(),
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    c.coords
                        .iter()
                        .map(|x| match x.to_rational() {
                            Some(r) => serde_json::Value::String(r.to_string()),
                            None => serde_json::json!(x.as_f64()),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PolySequenceJson, manifold: Arc<Nilmanifold>) -> Result<Self> {
        let mut coeffs = Vec::new();
        for (i, row) in json.coeffs.iter().enumerate() {
            let mut coords = Vec::new();
            for (j, v) in row.iter().enumerate() {
                let c = RealConst::from_json(v).ok_or_else(|| Error::Config {
                    path: format!("sequence.coeffs[{i}][{j}]"),
                    msg: format!("cannot read {v} as a real constant"),
                })?;
                coords.push(c.to_scalar::<S>());
            }
            coeffs.push(Element::new(coords));
        }
        PolySequence::new(manifold, coeffs)
    }

    pub fn convert<T: Scalar>(&self) -> PolySequence<T> {
        PolySequence {
            manifold: self.manifold.clone(),
            coeffs: self.coeffs.iter().map(|c| c.convert()).collect(),
        }
    }
}

/// Serialized form `{manifold_ref, coeffs: [[coords…]…]}`; coordinates are
/// numbers or strings accepted by [`RealConst::parse`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolySequenceJson {
    pub manifold_ref: String,
    pub coeffs: Vec<Vec<serde_json::Value>>,
}

pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub level: usize,
    pub shifts: Vec<i64>,
    pub n: i64,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipReport {
    pub samples: usize,
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl MembershipReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn levels_violated(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.violations.iter().map(|v| v.level).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// A polynomial `ℤ → 𝕋`, `n ↦ Σ_j α_j C(n, j)`, with coefficients in `[0,1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPolynomial {
    pub alphas: Vec<f64>,
    /// Exact coefficients, reduced mod 1, when they are known.
    #[serde(skip)]
    pub exact: Option<Vec<BigRational>>,
}

fn frac_f64(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

impl TorusPolynomial {
    pub fn new(alphas: &[f64]) -> Self {
        TorusPolynomial {
            alphas: alphas.iter().map(|&a| frac_f64(a)).collect(),
            exact: None,
        }
    }

    pub fn from_rationals(alphas: &[BigRational]) -> Self {
        let exact: Vec<BigRational> = alphas.iter().map(Scalar::frac01).collect();
        TorusPolynomial {
            alphas: exact.iter().map(Scalar::as_f64).collect(),
            exact: Some(exact),
        }
    }

    pub fn degree(&self) -> usize {
        self.alphas.len().saturating_sub(1)
    }

    pub fn eval(&self, n: i64) -> f64 {
        if let Some(ex) = &self.exact {
            let mut acc = BigRational::zero();
            for (j, a) in ex.iter().enumerate() {
                acc += a * BigRational::from_integer(binom_big(&BigInt::from(n), j as u32));
            }
            return Scalar::frac01(&acc).as_f64();
        }
        let mut acc = 0.0;
        for (j, a) in self.alphas.iter().enumerate() {
            let b = binom_i128(n as i128, j as u32).map_or(f64::NAN, |b| b as f64);
            acc += frac_f64(b * a);
        }
        frac_f64(acc)
    }

    /// `‖·‖_{C^∞[N]} = sup_{j ≥ 1} N^j ‖α_j‖`; the constant term is ignored.
    pub fn smoothness_norm(&self, n: u64) -> f64 {
        let mut best: f64 = 0.0;
        let nb = BigInt::from(n);
        for j in 1..self.alphas.len() {
            // N^j is rounded once, so doubling N scales the term by exactly 2^j.
            let scale = num_traits::pow(nb.clone(), j).to_f64().unwrap_or(f64::INFINITY);
            let d = match &self.exact {
                Some(ex) => dist_to_int_exact(&ex[j]).as_f64(),
                None => dist_to_int(self.alphas[j]),
            };
            if d > 0.0 {
                best = best.max(scale * d);
            }
        }
        best
    }

    /// Exact norm when the coefficients are rational.
    pub fn smoothness_norm_exact(&self, n: u64) -> Option<BigRational> {
        let ex = self.exact.as_ref()?;
        let nb = BigRational::from_integer(BigInt::from(n));
        let mut best = BigRational::zero();
        let mut scale = BigRational::one();
        for a in ex.iter().skip(1) {
            scale *= &nb;
            let t = &scale * dist_to_int_exact(a);
            if t > best {
                best = t;
            }
        }
        Some(best)
    }

    /// Coefficients of `n^k`: `C(n, j) = Σ_k s(j, k) n^k / j!`. Not reduced mod 1.
    pub fn to_monomial(&self) -> Vec<f64> {
        binomial_to_monomial(&self.alphas)
    }

    /// From coefficients of `n^k`, using `n^k = Σ_j S(k, j) j! C(n, j)`.
    pub fn from_monomial(c: &[f64]) -> Self {
        TorusPolynomial::new(&monomial_to_binomial(c))
    }
}

/// Signed Stirling numbers of the first kind `s(j, k)`, `0 ≤ k ≤ j ≤ d`.
fn stirling1(d: usize) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; d + 1]; d + 1];
    s[0][0] = 1.0;
    for j in 1..=d {
        for k in 1..=j {
            s[j][k] = s[j - 1][k - 1] - (j - 1) as f64 * s[j - 1][k];
        }
    }
    s
}

fn stirling2(d: usize) -> Vec<Vec<f64>> {
    let mut s = vec![vec![0.0; d + 1]; d + 1];
    s[0][0] = 1.0;
    for n in 1..=d {
        for k in 1..=n {
            s[n][k] = k as f64 * s[n - 1][k] + s[n - 1][k - 1];
        }
    }
    s
}

pub fn binomial_to_monomial(alphas: &[f64]) -> Vec<f64> {
    let d = alphas.len().saturating_sub(1);
    let s = stirling1(d);
    let mut out = vec![0.0; alphas.len()];
    let mut fact = 1.0;
    for (j, a) in alphas.iter().enumerate() {
        if j > 0 {
            fact *= j as f64;
        }
        for k in 0..=j {
            out[k] += a * s[j][k] / fact;
        }
    }
    out
}

pub fn monomial_to_binomial(c: &[f64]) -> Vec<f64> {
    let d = c.len().saturating_sub(1);
    let s = stirling2(d);
    let mut out = vec![0.0; c.len()];
    for (k, ck) in c.iter().enumerate() {
        let mut fact = 1.0;
        for j in 0..=k {
            if j > 0 {
                fact *= j as f64;
            }
            out[j] += ck * s[k][j] * fact;
        }
    }
    out
}

/// Integer vector `k` with `η(x) = k · ψ(x) mod 1` a homomorphism `G → 𝕋`
/// trivial on `Γ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HorizontalCharacter {
    pub k: Vec<i64>,
}

impl HorizontalCharacter {
    pub fn new(k: Vec<i64>) -> Self {
        HorizontalCharacter { k }
    }

    /// `|k|_∞`.
    pub fn modulus(&self) -> u64 {
        self.k.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn is_trivial(&self) -> bool {
        self.k.iter().all(|&x| x == 0)
    }

    /// Exact check that `k` annihilates every bracket `[X_a, X_b]`.
    pub fn is_valid_for(&self, manifold: &Nilmanifold) -> bool {
        if self.k.len() != manifold.dim() {
            return false;
        }
        let m = manifold.dim();
        let mut acc = vec![vec![BigRational::zero(); m]; m];
        for (a, b, c, v) in manifold.algebra().constants() {
            acc[*a][*b] += v * BigRational::from_integer(self.k[*c].into());
        }
        acc.iter().flatten().all(|x| x.is_zero())
    }

    /// `η(x)` as a real number before reduction mod 1.
    pub fn apply<S: Scalar>(&self, x: &Element<S>) -> S {
        let mut acc = S::zero();
        for (k, c) in self.k.iter().zip(&x.coords) {
            if *k != 0 {
                acc = acc + S::from_i64(*k) * c.clone();
            }
        }
        acc
    }
}

/// Binomial coefficients of `n ↦ η(g(n))`, namely `α_j = η(g_j)`.
pub fn char_compose<S: Scalar>(
    eta: &HorizontalCharacter,
    g: &PolySequence<S>,
) -> Result<TorusPolynomial> {
    if !eta.is_valid_for(g.manifold()) {
        return Err(Error::CharacterManifoldMismatch(format!("{:?}", eta.k)));
    }
    let vals: Vec<S> = g.coeffs().iter().map(|c| eta.apply(c)).collect();
    if S::EXACT {
        let ex: Option<Vec<BigRational>> = vals.iter().map(|v| v.to_rational()).collect();
        if let Some(ex) = ex {
            return Ok(TorusPolynomial::from_rationals(&ex));
        }
    }
    Ok(TorusPolynomial::new(
        &vals
            .iter()
            .map(|v| v.to_dd().fract_f64())
            .collect::<Vec<_>>(),
    ))
}

/// Rank of an integer in the order `0, 1, −1, 2, −2, …`.
#[cfg(test)]
fn z_rank(v: i64) -> u64 {
    if v > 0 {
        2 * v as u64 - 1
    } else {
        2 * v.unsigned_abs()
    }
}

fn z_unrank(r: u64) -> i64 {
    if r % 2 == 1 {
        r.div_ceil(2) as i64
    } else {
        -((r / 2) as i64)
    }
}

/// Lazily yields nontrivial characters with `|k|_∞ ≤ q_max`, by increasing
/// modulus and then lexicographically under the order `0, 1, −1, 2, −2, …`.
pub struct CharacterIter<'a> {
    manifold: &'a Nilmanifold,
    free: Vec<usize>,
    filter: bool,
    q_max: u64,
    modulus: u64,
    ranks: Vec<u64>,
    fresh: bool,
}

impl Iterator for CharacterIter<'_> {
    type Item = HorizontalCharacter;

    fn next(&mut self) -> Option<HorizontalCharacter> {
        loop {
            if self.free.is_empty() || self.modulus > self.q_max {
                return None;
            }
            if self.fresh {
                self.fresh = false;
            } else if !self.advance() {
                self.modulus += 1;
                self.ranks = vec![0; self.free.len()];
                self.fresh = true;
                continue;
            }
            let vals: Vec<i64> = self.ranks.iter().map(|&r| z_unrank(r)).collect();
            if vals.iter().map(|v| v.unsigned_abs()).max() != Some(self.modulus) {
                continue;
            }
            let mut k = vec![0; self.manifold.dim()];
            for (&i, v) in self.free.iter().zip(vals) {
                k[i] = v;
            }
            let ch = HorizontalCharacter::new(k);
            if self.filter && !ch.is_valid_for(self.manifold) {
                continue;
            }
            return Some(ch);
        }
    }
}

impl CharacterIter<'_> {
    /// Odometer step over ranks `0..=2·modulus`, last coordinate fastest.
    fn advance(&mut self) -> bool {
        let top = 2 * self.modulus;
        for i in (0..self.ranks.len()).rev() {
            if self.ranks[i] < top {
                self.ranks[i] += 1;
                return true;
            }
            self.ranks[i] = 0;
        }
        false
    }
}

/// All horizontal characters with `0 < |k|_∞ ≤ q_max`, in a fixed order.
///
/// When the span of the brackets is a coordinate subspace (always the case
/// for the torus, Heisenberg and unipotent bases) the search runs over the
/// complementary coordinates only.
pub fn enumerate_characters(manifold: &Nilmanifold, q_max: u64) -> CharacterIter<'_> {
    let m = manifold.dim();
    let mut touched = vec![false; m];
    for (_, _, k, _) in manifold.algebra().constants() {
        touched[*k] = true;
    }
    // If each bracket is a multiple of a single basis vector the touched
    // coordinates must vanish; otherwise fall back to filtering.
    let mut single = true;
    let mut by_pair: std::collections::HashMap<(usize, usize), usize> = Default::default();
    for (a, b, _, _) in manifold.algebra().constants() {
        *by_pair.entry((*a, *b)).or_default() += 1;
    }
    if by_pair.values().any(|&c| c > 1) {
        single = false;
    }
    let (free, filter): (Vec<usize>, bool) = if single {
        ((0..m).filter(|&i| !touched[i]).collect(), false)
    } else {
        ((0..m).collect(), true)
    };
    CharacterIter {
        manifold,
        ranks: vec![0; free.len()],
        free,
        filter,
        q_max,
        modulus: 1,
        fresh: true,
    }
}
