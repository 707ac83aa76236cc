//! Nilpotent Lie algebras given by rational structure constants, the
//! Baker–Campbell–Hausdorff series through degree five, and the symbolic
//! construction of the group law in coordinates of the second kind.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scalar::{Coef, Scalar};

/// Coefficient ring for Lie-algebra vectors: exact rationals or polynomials.
pub trait Ring: Clone + PartialEq {
    fn nil() -> Self;
    fn is_nil(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn scale(&self, c: &BigRational) -> Self;
}

impl Ring for BigRational {
    fn nil() -> Self {
        Zero::zero()
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, c: &BigRational) -> Self {
        self * c
    }
}

/// Sparse monomial: sorted `(variable, exponent)` pairs.
pub type Monomial = Vec<(u16, u16)>;

/// Multivariate polynomial with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn constant(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        Poly { terms }
    }

    pub fn var(v: u16) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(v, 1)], BigRational::one());
        Poly { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    fn insert(&mut self, m: Monomial, c: BigRational) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                if !c.is_zero() {
                    e.insert(c);
                }
            }
            Entry::Occupied(mut e) => {
                let s = e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// Evaluates at rational points, exactly.
    pub fn eval_exact(&self, vars: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m {
                for _ in 0..e {
                    t *= &vars[v as usize];
                }
            }
            acc += t;
        }
        acc
    }
}

fn mul_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl Ring for Poly {
    fn nil() -> Self {
        Poly::default()
    }
    fn is_nil(&self) -> bool {
        self.terms.is_empty()
    }
    fn plus(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }
    fn minus(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert(m.clone(), -c.clone());
        }
        out
    }
    fn times(&self, o: &Self) -> Self {
        let mut out = Poly::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.insert(mul_monomials(ma, mb), ca * cb);
            }
        }
        out
    }
    fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Poly::default();
        }
        Poly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }
}

impl Poly {
    /// Whether the polynomial maps integer points to integers.
    ///
    /// Rewrites each monomial in the basis of products of binomials
    /// `C(x_v, k_v)` via `x^e = Σ_k S(e,k) k! C(x,k)`; the polynomial is
    /// integer valued iff every coefficient in that basis is an integer.
    pub fn is_integer_valued(&self) -> bool {
        let mut acc: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut partial: Vec<(Monomial, BigRational)> = vec![(Vec::new(), c.clone())];
            for &(v, e) in m {
                let row = stirling_factorial_row(e as usize);
                let mut next = Vec::new();
                for (mono, coef) in &partial {
                    for (k, w) in row.iter().enumerate().skip(1) {
                        if w.is_zero() {
                            continue;
                        }
                        let mut mm = mono.clone();
                        mm.push((v, k as u16));
                        next.push((mm, coef * BigRational::from_integer(w.clone())));
                    }
                }
                partial = next;
            }
            for (mono, coef) in partial {
                *acc.entry(mono).or_insert_with(BigRational::zero) += coef;
            }
        }
        acc.values().all(|c| c.is_integer())
    }
}

/// `S(e, k) · k!` for `k = 0..=e`.
fn stirling_factorial_row(e: usize) -> Vec<num_bigint::BigInt> {
    use num_bigint::BigInt;
    let mut s = vec![vec![BigInt::zero(); e + 1]; e + 1];
    s[0][0] = BigInt::one();
    for n in 1..=e {
        for k in 1..=n {
            s[n][k] = BigInt::from(k) * &s[n - 1][k] + &s[n - 1][k - 1];
        }
    }
    let mut fact = BigInt::one();
    (0..=e)
        .map(|k| {
            if k > 0 {
                fact *= k;
            }
            &s[e][k] * &fact
        })
        .collect()
}

/// A polynomial compiled for repeated numeric evaluation.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<(Monomial, Coef)>,
}

impl CompiledPoly {
    pub fn new(p: &Poly) -> Self {
        CompiledPoly {
            terms: p.terms().map(|(m, c)| (m.clone(), Coef::new(c.clone()))).collect(),
        }
    }

    pub fn eval<S: Scalar>(&self, vars: &[S]) -> S {
        let mut acc = S::zero();
        for (m, c) in &self.terms {
            let mut t = S::from_coef(c);
            for &(v, e) in m {
                for _ in 0..e {
                    t = t * vars[v as usize].clone();
                }
            }
            acc = acc + t;
        }
        acc
    }
}

/// Structure constants `[X_i, X_j] = Σ_k c_{ijk} X_k`, stored for `i < j`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    /// `(i, j, k, c)` with `i < j` and `c != 0`.
    consts: Vec<(usize, usize, usize, BigRational)>,
}

impl LieAlgebra {
    /// `table[i][j][k]` must already be antisymmetric.
    pub fn from_table(dim: usize, table: &[Vec<Vec<BigRational>>]) -> Self {
        let mut consts = Vec::new();
        for i in 0..dim {
            for j in (i + 1)..dim {
                for k in 0..dim {
                    if !table[i][j][k].is_zero() {
                        consts.push((i, j, k, table[i][j][k].clone()));
                    }
                }
            }
        }
        LieAlgebra { dim, consts }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_abelian(&self) -> bool {
        self.consts.is_empty()
    }

    pub fn constants(&self) -> &[(usize, usize, usize, BigRational)] {
        &self.consts
    }

    pub fn bracket<R: Ring>(&self, u: &[R], v: &[R]) -> Vec<R> {
        let mut out = vec![R::nil(); self.dim];
        for (i, j, k, c) in &self.consts {
            let (i, j, k) = (*i, *j, *k);
            let uv = if u[i].is_nil() || v[j].is_nil() {
                R::nil()
            } else {
                u[i].times(&v[j])
            };
            let vu = if u[j].is_nil() || v[i].is_nil() {
                R::nil()
            } else {
                u[j].times(&v[i])
            };
            let d = uv.minus(&vu);
            if !d.is_nil() {
                out[k] = out[k].plus(&d.scale(c));
            }
        }
        out
    }

    /// Dimensions of the lower central series `g ⊇ [g,g] ⊇ [g,[g,g]] ⊇ …`,
    /// stopping at zero or after `limit` steps.
    pub fn lower_central_dims(&self, limit: usize) -> Vec<usize> {
        let mut basis: Vec<Vec<BigRational>> = (0..self.dim)
            .map(|i| unit::<BigRational>(self.dim, i))
            .collect();
        let mut dims = vec![self.dim];
        for _ in 0..limit {
            let mut next = Vec::new();
            for a in 0..self.dim {
                let e = unit::<BigRational>(self.dim, a);
                for v in &basis {
                    next.push(self.bracket(&e, v));
                }
            }
            basis = row_basis(next);
            dims.push(basis.len());
            if basis.is_empty() {
                break;
            }
        }
        dims
    }

    /// Nilpotency class, or `None` if the series has not vanished within `limit` steps.
    pub fn nilpotency_class(&self, limit: usize) -> Option<usize> {
        let dims = self.lower_central_dims(limit);
        if *dims.last().unwrap() == 0 {
            Some(dims.len() - 1)
        } else {
            None
        }
    }
}

pub fn unit<R: Ring>(dim: usize, i: usize) -> Vec<R>
where
    R: From<BigRational>,
{
    let mut v = vec![R::nil(); dim];
    v[i] = R::from(BigRational::one());
    v
}

impl From<BigRational> for Poly {
    fn from(c: BigRational) -> Self {
        Poly::constant(c)
    }
}

fn row_basis(mut rows: Vec<Vec<BigRational>>) -> Vec<Vec<BigRational>> {
    rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    if rows.is_empty() {
        return rows;
    }
    let cols = rows[0].len();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        for x in rows[rank].iter_mut() {
            *x = &*x / &pivot;
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for c in 0..cols {
                    let d = &rows[rank][c] * &f;
                    rows[r][c] -= d;
                }
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

fn add_vec<R: Ring>(a: &[R], b: &[R]) -> Vec<R> {
    a.iter().zip(b).map(|(x, y)| x.plus(y)).collect()
}

fn axpy<R: Ring>(acc: &mut [R], c: &BigRational, v: &[R]) {
    for (a, x) in acc.iter_mut().zip(v) {
        if !x.is_nil() {
            *a = a.plus(&x.scale(c));
        }
    }
}

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

impl LieAlgebra {
    /// `log(exp(x) exp(y))`, truncated after brackets of length `degree`.
    ///
    /// Exact whenever the algebra is nilpotent of class at most `degree`
    /// and `degree <= 5`.
    pub fn bch<R: Ring>(&self, x: &[R], y: &[R], degree: usize) -> Vec<R> {
        let mut z = add_vec(x, y);
        if degree < 2 || self.is_abelian() {
            return z;
        }
        let br = |a: &[R], b: &[R]| self.bracket(a, b);
        let xy = br(x, y);
        axpy(&mut z, &q(1, 2), &xy);
        if degree < 3 {
            return z;
        }
        let x_xy = br(x, &xy);
        let y_xy = br(y, &xy);
        axpy(&mut z, &q(1, 12), &x_xy);
        axpy(&mut z, &q(-1, 12), &y_xy);
        if degree < 4 {
            return z;
        }
        // [Y,[X,[X,Y]]]
        let y_x_xy = br(y, &x_xy);
        axpy(&mut z, &q(-1, 24), &y_x_xy);
        if degree < 5 {
            return z;
        }
        let yx = xy.iter().map(|c| c.scale(&q(-1, 1))).collect::<Vec<_>>();
        // [Y,[Y,[Y,[Y,X]]]] and [X,[X,[X,[X,Y]]]]
        let y_yx = br(y, &yx);
        let y_y_yx = br(y, &y_yx);
        let y_y_y_yx = br(y, &y_y_yx);
        let x_x_xy = br(x, &x_xy);
        let x_x_x_xy = br(x, &x_x_xy);
        axpy(&mut z, &q(-1, 720), &y_y_y_yx);
        axpy(&mut z, &q(-1, 720), &x_x_x_xy);
        // [X,[Y,[Y,[Y,X]]]] and [Y,[X,[X,[X,Y]]]]
        axpy(&mut z, &q(1, 360), &br(x, &y_y_yx));
        axpy(&mut z, &q(1, 360), &br(y, &x_x_xy));
        // [Y,[X,[Y,[X,Y]]]] and [X,[Y,[X,[Y,X]]]]
        let x_yx = br(x, &yx);
        axpy(&mut z, &q(1, 120), &br(y, &br(x, &y_xy)));
        axpy(&mut z, &q(1, 120), &br(x, &br(y, &x_yx)));
        z
    }

    /// Logarithm of `exp(t_m X_m) ⋯ exp(t_1 X_1)`.
    pub fn coords_to_log<R: Ring>(&self, t: &[R], degree: usize) -> Vec<R> {
        let m = self.dim;
        let mut z = vec![R::nil(); m];
        z[m - 1] = t[m - 1].clone();
        for i in (0..m - 1).rev() {
            let mut e = vec![R::nil(); m];
            e[i] = t[i].clone();
            z = self.bch(&z, &e, degree);
        }
        z
    }

    /// Inverse of [`LieAlgebra::coords_to_log`]; relies on every trailing
    /// span `span(X_j, …, X_m)` being an ideal.
    pub fn log_to_coords<R: Ring>(&self, v: &[R], degree: usize) -> Vec<R> {
        let m = self.dim;
        let mut v = v.to_vec();
        let mut t = vec![R::nil(); m];
        for i in 0..m {
            t[i] = v[i].clone();
            if t[i].is_nil() {
                continue;
            }
            let mut e = vec![R::nil(); m];
            e[i] = t[i].scale(&q(-1, 1));
            v = self.bch(&v, &e, degree);
            debug_assert!(v[i].is_nil());
        }
        t
    }
}

/// Group law of a nilpotent Lie group in second-kind coordinates, as
/// polynomials precomputed from the BCH series.
#[derive(Clone, Debug)]
pub struct BchLaw {
    pub mul: Vec<CompiledPoly>,
    pub inv: Vec<CompiledPoly>,
    pub mul_symbolic: Vec<Poly>,
    pub inv_symbolic: Vec<Poly>,
}

impl BchLaw {
    /// Whether integer coordinates form a subgroup under this law.
    pub fn preserves_integers(&self) -> bool {
        self.mul_symbolic.iter().all(|p| p.is_integer_valued())
            && self.inv_symbolic.iter().all(|p| p.is_integer_valued())
    }

    pub fn build(algebra: &LieAlgebra, degree: usize) -> Self {
        let m = algebra.dim;
        let a: Vec<Poly> = (0..m).map(|i| Poly::var(i as u16)).collect();
        let b: Vec<Poly> = (0..m).map(|i| Poly::var((m + i) as u16)).collect();
        let la = algebra.coords_to_log(&a, degree);
        let lb = algebra.coords_to_log(&b, degree);
        let prod = algebra.bch(&la, &lb, degree);
        let mul_symbolic = algebra.log_to_coords(&prod, degree);
        let neg: Vec<Poly> = la.iter().map(|p| p.scale(&q(-1, 1))).collect();
        let inv_symbolic = algebra.log_to_coords(&neg, degree);
        BchLaw {
            mul: mul_symbolic.iter().map(CompiledPoly::new).collect(),
            inv: inv_symbolic.iter().map(CompiledPoly::new).collect(),
            mul_symbolic,
            inv_symbolic,
        }
    }
}

/// Largest absolute numerator or denominator, the height of a rational.
pub fn height(r: &BigRational) -> num_bigint::BigInt {
    let n = r.numer().abs();
    let d = r.denom().abs();
    if n > d {
        n
    } else {
        d
    }
}
