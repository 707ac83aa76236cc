use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use super::lie::{BchLaw, LieAlgebra};
use super::spec::{Family, NilmanifoldSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point of `G` in Mal'cev coordinates of the second kind:
/// `coords = (t_1, …, t_m)` stands for `exp(t_m X_m) ⋯ exp(t_1 X_1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Element<S> {
    pub coords: SmallVec<[S; 6]>,
}

impl<S: Scalar> Element<S> {
    pub fn new(coords: impl IntoIterator<Item = S>) -> Self {
        Element {
            coords: coords.into_iter().collect(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Element::new((0..dim).map(|_| S::zero()))
    }

    pub fn from_f64s(v: &[f64]) -> Self {
        Element::new(v.iter().map(|&x| S::from_f64(x)))
    }

    pub fn from_i64s(v: &[i64]) -> Self {
        Element::new(v.iter().map(|&x| S::from_i64(x)))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_exact(&self) -> bool {
        S::EXACT
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|c| *c == S::zero())
    }

    /// Membership in `Γ`: every coordinate is an integer.
    pub fn is_lattice(&self) -> bool {
        self.coords.iter().all(|c| c.is_integral())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.as_f64()).collect()
    }

    pub fn convert<T: Scalar>(&self) -> Element<T> {
        Element::new(self.coords.iter().map(|c| match c.to_rational() {
            Some(r) if T::EXACT => T::from_rational(&r),
            _ => T::from_dd(c.to_dd()),
        }))
    }

    pub fn sup_norm(&self) -> f64 {
        self.coords.iter().map(|c| c.as_f64().abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
enum Law {
    Abelian,
    Heisenberg,
    Bch(BchLaw),
}

/// A validated nilmanifold with its precomputed group law.
#[derive(Clone, Debug)]
pub struct Nilmanifold {
    spec: NilmanifoldSpec,
    algebra: LieAlgebra,
    class: usize,
    levels: Vec<usize>,
    law: Law,
}

/// Splits `x` into `n + f` with `n` integral and `0 <= f < 1`.
pub(crate) fn split_floor<S: Scalar>(x: &S) -> (S, S) {
    let mut n = x.floor();
    let mut f = x.clone() - n.clone();
    if f >= S::one() {
        f = f - S::one();
        n = n + S::one();
    }
    if f < S::zero() {
        f = S::zero();
    }
    (n, f)
}

impl Nilmanifold {
    pub fn build(spec: NilmanifoldSpec) -> Result<Self> {
        let algebra = spec.validate()?;
        let class = algebra.nilpotency_class(super::spec::MAX_CLASS + 1).unwrap_or(0);
        let law = match spec.family {
            Family::Torus => Law::Abelian,
            Family::Heisenberg => Law::Heisenberg,
            Family::GenericBch if algebra.is_abelian() => Law::Abelian,
            Family::GenericBch => {
                let law = BchLaw::build(&algebra, class);
                if !law.preserves_integers() {
                    return Err(Error::NotALattice);
                }
                Law::Bch(law)
            }
        };
        let levels = spec.levels();
        Ok(Nilmanifold {
            spec,
            algebra,
            class,
            levels,
            law,
        })
    }

    pub fn torus(dim: usize, degree: usize) -> Arc<Self> {
        Arc::new(Self::build(NilmanifoldSpec::torus(dim, degree)).expect("torus spec is valid"))
    }

    pub fn heisenberg() -> Arc<Self> {
        Arc::new(Self::build(NilmanifoldSpec::heisenberg()).expect("heisenberg spec is valid"))
    }

    pub fn spec(&self) -> &NilmanifoldSpec {
        &self.spec
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn degree(&self) -> usize {
        self.spec.degree
    }

    pub fn family(&self) -> Family {
        self.spec.family
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self.law, Law::Abelian)
    }

    /// `m_i`, with `m_i = 0` beyond the degree.
    pub fn filtration_dim(&self, i: usize) -> usize {
        if i == 0 {
            self.dim()
        } else {
            self.spec.filtration_dims.get(i - 1).copied().unwrap_or(0)
        }
    }

    pub fn identity<S: Scalar>(&self) -> Element<S> {
        Element::identity(self.dim())
    }

    /// `exp(t X_j)`.
    pub fn basis_element<S: Scalar>(&self, j: usize, t: S) -> Element<S> {
        let mut e = self.identity::<S>();
        e.coords[j] = t;
        e
    }

    pub fn check<S: Scalar>(&self, a: &Element<S>) -> Result<()> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: a.dim(),
            });
        }
        Ok(())
    }

    pub fn mul<S: Scalar>(&self, a: &Element<S>, b: &Element<S>) -> Result<Element<S>> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    pub fn inv<S: Scalar>(&self, a: &Element<S>) -> Result<Element<S>> {
        self.check(a)?;
        Ok(self.inv_unchecked(a))
    }

    pub(crate) fn mul_unchecked<S: Scalar>(&self, a: &Element<S>, b: &Element<S>) -> Element<S> {
        match &self.law {
            Law::Abelian => Element::new(
                a.coords
                    .iter()
                    .zip(&b.coords)
                    .map(|(x, y)| x.clone() + y.clone()),
            ),
            Law::Heisenberg => {
                let (x, y, z) = (&a.coords[0], &a.coords[1], &a.coords[2]);
                let (x2, y2, z2) = (&b.coords[0], &b.coords[1], &b.coords[2]);
                Element::new([
                    x.clone() + x2.clone(),
                    y.clone() + y2.clone(),
                    z.clone() + z2.clone() + x.clone() * y2.clone(),
                ])
            }
            Law::Bch(law) => {
                let vars: Vec<S> = a.coords.iter().chain(&b.coords).cloned().collect();
                Element::new(law.mul.iter().map(|p| p.eval(&vars)))
            }
        }
    }

    pub(crate) fn inv_unchecked<S: Scalar>(&self, a: &Element<S>) -> Element<S> {
        match &self.law {
            Law::Abelian => Element::new(a.coords.iter().map(|x| -x.clone())),
            Law::Heisenberg => {
                let (x, y, z) = (&a.coords[0], &a.coords[1], &a.coords[2]);
                Element::new([
                    -x.clone(),
                    -y.clone(),
                    x.clone() * y.clone() - z.clone(),
                ])
            }
            Law::Bch(law) => {
                let vars: Vec<S> = a.coords.to_vec();
                Element::new(law.inv.iter().map(|p| p.eval(&vars)))
            }
        }
    }

    /// `a^k` for any integer `k`.
    pub fn pow<S: Scalar>(&self, a: &Element<S>, k: &BigInt) -> Result<Element<S>> {
        self.check(a)?;
        Ok(self.pow_unchecked(a, k))
    }

    pub(crate) fn pow_unchecked<S: Scalar>(&self, a: &Element<S>, k: &BigInt) -> Element<S> {
        match &self.law {
            Law::Abelian => {
                let ks = S::from_bigint(k);
                Element::new(a.coords.iter().map(|x| ks.clone() * x.clone()))
            }
            Law::Heisenberg => {
                // (x,y,z)^k = (kx, ky, kz + C(k,2) xy)
                let ks = S::from_bigint(k);
                let c2 = S::from_bigint(&((k * (k - BigInt::one())) / BigInt::from(2)));
                let (x, y, z) = (&a.coords[0], &a.coords[1], &a.coords[2]);
                Element::new([
                    ks.clone() * x.clone(),
                    ks.clone() * y.clone(),
                    ks * z.clone() + c2 * (x.clone() * y.clone()),
                ])
            }
            Law::Bch(_) => {
                let base = if k.is_negative() {
                    self.inv_unchecked(a)
                } else {
                    a.clone()
                };
                let mut e = k.abs();
                let mut result = self.identity::<S>();
                let mut sq = base;
                let two = BigInt::from(2);
                while !e.is_zero() {
                    if e.is_odd() {
                        result = self.mul_unchecked(&result, &sq);
                    }
                    e /= &two;
                    if !e.is_zero() {
                        sq = self.mul_unchecked(&sq, &sq);
                    }
                }
                result
            }
        }
    }

    /// `a^k` without big-integer allocation when `C(k, 2)` fits in `i128`.
    pub(crate) fn pow_i128<S: Scalar>(&self, a: &Element<S>, k: i128) -> Element<S> {
        match &self.law {
            Law::Abelian => {
                let ks = S::from_i128(k);
                Element::new(a.coords.iter().map(|x| ks.clone() * x.clone()))
            }
            Law::Heisenberg => match k.checked_mul(k - 1) {
                Some(v) => {
                    let ks = S::from_i128(k);
                    let c2 = S::from_i128(v / 2);
                    let (x, y, z) = (&a.coords[0], &a.coords[1], &a.coords[2]);
                    Element::new([
                        ks.clone() * x.clone(),
                        ks.clone() * y.clone(),
                        ks * z.clone() + c2 * (x.clone() * y.clone()),
                    ])
                }
                None => self.pow_unchecked(a, &BigInt::from(k)),
            },
            Law::Bch(_) => {
                let base = if k < 0 { self.inv_unchecked(a) } else { a.clone() };
                let mut e = k.unsigned_abs();
                let mut result = self.identity::<S>();
                let mut sq = base;
                while e > 0 {
                    if e & 1 == 1 {
                        result = self.mul_unchecked(&result, &sq);
                    }
                    e >>= 1;
                    if e > 0 {
                        sq = self.mul_unchecked(&sq, &sq);
                    }
                }
                result
            }
        }
    }

    /// Writes `x = frac · gamma` with `gamma ∈ Γ` and `frac ∈ [0,1)^m`.
    pub fn reduce<S: Scalar>(&self, x: &Element<S>) -> Result<(Element<S>, Element<S>)> {
        self.check(x)?;
        Ok(self.reduce_unchecked(x))
    }

    pub(crate) fn reduce_unchecked<S: Scalar>(&self, x: &Element<S>) -> (Element<S>, Element<S>) {
        match &self.law {
            Law::Abelian => {
                let (n, f): (Vec<S>, Vec<S>) = x.coords.iter().map(split_floor).unzip();
                (Element::new(n), Element::new(f))
            }
            Law::Heisenberg => {
                let (n1, f1) = split_floor(&x.coords[0]);
                let (n2, f2) = split_floor(&x.coords[1]);
                let z = x.coords[2].clone() - f1.clone() * n2.clone();
                let (n3, f3) = split_floor(&z);
                (Element::new([n1, n2, n3]), Element::new([f1, f2, f3]))
            }
            Law::Bch(_) => {
                // Right multiplication by exp(s X_j) shifts coordinate j by s and
                // leaves coordinates below j alone, so one pass suffices.
                let m = self.dim();
                let mut cur = x.clone();
                let mut gamma = Vec::with_capacity(m);
                for j in 0..m {
                    let (n, f) = split_floor(&cur.coords[j]);
                    if n != S::zero() {
                        let step = self.basis_element(j, -n.clone());
                        cur = self.mul_unchecked(&cur, &step);
                    }
                    cur.coords[j] = f;
                    gamma.push(n);
                }
                (Element::new(gamma), cur)
            }
        }
    }

    /// Representative of `xΓ` in the fundamental domain `[0,1)^m`.
    pub fn frac<S: Scalar>(&self, x: &Element<S>) -> Element<S> {
        self.reduce_unchecked(x).1
    }

    /// Right-invariant surrogate `min(|ψ(ab⁻¹)|_∞, |ψ(ba⁻¹)|_∞)`, an upper
    /// bound for the metric `d_G`.
    pub fn dist<S: Scalar>(&self, a: &Element<S>, b: &Element<S>) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        let ab = self.mul_unchecked(a, &self.inv_unchecked(b));
        if self.is_abelian() {
            return Ok(ab.sup_norm());
        }
        let ba = self.mul_unchecked(b, &self.inv_unchecked(a));
        Ok(ab.sup_norm().min(ba.sup_norm()))
    }

    /// Whether `x ∈ G_i`: coordinates outside the trailing `m_i` vanish to `tol`.
    pub fn in_subgroup<S: Scalar>(&self, i: usize, x: &Element<S>, tol: f64) -> bool {
        let keep = self.filtration_dim(i);
        let cut = self.dim() - keep.min(self.dim());
        x.coords[..cut].iter().all(|c| c.as_f64().abs() <= tol)
    }

    /// Largest absolute coordinate outside the trailing `m_i`.
    pub fn worst_outside<S: Scalar>(&self, i: usize, x: &Element<S>) -> f64 {
        let keep = self.filtration_dim(i);
        let cut = self.dim() - keep.min(self.dim());
        x.coords[..cut]
            .iter()
            .map(|c| c.as_f64().abs())
            .fold(0.0, f64::max)
    }
}

/// `G × G'` with the product filtration and a record of the interleaved basis.
#[derive(Clone, Debug)]
pub struct ProductManifold {
    pub manifold: Arc<Nilmanifold>,
    /// For each product coordinate, `(side, index)` with side 0 on the left.
    pub order: Vec<(usize, usize)>,
    pub left_dim: usize,
    pub right_dim: usize,
}

impl ProductManifold {
    pub fn new(left: &Nilmanifold, right: &Nilmanifold) -> Result<Self> {
        let (spec, order) = left.spec().product(right.spec());
        Ok(ProductManifold {
            manifold: Arc::new(Nilmanifold::build(spec)?),
            order,
            left_dim: left.dim(),
            right_dim: right.dim(),
        })
    }

    pub fn join<S: Scalar>(&self, a: &Element<S>, b: &Element<S>) -> Element<S> {
        Element::new(self.order.iter().map(|&(side, k)| {
            if side == 0 {
                a.coords[k].clone()
            } else {
                b.coords[k].clone()
            }
        }))
    }

    pub fn split<S: Scalar>(&self, x: &Element<S>) -> (Element<S>, Element<S>) {
        let mut a = Element::identity(self.left_dim);
        let mut b = Element::identity(self.right_dim);
        for (c, &(side, k)) in x.coords.iter().zip(&self.order) {
            if side == 0 {
                a.coords[k] = c.clone();
            } else {
                b.coords[k] = c.clone();
            }
        }
        (a, b)
    }
}
