//! Test functions `F : G/Γ → ℂ` drawn from a small closed grammar.
//!
//! Every function is evaluated on the fundamental-domain representative of
//! its argument, so it is automatically well defined on `G/Γ`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::group::{Element, Nilmanifold};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Support of the bump is `(BUMP_LO, BUMP_HI)`.
pub const BUMP_LO: f64 = 0.05;
pub const BUMP_HI: f64 = 0.95;

/// `ψ(t) = sin²(π (t − 0.05) / 0.9)` on `(0.05, 0.95)`, zero elsewhere on `[0, 1]`.
pub fn bump(t: f64) -> f64 {
    if t <= BUMP_LO || t >= BUMP_HI {
        0.0
    } else {
        let s = (PI * (t - BUMP_LO) / (BUMP_HI - BUMP_LO)).sin();
        s * s
    }
}

/// `e(t) = exp(2πit)`.
pub fn e(t: f64) -> Complex64 {
    let (s, c) = (2.0 * PI * t).sin_cos();
    Complex64::new(c, s)
}

/// Grammar of test functions. Coordinates are 0-based and refer to the
/// fundamental-domain representative in `[0,1)^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TestFn {
    Const { re: f64, im: f64 },
    /// `e(freq · t_coord)`; on the last coordinate this is a vertical character.
    Phase { coord: usize, freq: i64 },
    /// The coordinate value `t_coord ∈ [0,1)`.
    Coord { coord: usize },
    Bump { coord: usize },
    Product { factors: Vec<TestFn> },
    Sum { terms: Vec<TestFn> },
    Scale { re: f64, im: f64, inner: Box<TestFn> },
}

impl TestFn {
    pub fn one() -> Self {
        TestFn::Const { re: 1.0, im: 0.0 }
    }

    pub fn phase(coord: usize, freq: i64) -> Self {
        TestFn::Phase { coord, freq }
    }

    pub fn bump(coord: usize) -> Self {
        TestFn::Bump { coord }
    }

    pub fn coord(coord: usize) -> Self {
        TestFn::Coord { coord }
    }

    pub fn product(factors: Vec<TestFn>) -> Self {
        TestFn::Product { factors }
    }

    pub fn sum(terms: Vec<TestFn>) -> Self {
        TestFn::Sum { terms }
    }

    pub fn scale(c: Complex64, inner: TestFn) -> Self {
        TestFn::Scale {
            re: c.re,
            im: c.im,
            inner: Box::new(inner),
        }
    }

    fn max_coord(&self) -> Option<usize> {
        match self {
            TestFn::Const { .. } => None,
            TestFn::Phase { coord, .. } | TestFn::Coord { coord } | TestFn::Bump { coord } => {
                Some(*coord)
            }
            TestFn::Product { factors: v } | TestFn::Sum { terms: v } => {
                v.iter().filter_map(|f| f.max_coord()).max()
            }
            TestFn::Scale { inner, .. } => inner.max_coord(),
        }
    }

    /// Evaluates on a point already in the fundamental domain.
    pub fn eval_frac(&self, t: &[f64]) -> Complex64 {
        match self {
            TestFn::Const { re, im } => Complex64::new(*re, *im),
            TestFn::Phase { coord, freq } => e(*freq as f64 * t[*coord]),
            TestFn::Coord { coord } => Complex64::new(t[*coord], 0.0),
            TestFn::Bump { coord } => Complex64::new(bump(t[*coord]), 0.0),
            TestFn::Product { factors } => {
                let mut acc = Complex64::new(1.0, 0.0);
                for f in factors {
                    acc *= f.eval_frac(t);
                }
                acc
            }
            TestFn::Sum { terms } => terms.iter().map(|f| f.eval_frac(t)).sum(),
            TestFn::Scale { re, im, inner } => Complex64::new(*re, *im) * inner.eval_frac(t),
        }
    }

    /// Analytic upper bound for `‖F‖_∞`.
    pub fn sup_bound(&self) -> f64 {
        match self {
            TestFn::Const { re, im } => Complex64::new(*re, *im).norm(),
            TestFn::Phase { .. } | TestFn::Coord { .. } | TestFn::Bump { .. } => 1.0,
            TestFn::Product { factors } => factors.iter().map(|f| f.sup_bound()).product(),
            TestFn::Sum { terms } => terms.iter().map(|f| f.sup_bound()).sum(),
            TestFn::Scale { re, im, inner } => Complex64::new(*re, *im).norm() * inner.sup_bound(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.max_coord().is_none()
    }

    /// `∫_{G/Γ} F`, using that Haar measure is Lebesgue measure on `[0,1)^m`
    /// in Mal'cev coordinates.
    pub fn integral(&self) -> Result<Complex64> {
        match self {
            TestFn::Sum { terms } => terms.iter().map(|f| f.integral()).sum(),
            TestFn::Scale { re, im, inner } => Ok(Complex64::new(*re, *im) * inner.integral()?),
            _ => {
                let mut c = Complex64::new(1.0, 0.0);
                let mut atoms = Vec::new();
                flatten(self, &mut c, &mut atoms)?;
                let mut by_coord: HashMap<usize, Vec<Atom>> = HashMap::new();
                for a in atoms {
                    by_coord.entry(a.coord()).or_default().push(a);
                }
                for group in by_coord.values() {
                    c *= integral_1d(group);
                }
                Ok(c)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Atom {
    Phase(usize, i64),
    Coord(usize),
    Bump(usize),
}

impl Atom {
    fn coord(&self) -> usize {
        match *self {
            Atom::Phase(c, _) | Atom::Coord(c) | Atom::Bump(c) => c,
        }
    }

    fn eval(&self, t: f64) -> Complex64 {
        match *self {
            Atom::Phase(_, k) => e(k as f64 * t),
            Atom::Coord(_) => Complex64::new(t, 0.0),
            Atom::Bump(_) => Complex64::new(bump(t), 0.0),
        }
    }
}

fn flatten(f: &TestFn, c: &mut Complex64, atoms: &mut Vec<Atom>) -> Result<()> {
    match f {
        TestFn::Const { re, im } => *c *= Complex64::new(*re, *im),
        TestFn::Phase { coord, freq } => atoms.push(Atom::Phase(*coord, *freq)),
        TestFn::Coord { coord } => atoms.push(Atom::Coord(*coord)),
        TestFn::Bump { coord } => atoms.push(Atom::Bump(*coord)),
        TestFn::Product { factors } => {
            for g in factors {
                flatten(g, c, atoms)?;
            }
        }
        TestFn::Scale { re, im, inner } => {
            *c *= Complex64::new(*re, *im);
            flatten(inner, c, atoms)?;
        }
        TestFn::Sum { .. } => {
            return Err(Error::UnknownIntegral(
                "a sum nested inside a product has no declared integral".into(),
            ))
        }
    }
    Ok(())
}

const QUADRATURE_POINTS: usize = 1_000_000;

fn quadrature_cache() -> &'static Mutex<HashMap<Vec<Atom>, Complex64>> {
    static CACHE: OnceLock<Mutex<HashMap<Vec<Atom>, Complex64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn integral_1d(atoms: &[Atom]) -> Complex64 {
    if atoms.iter().all(|a| matches!(a, Atom::Phase(..))) {
        let k: i64 = atoms
            .iter()
            .map(|a| match a {
                Atom::Phase(_, k) => *k,
                _ => 0,
            })
            .sum();
        return if k == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    if atoms.len() == 1 {
        match atoms[0] {
            Atom::Coord(_) => return Complex64::new(0.5, 0.0),
            // ∫ sin² over a full half-period is half the support length.
            Atom::Bump(_) => return Complex64::new((BUMP_HI - BUMP_LO) / 2.0, 0.0),
            Atom::Phase(..) => unreachable!(),
        }
    }
    let mut key: Vec<Atom> = atoms
        .iter()
        .map(|a| match *a {
            Atom::Phase(_, k) => Atom::Phase(0, k),
            Atom::Coord(_) => Atom::Coord(0),
            Atom::Bump(_) => Atom::Bump(0),
        })
        .collect();
    key.sort();
    if let Some(v) = quadrature_cache().lock().unwrap().get(&key) {
        return *v;
    }
    let h = 1.0 / QUADRATURE_POINTS as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..QUADRATURE_POINTS {
        let t = (i as f64 + 0.5) * h;
        let mut v = Complex64::new(1.0, 0.0);
        for a in &key {
            v *= a.eval(t);
        }
        acc += v;
    }
    let v = acc * h;
    quadrature_cache().lock().unwrap().insert(key, v);
    v
}

/// A grammar-built test function together with an optional declared bound on `‖F‖_Lip`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzTestFunction {
    pub expression: TestFn,
    #[serde(default)]
    pub declared_lip_bound: Option<f64>,
    #[serde(default)]
    pub label: String,
}

impl LipschitzTestFunction {
    pub fn new(expression: TestFn) -> Self {
        LipschitzTestFunction {
            label: format!("{expression:?}"),
            expression,
            declared_lip_bound: None,
        }
    }

    pub fn labeled(label: impl Into<String>, expression: TestFn) -> Self {
        LipschitzTestFunction {
            label: label.into(),
            expression,
            declared_lip_bound: None,
        }
    }

    pub fn constant_one() -> Self {
        Self::labeled("1", TestFn::one())
    }

    /// `e(k t_coord)`.
    pub fn character(coord: usize, k: i64) -> Self {
        Self::labeled(format!("e({k}x{})", coord + 1), TestFn::phase(coord, k))
    }

    pub fn check_manifold(&self, manifold: &Nilmanifold) -> Result<()> {
        match self.expression.max_coord() {
            Some(c) if c >= manifold.dim() => Err(Error::EvaluationDomainError(format!(
                "coordinate {} on a {}-dimensional manifold",
                c + 1,
                manifold.dim()
            ))),
            _ => Ok(()),
        }
    }

    pub fn eval_frac(&self, t: &[f64]) -> Complex64 {
        self.expression.eval_frac(t)
    }

    /// `F(xΓ)`.
    pub fn eval<S: Scalar>(&self, manifold: &Nilmanifold, x: &Element<S>) -> Result<Complex64> {
        manifold.check(x)?;
        self.check_manifold(manifold)?;
        let f = manifold.frac(x);
        Ok(self.eval_frac(&f.to_f64()))
    }

    pub fn integral(&self) -> Result<Complex64> {
        self.expression.integral()
    }

    pub fn sup_bound(&self) -> f64 {
        self.expression.sup_bound()
    }

    /// Sampled lower bound for `‖F‖_Lip`.
    ///
    /// Sample points are the first `grid_size` terms of a Kronecker sequence,
    /// so larger grids contain smaller ones and the estimate never decreases.
    /// Each point is compared with its left translates by `δX_j`, which lie
    /// at surrogate distance exactly `δ`.
    pub fn estimate_lip(&self, manifold: &Nilmanifold, grid_size: usize) -> f64 {
        let m = manifold.dim();
        let theta = kronecker_steps(m);
        let mut sup: f64 = 0.0;
        let mut slope: f64 = 0.0;
        for i in 1..=grid_size {
            let t: Vec<f64> = theta.iter().map(|th| (i as f64 * th).fract()).collect();
            let x = Element::<f64>::new(t.iter().copied());
            let fx = self.eval_frac(&t);
            sup = sup.max(fx.norm());
            for j in 0..m {
                for &d in &[1e-2, 1e-3] {
                    let u = manifold.basis_element(j, d);
                    let y = manifold.frac(&manifold.mul_unchecked(&u, &x));
                    let fy = self.eval_frac(&y.to_f64());
                    slope = slope.max((fx - fy).norm() / d);
                }
            }
        }
        sup + slope
    }

    /// Largest change of `F` under right multiplication by the lattice
    /// generators `exp(X_j)`, over `points` seeded random points.
    pub fn gamma_invariance_defect(&self, manifold: &Nilmanifold, points: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = manifold.dim();
        let mut worst: f64 = 0.0;
        for _ in 0..points {
            let x = Element::<f64>::new((0..m).map(|_| rng.gen_range(-3.0..3.0)));
            let fx = self.eval_frac(&manifold.frac(&x).to_f64());
            for j in 0..m {
                for s in [1.0, -1.0] {
                    let y = manifold.mul_unchecked(&x, &manifold.basis_element(j, s));
                    let fy = self.eval_frac(&manifold.frac(&y).to_f64());
                    worst = worst.max((fx - fy).norm());
                }
            }
        }
        worst
    }
}

/// Fractional parts of square roots of the first `m` primes.
fn kronecker_steps(m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m);
    let mut p = 2u64;
    while out.len() < m {
        if (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0) {
            out.push((p as f64).sqrt().fract());
        }
        p += 1;
    }
    out
}
