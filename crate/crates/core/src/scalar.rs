//! Coordinate scalars.
//!
//! Group coordinates are generic over [`Scalar`] so the same group law can run
//! in plain `f64`, in double-double precision ([`Dd`]) for long nilsequence
//! orbits, or exactly in [`BigRational`] for lattice and oracle checks.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A rational constant carried in every representation a [`Scalar`] may ask for.
#[derive(Clone, Debug, PartialEq)]
pub struct Coef {
    pub exact: BigRational,
    pub hi: f64,
    pub lo: f64,
}

impl Coef {
    pub fn new(exact: BigRational) -> Self {
        let dd = Dd::from_rational(&exact);
        Coef {
            exact,
            hi: dd.hi,
            lo: dd.lo,
        }
    }
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// True when arithmetic in this type is exact.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_i128(v: i128) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    /// Exact conversion of the binary value of `v` where the type allows it.
    fn from_f64(v: f64) -> Self;
    fn from_coef(c: &Coef) -> Self;
    fn from_dd(d: Dd) -> Self;
    fn to_dd(&self) -> Dd;
    fn floor(&self) -> Self;
    fn as_f64(&self) -> f64;
    fn to_rational(&self) -> Option<BigRational>;

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Fractional part in `[0, 1)`.
    fn frac01(&self) -> Self {
        self.clone() - self.floor()
    }

    fn is_integral(&self) -> bool {
        *self == self.floor()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_i128(v: i128) -> Self {
        v as f64
    }
    fn from_bigint(v: &BigInt) -> Self {
        v.to_f64().unwrap_or(f64::NAN)
    }
    fn from_rational(r: &BigRational) -> Self {
        Dd::from_rational(r).to_f64()
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn from_coef(c: &Coef) -> Self {
        c.hi
    }
    fn from_dd(d: Dd) -> Self {
        d.to_f64()
    }
    fn to_dd(&self) -> Dd {
        Dd::from_f64(*self)
    }
    fn floor(&self) -> Self {
        f64::floor(*self)
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> Option<BigRational> {
        None
    }
    fn abs_val(&self) -> Self {
        f64::abs(*self)
    }
    fn frac01(&self) -> Self {
        let f = *self - f64::floor(*self);
        // x - floor(x) rounds up to 1.0 for tiny negative x
        if f >= 1.0 {
            0.0
        } else {
            f
        }
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_i128(v: i128) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite coordinate")
    }
    fn from_coef(c: &Coef) -> Self {
        c.exact.clone()
    }
    fn from_dd(d: Dd) -> Self {
        BigRational::from_float(d.hi).expect("finite coordinate")
            + BigRational::from_float(d.lo).expect("finite coordinate")
    }
    fn to_dd(&self) -> Dd {
        Dd::from_rational(self)
    }
    fn floor(&self) -> Self {
        num_integer::Integer::div_floor(self.numer(), self.denom()).into()
    }
    fn as_f64(&self) -> f64 {
        Dd::from_rational(self).to_f64()
    }
    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }
    fn abs_val(&self) -> Self {
        Signed::abs(self)
    }
    fn is_integral(&self) -> bool {
        self.is_integer()
    }
}

/// Double-double real: an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`,
/// giving roughly 106 bits of significand.
#[derive(Clone, Copy, Debug, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn from_f64(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    pub fn from_i128(v: i128) -> Self {
        let hi = v as f64;
        // the remainder is exact in i128 once hi is rounded to 53 bits
        let rem = v - hi as i128;
        Dd::new(hi, rem as f64)
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        if let Some(small) = v.to_i128() {
            return Dd::from_i128(small);
        }
        let hi = v.to_f64().unwrap_or(f64::NAN);
        if !hi.is_finite() {
            return Dd { hi, lo: 0.0 };
        }
        let hi_big = BigRational::from_float(hi).map(|r| r.to_integer()).unwrap_or_default();
        let lo = (v - hi_big).to_f64().unwrap_or(0.0);
        Dd::new(hi, lo)
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Dd::from_bigint(r.numer()) / Dd::from_bigint(r.denom())
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn floor(self) -> Self {
        let h = self.hi.floor();
        if h == self.hi {
            let (s, e) = quick_two_sum(h, self.lo.floor());
            Dd { hi: s, lo: e }
        } else {
            Dd { hi: h, lo: 0.0 }
        }
    }

    /// Fractional part as an `f64` in `[0, 1)`.
    #[inline]
    /// Square root by one Newton step from the f64 root.
    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let x = Dd::from_f64(self.hi.sqrt());
        x + (self - x * x) / (x + x)
    }

    pub fn fract_f64(self) -> f64 {
        let f = (self - self.floor()).to_f64();
        if f >= 1.0 {
            0.0
        } else {
            f
        }
    }
}

impl PartialEq for Dd {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::from_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

impl Zero for Dd {
    fn zero() -> Self {
        Dd::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd::from_f64(1.0)
    }
}

impl Scalar for Dd {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        Dd::from_i128(v as i128)
    }
    fn from_i128(v: i128) -> Self {
        Dd::from_i128(v)
    }
    fn from_bigint(v: &BigInt) -> Self {
        Dd::from_bigint(v)
    }
    fn from_rational(r: &BigRational) -> Self {
        Dd::from_rational(r)
    }
    fn from_f64(v: f64) -> Self {
        Dd::from_f64(v)
    }
    fn from_coef(c: &Coef) -> Self {
        Dd { hi: c.hi, lo: c.lo }
    }
    fn from_dd(d: Dd) -> Self {
        d
    }
    fn to_dd(&self) -> Dd {
        *self
    }
    fn floor(&self) -> Self {
        Dd::floor(*self)
    }
    fn as_f64(&self) -> f64 {
        Dd::to_f64(*self)
    }
    fn to_rational(&self) -> Option<BigRational> {
        None
    }
}

/// Parses `"p/q"`, an integer, or a decimal float into an exact rational.
/// Decimal strings are read exactly as written (`"0.1"` is `1/10`).
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Ok(i) = s.parse::<BigInt>() {
        return Some(BigRational::from_integer(i));
    }
    // plain decimal, optionally signed, no exponent
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.')?;
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(digits, scale);
    Some(if neg { -r } else { r })
}

/// A real constant from a config file: exact when rational, otherwise a
/// double-double value.
#[derive(Clone, Debug, PartialEq)]
pub enum RealConst {
    Exact(BigRational),
    Approx(Dd),
}

impl RealConst {
    /// Accepts `"p/q"`, integers, decimals, `"sqrt(n)"`, `"frac(sqrt(n))"`,
    /// `"golden"` (the fractional part `(√5 − 1)/2`) and a leading `-`.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some(r) = parse_rational(s) {
            return Some(RealConst::Exact(r));
        }
        if let Some(rest) = s.strip_prefix('-') {
            return Some(match RealConst::parse(rest)? {
                RealConst::Exact(r) => RealConst::Exact(-r),
                RealConst::Approx(d) => RealConst::Approx(-d),
            });
        }
        if s == "golden" {
            let r5 = Dd::from_f64(5.0).sqrt();
            return Some(RealConst::Approx((r5 - Dd::from_f64(1.0)) / Dd::from_f64(2.0)));
        }
        if let Some(inner) = s.strip_prefix("frac(").and_then(|t| t.strip_suffix(')')) {
            return Some(match RealConst::parse(inner)? {
                RealConst::Exact(r) => RealConst::Exact(Scalar::frac01(&r)),
                RealConst::Approx(d) => RealConst::Approx(d - d.floor()),
            });
        }
        if let Some(inner) = s.strip_prefix("sqrt(").and_then(|t| t.strip_suffix(')')) {
            let r = parse_rational(inner)?;
            if r < BigRational::zero() {
                return None;
            }
            return Some(RealConst::Approx(Dd::from_rational(&r).sqrt()));
        }
        None
    }

    pub fn from_json(v: &serde_json::Value) -> Option<Self> {
        match v {
            serde_json::Value::String(s) => RealConst::parse(s),
            serde_json::Value::Number(n) => {
                let f = n.as_f64()?;
                // Integers are exact, other JSON numbers are taken at their binary value.
                if let Some(i) = n.as_i64() {
                    Some(RealConst::Exact(BigRational::from_integer(i.into())))
                } else {
                    Some(RealConst::Approx(Dd::from_f64(f)))
                }
            }
            _ => None,
        }
    }

    pub fn to_scalar<S: Scalar>(&self) -> S {
        match self {
            RealConst::Exact(r) => S::from_rational(r),
            RealConst::Approx(d) => S::from_dd(*d),
        }
    }
}

/// Distance from `x` to the nearest integer, `‖x‖`.
pub fn dist_to_int(x: f64) -> f64 {
    let f = x - x.floor();
    f.min(1.0 - f)
}

/// Exact `‖x‖` for a rational.
pub fn dist_to_int_exact(x: &BigRational) -> BigRational {
    let f = x - x.floor();
    let g = BigRational::one() - &f;
    if f < g {
        f
    } else {
        g
    }
}
