//! Serializable description of a filtered nilmanifold and its validation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::lie::{height, LieAlgebra};
use crate::error::{Error, Result};
use crate::scalar::parse_rational;

/// Largest nilpotency class for which the truncated BCH law is exact.
pub const MAX_CLASS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "torus")]
    Torus,
    #[serde(rename = "heisenberg")]
    Heisenberg,
    #[serde(rename = "generic-BCH", alias = "generic")]
    GenericBch,
}

/// Dimension, filtration and rational structure constants of `G/Γ`.
///
/// Structure constants are kept 0-based internally and 1-based in JSON.
#[derive(Clone, Debug, PartialEq)]
pub struct NilmanifoldSpec {
    pub dim: usize,
    pub degree: usize,
    /// `(i, j, k, c)` meaning `[X_i, X_j]` has `c` as its `X_k` component.
    pub structure_constants: Vec<(usize, usize, usize, BigRational)>,
    pub filtration_dims: Vec<usize>,
    pub rationality_height: BigInt,
    pub family: Family,
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    dim: usize,
    degree: usize,
    filtration_dims: Vec<usize>,
    #[serde(default)]
    structure_constants: Vec<(usize, usize, usize, serde_json::Value)>,
    family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    height: Option<String>,
}

fn rational_from_json(v: &serde_json::Value) -> Result<BigRational> {
    match v {
        serde_json::Value::String(s) => parse_rational(s)
            .ok_or_else(|| Error::InvalidSpec(format!("cannot parse rational {s:?}"))),
        serde_json::Value::Number(n) => {
            let s = n.to_string();
            parse_rational(&s).ok_or_else(|| Error::InvalidSpec(format!("cannot parse {s}")))
        }
        other => Err(Error::InvalidSpec(format!("expected a rational, got {other}"))),
    }
}

impl NilmanifoldSpec {
    /// The torus `ℝ^m/ℤ^m` with the constant filtration of the given degree.
    pub fn torus(dim: usize, degree: usize) -> Self {
        NilmanifoldSpec {
            dim,
            degree,
            structure_constants: Vec::new(),
            filtration_dims: vec![dim; degree],
            rationality_height: BigInt::one(),
            family: Family::Torus,
        }
    }

    /// Heisenberg group with `[X1, X2] = X3` and filtration `G ⊇ Z(G)` of degree 2.
    pub fn heisenberg() -> Self {
        Self::heisenberg_with_degree(2)
    }

    /// Heisenberg group with filtration `(3, 1, 1, …)` of the given degree `>= 2`.
    pub fn heisenberg_with_degree(degree: usize) -> Self {
        let mut dims = vec![3];
        dims.extend(std::iter::repeat(1).take(degree.max(2) - 1));
        NilmanifoldSpec {
            dim: 3,
            degree: degree.max(2),
            structure_constants: vec![(0, 1, 2, BigRational::one())],
            filtration_dims: dims,
            rationality_height: BigInt::one(),
            family: Family::Heisenberg,
        }
    }

    pub fn generic(
        dim: usize,
        degree: usize,
        filtration_dims: Vec<usize>,
        structure_constants: Vec<(usize, usize, usize, BigRational)>,
    ) -> Self {
        let h = structure_constants
            .iter()
            .map(|c| height(&c.3))
            .max()
            .unwrap_or_else(BigInt::one);
        NilmanifoldSpec {
            dim,
            degree,
            structure_constants,
            filtration_dims,
            rationality_height: h,
            family: Family::GenericBch,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: SpecJson =
            serde_json::from_str(s).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        Self::from_raw(raw)
    }

    pub fn from_value(v: &serde_json::Value) -> Result<Self> {
        let raw: SpecJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: SpecJson) -> Result<Self> {
        let mut consts = Vec::new();
        for (i, j, k, v) in &raw.structure_constants {
            if *i == 0 || *j == 0 || *k == 0 {
                return Err(Error::InvalidSpec("indices are 1-based".into()));
            }
            consts.push((i - 1, j - 1, k - 1, rational_from_json(v)?));
        }
        let h = match &raw.height {
            Some(h) => h
                .parse::<BigInt>()
                .map_err(|e| Error::InvalidSpec(format!("height: {e}")))?,
            None => consts.iter().map(|c| height(&c.3)).max().unwrap_or_else(BigInt::one),
        };
        Ok(NilmanifoldSpec {
            dim: raw.dim,
            degree: raw.degree,
            structure_constants: consts,
            filtration_dims: raw.filtration_dims,
            rationality_height: h,
            family: raw.family,
        })
    }

    pub fn to_json(&self) -> String {
        let raw = SpecJson {
            dim: self.dim,
            degree: self.degree,
            filtration_dims: self.filtration_dims.clone(),
            structure_constants: self
                .structure_constants
                .iter()
                .map(|(i, j, k, c)| (i + 1, j + 1, k + 1, serde_json::Value::String(c.to_string())))
                .collect(),
            family: self.family,
            height: Some(self.rationality_height.to_string()),
        };
        serde_json::to_string(&raw).expect("spec serializes")
    }

    /// Filtration level of each basis index: the largest `i` with `X_k ∈ 𝔤_i`.
    pub fn levels(&self) -> Vec<usize> {
        (0..self.dim)
            .map(|k| {
                self.filtration_dims
                    .iter()
                    .filter(|&&m| k + m >= self.dim)
                    .count()
            })
            .collect()
    }

    /// Checks every invariant and returns the validated Lie algebra.
    pub fn validate(&self) -> Result<LieAlgebra> {
        let m = self.dim;
        if m == 0 || self.degree == 0 {
            return Err(Error::InvalidSpec("dimension and degree must be positive".into()));
        }
        if self.filtration_dims.len() != self.degree {
            return Err(Error::InvalidSpec(format!(
                "expected {} filtration dimensions, got {}",
                self.degree,
                self.filtration_dims.len()
            )));
        }
        if self.filtration_dims[0] != m || self.filtration_dims.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidSpec(
                "filtration dimensions must start at dim and be nonincreasing".into(),
            ));
        }

        let zero = BigRational::zero();
        let mut table = vec![vec![vec![zero.clone(); m]; m]; m];
        let mut set = vec![vec![vec![false; m]; m]; m];
        for (i, j, k, c) in &self.structure_constants {
            let (i, j, k) = (*i, *j, *k);
            if i >= m || j >= m || k >= m {
                return Err(Error::InvalidSpec(format!(
                    "index ({},{},{}) out of range",
                    i + 1,
                    j + 1,
                    k + 1
                )));
            }
            if height(c) > self.rationality_height {
                return Err(Error::HeightExceeded(i + 1, j + 1, k + 1));
            }
            if (i == j && !c.is_zero()) || (set[i][j][k] && table[i][j][k] != *c) {
                return Err(Error::Antisymmetry(i + 1, j + 1, k + 1));
            }
            if set[j][i][k] && table[j][i][k] != -c.clone() {
                return Err(Error::Antisymmetry(i + 1, j + 1, k + 1));
            }
            table[i][j][k] = c.clone();
            table[j][i][k] = -c.clone();
            set[i][j][k] = true;
            set[j][i][k] = true;
        }

        let alg = LieAlgebra::from_table(m, &table);

        for i in 0..m {
            for j in (i + 1)..m {
                for k in (j + 1)..m {
                    let e = |a: usize| super::lie::unit::<BigRational>(m, a);
                    let t1 = alg.bracket(&e(i), &alg.bracket(&e(j), &e(k)));
                    let t2 = alg.bracket(&e(j), &alg.bracket(&e(k), &e(i)));
                    let t3 = alg.bracket(&e(k), &alg.bracket(&e(i), &e(j)));
                    if (0..m).any(|c| !(&t1[c] + &t2[c] + &t3[c]).is_zero()) {
                        return Err(Error::JacobiViolation(i + 1, j + 1, k + 1));
                    }
                }
            }
        }

        let levels = self.levels();
        for (a, b, k, c) in alg.constants() {
            if c.is_zero() {
                continue;
            }
            if *k < (*a).max(*b) {
                return Err(Error::IdealViolation(a + 1, b + 1, k + 1));
            }
            if levels[*k] < levels[*a] + levels[*b] {
                return Err(Error::FiltrationViolation(a + 1, b + 1, k + 1));
            }
        }

        if alg.nilpotency_class(MAX_CLASS + 1).map_or(true, |c| c > MAX_CLASS) {
            return Err(Error::ClassTooLarge(MAX_CLASS));
        }

        match self.family {
            Family::Torus if !alg.is_abelian() => {
                Err(Error::FamilyMismatch("torus needs vanishing structure constants".into()))
            }
            Family::Heisenberg => {
                let ok = m == 3
                    && alg.constants().len() == 1
                    && alg.constants()[0].0 == 0
                    && alg.constants()[0].1 == 1
                    && alg.constants()[0].2 == 2
                    && alg.constants()[0].3.is_one();
                if ok {
                    Ok(alg)
                } else {
                    Err(Error::FamilyMismatch("heisenberg needs exactly [X1,X2] = X3".into()))
                }
            }
            _ => Ok(alg),
        }
    }

    /// Spec of `G × G'` with the product filtration.
    ///
    /// Returns the spec and, for each product index, `(side, index)` with
    /// side 0 for the left factor.
    pub fn product(&self, other: &NilmanifoldSpec) -> (NilmanifoldSpec, Vec<(usize, usize)>) {
        let d = self.degree.max(other.degree);
        let (la, lb) = (self.levels(), other.levels());
        let mut order = Vec::new();
        for level in 1..=d {
            for (k, &l) in la.iter().enumerate() {
                if l == level {
                    order.push((0, k));
                }
            }
            for (k, &l) in lb.iter().enumerate() {
                if l == level {
                    order.push((1, k));
                }
            }
        }
        let mut pos = [vec![0; self.dim], vec![0; other.dim]];
        for (n, &(side, k)) in order.iter().enumerate() {
            pos[side][k] = n;
        }
        let mut consts = Vec::new();
        for (side, spec) in [(0usize, self), (1, other)] {
            for (i, j, k, c) in &spec.structure_constants {
                consts.push((pos[side][*i], pos[side][*j], pos[side][*k], c.clone()));
            }
        }
        let dims_at = |s: &NilmanifoldSpec, i: usize| s.filtration_dims.get(i).copied().unwrap_or(0);
        let filtration_dims = (0..d).map(|i| dims_at(self, i) + dims_at(other, i)).collect();
        let family = if self.family == Family::Torus && other.family == Family::Torus {
            Family::Torus
        } else {
            Family::GenericBch
        };
        let spec = NilmanifoldSpec {
            dim: self.dim + other.dim,
            degree: d,
            structure_constants: consts,
            filtration_dims,
            rationality_height: self.rationality_height.clone().max(other.rationality_height.clone()),
            family,
        };
        (spec, order)
    }
}
