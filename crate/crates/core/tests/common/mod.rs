#![allow(dead_code)]

//! Oracles shared by the integration tests. Nothing here calls into the
//! group-law code under test.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

pub type Mat = Vec<Vec<BigRational>>;

pub fn eye(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut c = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                c[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    c
}

/// Standard embedding of the Heisenberg group as 3×3 upper unitriangular matrices.
pub fn heis_matrix(x: &BigRational, y: &BigRational, z: &BigRational) -> Mat {
    let mut m = eye(3);
    m[0][1] = x.clone();
    m[1][2] = y.clone();
    m[0][2] = z.clone();
    m
}

pub fn heis_from_matrix(m: &Mat) -> [BigRational; 3] {
    [m[0][1].clone(), m[1][2].clone(), m[0][2].clone()]
}

/// Basis `E_{i,i+s}` of strictly upper triangular `n×n` matrices, ordered by
/// superdiagonal `s` and then by row.
pub fn unipotent_basis(n: usize) -> Vec<(usize, usize)> {
    let mut b = Vec::new();
    for s in 1..n {
        for i in 0..n - s {
            b.push((i, i + s));
        }
    }
    b
}

/// Structure constants of the strictly upper triangular algebra in that basis.
pub fn unipotent_constants(n: usize) -> (Vec<(usize, usize, usize, BigRational)>, Vec<usize>) {
    let basis = unipotent_basis(n);
    let index = |p: (usize, usize)| basis.iter().position(|&b| b == p).unwrap();
    let mut consts = Vec::new();
    for (a, &(i, j)) in basis.iter().enumerate() {
        for (b, &(k, l)) in basis.iter().enumerate() {
            if a >= b {
                continue;
            }
            // [E_ij, E_kl] = δ_jk E_il − δ_li E_kj
            if j == k {
                consts.push((a, b, index((i, l)), BigRational::one()));
            }
            if l == i {
                consts.push((a, b, index((k, j)), -BigRational::one()));
            }
        }
    }
    let dims = (1..n).map(|p| basis.iter().filter(|(i, j)| j - i >= p).count()).collect();
    (consts, dims)
}

/// `exp(t_m X_m) ⋯ exp(t_1 X_1)` with each `X_k` an elementary matrix, so
/// `exp(t E) = I + t E`.
pub fn unipotent_matrix(n: usize, t: &[BigRational]) -> Mat {
    let basis = unipotent_basis(n);
    let mut m = eye(n);
    for k in (0..basis.len()).rev() {
        let mut f = eye(n);
        f[basis[k].0][basis[k].1] = t[k].clone();
        m = matmul(&m, &f);
    }
    m
}

/// Direct sum `Σ_{n ≤ N} e(n α)` in f64 with Kahan compensation.
pub fn weyl_sum(alpha: f64, n_max: u64) -> (f64, f64) {
    let (mut re, mut im) = (0.0f64, 0.0f64);
    let (mut cr, mut ci) = (0.0f64, 0.0f64);
    for n in 1..=n_max {
        let t = (n as f64 * alpha).fract();
        let (s, c) = (2.0 * std::f64::consts::PI * t).sin_cos();
        let y = c - cr;
        let s1 = re + y;
        cr = (s1 - re) - y;
        re = s1;
        let y = s - ci;
        let s2 = im + y;
        ci = (s2 - im) - y;
        im = s2;
    }
    (re, im)
}

/// Trial-division factorization, the reference for sieve tests.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn mobius_naive(n: u64) -> i8 {
    let f = factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn is_prime_naive(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// `τ(1..=n)` from the truncated product `q Π_{k ≤ n} (1 − q^k)^24`, expanded densely.
pub fn tau_dense(n: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); n];
    c[0] = BigInt::one();
    for k in 1..n {
        for _ in 0..24 {
            for i in (k..n).rev() {
                let t = c[i - k].clone();
                c[i] -= t;
            }
        }
    }
    std::iter::once(BigInt::zero()).chain(c).collect()
}

/// `τ(1..=n)` built multiplicatively from the values `τ(p)` through
/// `τ(p^{k+1}) = τ(p)τ(p^k) − p^11 τ(p^{k−1})`.
pub fn tau_from_primes(n: u64, tau_p: impl Fn(u64) -> BigInt) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n as usize + 1];
    out[1] = BigInt::one();
    for m in 2..=n {
        let mut v = BigInt::one();
        for (p, e) in factor(m) {
            let tp = tau_p(p);
            let p11 = BigInt::from(p).pow(11);
            let (mut prev, mut cur) = (BigInt::one(), tp.clone());
            for _ in 1..e {
                let next = &tp * &cur - &p11 * &prev;
                prev = cur;
                cur = next;
            }
            v *= cur;
        }
        out[m as usize] = v;
    }
    out
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

pub fn phi_naive(q: u64) -> u64 {
    (1..=q).filter(|&a| gcd(a, q) == 1).count() as u64
}

/// All Dirichlet characters mod `q` when `(ℤ/q)^×` is cyclic, as value tables
/// indexed by residue. `None` for non-cyclic moduli.
pub fn dirichlet_characters(q: u64) -> Option<Vec<Vec<num_complex::Complex64>>> {
    let phi = phi_naive(q);
    let order = |g: u64| {
        let mut x = g % q;
        let mut k = 1;
        while x != 1 % q {
            x = x * g % q;
            k += 1;
        }
        k
    };
    let g = (1..=q).find(|&g| gcd(g, q) == 1 && order(g) == phi)?;
    let mut log = vec![None; q as usize];
    let mut x = 1 % q;
    for k in 0..phi {
        log[x as usize] = Some(k);
        x = x * g % q;
    }
    Some(
        (0..phi)
            .map(|j| {
                log.iter()
                    .map(|l| match l {
                        Some(k) => {
                            let t = 2.0 * std::f64::consts::PI * ((j * k) % phi) as f64 / phi as f64;
                            num_complex::Complex64::new(t.cos(), t.sin())
                        }
                        None => num_complex::Complex64::new(0.0, 0.0),
                    })
                    .collect()
            })
            .collect(),
    )
}

/// Number of squarefree `n ≤ N`, as `Σ_{d ≤ √N} μ(d) ⌊N/d²⌋`.
pub fn squarefree_count(n: u64) -> i64 {
    (1..)
        .take_while(|d| d * d <= n)
        .map(|d| mobius_naive(d) as i64 * (n / (d * d)) as i64)
        .sum()
}

/// `min_{1≤k≤K} ‖kα‖` from the continued fraction of `α`: the minimum is
/// attained at the largest convergent denominator `q_j ≤ K`, and equals
/// `|q_j α − p_j|`. Partial quotients come from exact integer arithmetic on
/// the given quadratic irrational `(√D − b)/c`.
pub fn cf_min_dist(d: i64, b: i64, c: i64, k_max: u64) -> f64 {
    // α = (√D + P)/Q with P = −b, Q = c; standard PQa recurrence.
    let sq = (d as f64).sqrt();
    let (mut p, mut qq) = (-b, c);
    let (mut p_prev, mut p_cur) = (0i64, 1i64);
    let (mut q_prev, mut q_cur) = (1i64, 0i64);
    let alpha = (sq + (-b) as f64) / c as f64;
    let mut best_q = 1i64;
    let mut best_p = 0i64;
    loop {
        let a = ((sq + p as f64) / qq as f64).floor() as i64;
        let (pn, qn) = (a * p_cur + p_prev, a * q_cur + q_prev);
        if qn as u64 > k_max {
            break;
        }
        if qn > 0 {
            best_q = qn;
            best_p = pn;
        }
        p_prev = p_cur;
        p_cur = pn;
        q_prev = q_cur;
        q_cur = qn;
        p = a * qq - p;
        qq = (d - p * p) / qq;
    }
    (best_q as f64 * alpha - best_p as f64).abs()
}
