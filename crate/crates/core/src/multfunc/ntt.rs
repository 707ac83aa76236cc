//! Number-theoretic transforms over five word-sized primes, and Garner
//! reconstruction of signed integers below half their product.

use num_bigint::BigInt;

/// NTT-friendly primes `c·2^k + 1` with `k ≥ 25`.
pub const PRIMES: [u32; 5] = [2013265921, 1811939329, 469762049, 2113929217, 167772161];

/// Largest supported transform length.
pub const MAX_LOG2: u32 = 25;

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Smallest primitive root of the prime `p`.
pub fn primitive_root(p: u64) -> u64 {
    let mut factors = Vec::new();
    let mut m = p - 1;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            factors.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, (p - 1) / q, p) != 1))
        .expect("prime has a primitive root")
}

/// In-place cyclic transform of length `2^k` modulo the const prime `P`.
fn transform<const P: u64>(a: &mut [u32], invert: bool) {
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let g = primitive_root(P);
    let mut len = 2;
    let mut tw: Vec<u32> = Vec::with_capacity(n / 2);
    while len <= n {
        let mut w = pow_mod(g, (P - 1) / len as u64, P);
        if invert {
            w = inv_mod(w, P);
        }
        let half = len / 2;
        tw.clear();
        let mut cur = 1u64;
        for _ in 0..half {
            tw.push(cur as u32);
            cur = cur * w % P;
        }
        for block in a.chunks_mut(len) {
            let (lo, hi) = block.split_at_mut(half);
            for ((x, y), &t) in lo.iter_mut().zip(hi.iter_mut()).zip(&tw) {
                let u = *x as u64;
                let v = *y as u64 * t as u64 % P;
                *x = ((u + v) % P) as u32;
                *y = ((u + P - v) % P) as u32;
            }
        }
        len <<= 1;
    }
    if invert {
        let ninv = inv_mod(n as u64, P);
        for x in a.iter_mut() {
            *x = (*x as u64 * ninv % P) as u32;
        }
    }
}

fn square_truncated<const P: u64>(a: &[u32], keep: usize) -> Vec<u32> {
    let size = (2 * a.len()).next_power_of_two();
    assert!(size <= 1 << MAX_LOG2, "transform length {size} too large");
    let mut buf = vec![0u32; size];
    buf[..a.len()].copy_from_slice(a);
    transform::<P>(&mut buf, false);
    for x in buf.iter_mut() {
        *x = (*x as u64 * *x as u64 % P) as u32;
    }
    transform::<P>(&mut buf, true);
    buf.truncate(keep);
    buf
}

/// `a²` modulo `PRIMES[idx]`, keeping the first `keep` coefficients.
pub fn square_mod(idx: usize, a: &[u32], keep: usize) -> Vec<u32> {
    match idx {
        0 => square_truncated::<{ PRIMES[0] as u64 }>(a, keep),
        1 => square_truncated::<{ PRIMES[1] as u64 }>(a, keep),
        2 => square_truncated::<{ PRIMES[2] as u64 }>(a, keep),
        3 => square_truncated::<{ PRIMES[3] as u64 }>(a, keep),
        4 => square_truncated::<{ PRIMES[4] as u64 }>(a, keep),
        _ => panic!("prime index {idx} out of range"),
    }
}

pub fn reduce_i64(x: i64, p: u32) -> u32 {
    x.rem_euclid(p as i64) as u32
}

/// A signed integer `±(a + P₃·b)` with `P₃ = p₀p₁p₂`, as produced by Garner's
/// algorithm over [`PRIMES`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wide {
    pub negative: bool,
    pub a: u128,
    pub b: u64,
}

struct GarnerConsts {
    inv: [[u64; 5]; 5],
    p3: u128,
    k: u64,
}

fn garner_consts() -> &'static GarnerConsts {
    static C: std::sync::OnceLock<GarnerConsts> = std::sync::OnceLock::new();
    C.get_or_init(|| {
        let mut inv = [[0u64; 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    inv[i][j] = inv_mod(PRIMES[i] as u64 % PRIMES[j] as u64, PRIMES[j] as u64);
                }
            }
        }
        GarnerConsts {
            inv,
            p3: PRIMES[0] as u128 * PRIMES[1] as u128 * PRIMES[2] as u128,
            k: PRIMES[3] as u64 * PRIMES[4] as u64,
        }
    })
}

impl Wide {
    /// The unique integer in `(−M/2, M/2]` with the given residues.
    pub fn from_residues(r: &[u32; 5]) -> Wide {
        let c = garner_consts();
        let m: [u64; 5] = PRIMES.map(|p| p as u64);
        let mut d = [0u64; 5];
        for i in 0..5 {
            let mut x = r[i] as u64 % m[i];
            for j in 0..i {
                x = (x + m[i] - d[j] % m[i]) % m[i] * c.inv[j][i] % m[i];
            }
            d[i] = x;
        }
        let a = d[0] as u128 + m[0] as u128 * (d[1] as u128 + m[1] as u128 * d[2] as u128);
        let b = d[3] + m[3] * d[4];
        // value = a + P₃ b is above M/2 = P₃ K / 2 exactly when this holds
        let neg = 2 * b as u128 > c.k as u128 || (2 * b as u128 + 1 == c.k as u128 && 2 * a > c.p3);
        if neg {
            // M − value = (P₃ − a) + P₃ (K − b − 1)
            let (a2, b2) = if a == 0 {
                (0, c.k - b)
            } else {
                (c.p3 - a, c.k - b - 1)
            };
            Wide {
                negative: true,
                a: a2,
                b: b2,
            }
        } else {
            Wide {
                negative: false,
                a,
                b,
            }
        }
    }

    pub fn from_i128(v: i128) -> Wide {
        let c = garner_consts();
        let u = v.unsigned_abs();
        Wide {
            negative: v < 0,
            a: u % c.p3,
            b: (u / c.p3) as u64,
        }
    }

    pub fn to_f64(self) -> f64 {
        let c = garner_consts();
        let m = self.a as f64 + c.p3 as f64 * self.b as f64;
        if self.negative {
            -m
        } else {
            m
        }
    }

    pub fn to_i128(self) -> Option<i128> {
        let c = garner_consts();
        let hi = c.p3.checked_mul(self.b as u128)?;
        let m = i128::try_from(hi.checked_add(self.a)?).ok()?;
        Some(if self.negative { -m } else { m })
    }

    pub fn to_bigint(self) -> BigInt {
        let c = garner_consts();
        let m = BigInt::from(self.a) + BigInt::from(c.p3) * BigInt::from(self.b);
        if self.negative {
            -m
        } else {
            m
        }
    }

    pub fn residues(self) -> [u32; 5] {
        PRIMES.map(|p| {
            let p = p as u128;
            let r = (self.a % p + (garner_consts().p3 % p) * (self.b as u128 % p)) % p;
            if self.negative {
                ((p - r) % p) as u32
            } else {
                r as u32
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_support_transforms() {
        for p in PRIMES {
            assert_eq!((p as u64 - 1) % (1 << MAX_LOG2), 0, "{p}");
            let g = primitive_root(p as u64);
            assert_eq!(pow_mod(g, p as u64 - 1, p as u64), 1);
        }
    }

    #[test]
    fn squaring_matches_schoolbook() {
        let a: Vec<i64> = (0..300).map(|i| (i * 37 % 101) - 50).collect();
        let mut want = vec![0i64; 300];
        for i in 0..300 {
            for j in 0..300 - i {
                want[i + j] += a[i] * a[j];
            }
        }
        for idx in 0..5 {
            let p = PRIMES[idx];
            let r: Vec<u32> = a.iter().map(|&x| reduce_i64(x, p)).collect();
            let sq = square_mod(idx, &r, 300);
            for k in 0..300 {
                assert_eq!(sq[k], reduce_i64(want[k], p));
            }
        }
    }

    #[test]
    fn garner_round_trips() {
        for v in [0i128, 1, -1, 42, -1 << 100, (1 << 120) + 12345, -(1i128 << 126) + 7, i128::MAX] {
            let w = Wide::from_i128(v);
            assert_eq!(Wide::from_residues(&w.residues()), w);
            assert_eq!(w.to_i128(), Some(v));
            assert_eq!(w.to_bigint(), BigInt::from(v));
        }
    }
}
