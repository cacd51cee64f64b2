//! Field abstraction shared by the exact and prime-field backends.
//!
//! [`Scalar`] is the exact backend. [`Fp`] is arithmetic modulo a word-sized
//! prime `p ≡ 1 (mod r)`, reached from ℚ(ζ_r) through a [`ModularEmbedding`]
//! that sends ζ to a primitive `r`-th root of unity mod `p`.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::scalar::Scalar;

pub trait Field: Clone + PartialEq + Eq + Hash + Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn fadd(&self, other: &Self) -> Self;
    fn fsub(&self, other: &Self) -> Self;
    fn fmul(&self, other: &Self) -> Self;
    fn fneg(&self) -> Self;
    /// Multiplicative inverse; panics on zero.
    fn finv(&self) -> Self;

    fn is_one(&self) -> bool {
        *self == self.one_like()
    }
}

impl Field for Scalar {
    fn zero_like(&self) -> Self {
        Scalar::zero(self.order())
    }
    fn one_like(&self) -> Self {
        Scalar::one(self.order())
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn fadd(&self, other: &Self) -> Self {
        self + other
    }
    fn fsub(&self, other: &Self) -> Self {
        self - other
    }
    fn fmul(&self, other: &Self) -> Self {
        self * other
    }
    fn fneg(&self) -> Self {
        -self
    }
    fn finv(&self) -> Self {
        self.try_inv().expect("inverse of zero")
    }
    fn is_one(&self) -> bool {
        Scalar::is_one(self)
    }
}

/// An element of 𝔽_p; the modulus travels with the value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Fp {
    v: u64,
    p: u64,
}

impl Fp {
    pub fn new(v: u64, p: u64) -> Fp {
        Fp { v: v % p, p }
    }

    pub fn value(self) -> u64 {
        self.v
    }

    pub fn modulus(self) -> u64 {
        self.p
    }

    pub fn pow(self, mut e: u64) -> Fp {
        let mut base = self;
        let mut acc = Fp::new(1, self.p);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.fmul(&base);
            }
            base = base.fmul(&base);
            e >>= 1;
        }
        acc
    }
}

impl Field for Fp {
    fn zero_like(&self) -> Self {
        Fp { v: 0, p: self.p }
    }
    fn one_like(&self) -> Self {
        Fp { v: 1, p: self.p }
    }
    fn is_zero(&self) -> bool {
        self.v == 0
    }
    fn fadd(&self, other: &Self) -> Self {
        let s = self.v + other.v;
        Fp {
            v: if s >= self.p { s - self.p } else { s },
            p: self.p,
        }
    }
    fn fsub(&self, other: &Self) -> Self {
        Fp {
            v: if self.v >= other.v {
                self.v - other.v
            } else {
                self.v + self.p - other.v
            },
            p: self.p,
        }
    }
    fn fmul(&self, other: &Self) -> Self {
        Fp {
            v: ((self.v as u128 * other.v as u128) % self.p as u128) as u64,
            p: self.p,
        }
    }
    fn fneg(&self) -> Self {
        Fp {
            v: if self.v == 0 { 0 } else { self.p - self.v },
            p: self.p,
        }
    }
    fn finv(&self) -> Self {
        assert!(self.v != 0, "inverse of zero");
        self.pow(self.p - 2)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// A ring map ℤ_(p)\[ζ_r\] → 𝔽_p fixed by the image `omega` of ζ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModularEmbedding {
    pub order: u32,
    pub p: u64,
    pub omega: u64,
}

impl ModularEmbedding {
    /// The `index`-th prime `p ≡ 1 (mod r)` below 2^62 (descending), with a
    /// deterministic primitive root of unity.
    pub fn nth(order: u32, index: usize) -> ModularEmbedding {
        let r = order.max(1) as u64;
        let mut m = ((1u64 << 62) - 1) / r;
        let mut seen = 0;
        loop {
            let p = m * r + 1;
            if is_prime_u64(p) {
                if seen == index {
                    return ModularEmbedding {
                        order,
                        p,
                        omega: primitive_root_of_unity(r, p),
                    };
                }
                seen += 1;
            }
            m -= 1;
        }
    }

    /// The same prime with ζ sent to `omega^k`; `k` must be coprime to `r`.
    pub fn conjugate(&self, k: u32) -> ModularEmbedding {
        ModularEmbedding {
            omega: pow_mod(self.omega, k as u64, self.p),
            ..*self
        }
    }

    pub fn zero(&self) -> Fp {
        Fp::new(0, self.p)
    }

    pub fn one(&self) -> Fp {
        Fp::new(1, self.p)
    }

    pub fn int(&self, v: i64) -> Fp {
        let m = v.rem_euclid(self.p as i64) as u64;
        Fp::new(m, self.p)
    }

    fn big(&self, v: &BigInt) -> Fp {
        let m = v.mod_floor(&BigInt::from(self.p));
        Fp::new(m.to_u64().expect("residue fits"), self.p)
    }

    /// Image of an exact scalar, or `None` when a denominator vanishes mod p.
    pub fn map(&self, s: &Scalar) -> Option<Fp> {
        let mut acc = self.zero();
        let mut zk = self.one();
        let omega = Fp::new(self.omega, self.p);
        for c in s.coeffs() {
            if !c.is_zero() {
                let den = self.big(c.denom());
                if den.is_zero() {
                    return None;
                }
                let term = self.big(c.numer()).fmul(&den.finv());
                acc = acc.fadd(&term.fmul(&zk));
            }
            zk = zk.fmul(&omega);
        }
        Some(acc)
    }
}

fn primitive_root_of_unity(r: u64, p: u64) -> u64 {
    if r == 1 {
        return 1;
    }
    let qs = prime_factors(r);
    let e = (p - 1) / r;
    for x in 2u64.. {
        let w = pow_mod(x, e, p);
        if qs.iter().all(|&q| pow_mod(w, r / q, p) != 1) {
            return w;
        }
    }
    unreachable!()
}

/// Exponents `k` in `1..r` coprime to `r`: the Galois conjugates of ζ_r.
pub fn units_mod(r: u32) -> Vec<u32> {
    if r <= 2 {
        return vec![1];
    }
    (1..r).filter(|k| k.gcd(&r) == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_roots() {
        for r in [1u32, 2, 3, 4, 5, 6, 12] {
            let e = ModularEmbedding::nth(r, 0);
            assert!(is_prime_u64(e.p));
            assert_eq!((e.p - 1) % r as u64, 0);
            let w = Fp::new(e.omega, e.p);
            assert!(w.pow(r as u64).is_one());
            let z = e.map(&Scalar::zeta(r)).unwrap();
            assert_eq!(z, w);
        }
        assert_ne!(ModularEmbedding::nth(3, 0).p, ModularEmbedding::nth(3, 1).p);
    }

    #[test]
    fn embedding_is_a_ring_map() {
        let e = ModularEmbedding::nth(3, 2).conjugate(2);
        let a = Scalar::parse("1/3 + 2*z", 3).unwrap();
        let b = Scalar::parse("-5/7 - z", 3).unwrap();
        let (fa, fb) = (e.map(&a).unwrap(), e.map(&b).unwrap());
        assert_eq!(e.map(&(&a * &b)).unwrap(), fa.fmul(&fb));
        assert_eq!(e.map(&(&a + &b)).unwrap(), fa.fadd(&fb));
        assert_eq!(e.map(&(&a / &b)).unwrap(), fa.fmul(&fb.finv()));
    }

    #[test]
    fn miller_rabin() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(
            small,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(!is_prime_u64(3_215_031_751));
        assert!(is_prime_u64((1 << 61) - 1));
    }

    #[test]
    fn units() {
        assert_eq!(units_mod(3), vec![1, 2]);
        assert_eq!(units_mod(12), vec![1, 5, 7, 11]);
        assert_eq!(units_mod(1), vec![1]);
    }
}
