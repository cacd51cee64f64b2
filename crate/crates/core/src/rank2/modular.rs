//! Multi-modular reconstruction of an exact kernel vector.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{derivation_system, PlaneModel, Rank2Derivation};
use crate::field::{units_mod, Field, Fp, ModularEmbedding};
use crate::linalg;
use crate::scalar::Scalar;

const MAX_PRIMES: usize = 400;

/// Kernel vector of the degree-`d` system normalized at its first free
/// column, in every Galois conjugate embedding for one prime. Returns the
/// pivot columns and the vector images, one per conjugate.
fn images(model: &PlaneModel, d: usize, emb: &ModularEmbedding) -> Option<(Vec<usize>, Vec<Vec<Fp>>)> {
    let n = 2 * (d + 1);
    let mut pivots_seen: Option<Vec<usize>> = None;
    let mut out = Vec::new();
    for k in units_mod(model.order) {
        let e = emb.conjugate(k);
        let lines = model.map(&e)?;
        let mut rows = derivation_system(&lines, d, &e.zero());
        let pivots = linalg::rref(&mut rows);
        if pivots.len() == n {
            return None;
        }
        match &pivots_seen {
            Some(p) if *p != pivots => return None,
            _ => pivots_seen = Some(pivots.clone()),
        }
        let v = linalg::kernel_from_rref(&rows, &pivots, n, &e.zero())
            .into_iter()
            .next()?;
        out.push(v);
    }
    Some((pivots_seen?, out))
}

/// Power-basis coefficients mod p from the values under each conjugate.
fn power_basis(values: &[Fp], emb: &ModularEmbedding, order: u32) -> Option<Vec<Fp>> {
    let ks = units_mod(order);
    if ks.len() == 1 {
        return Some(values.to_vec());
    }
    let vander: Vec<Vec<Fp>> = ks
        .iter()
        .map(|&k| {
            let w = Fp::new(emb.conjugate(k).omega, emb.p);
            let mut row = Vec::with_capacity(ks.len());
            let mut acc = emb.one();
            for _ in 0..ks.len() {
                row.push(acc);
                acc = acc.fmul(&w);
            }
            row
        })
        .collect();
    linalg::solve(&vander, values)
}

fn rational_reconstruction(u: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), u.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(BigRational::new(r1, t1))
}

/// Reconstructs an exact nonzero solution of the degree-`d` system from its
/// images modulo successive primes. The result is only a candidate; callers
/// verify it by exact division.
pub(super) fn reconstruct_witness(model: &PlaneModel, d: usize, start: usize) -> Option<Rank2Derivation> {
    let order = model.order;
    let degree = units_mod(order).len();
    let n = 2 * (d + 1);
    let mut residues: Vec<BigInt> = Vec::new();
    let mut modulus = BigInt::one();
    let mut reference: Option<Vec<usize>> = None;
    let mut previous: Option<Vec<BigRational>> = None;
    let mut used = 0;
    for i in start..start + MAX_PRIMES {
        let emb = ModularEmbedding::nth(order, i);
        let Some((pivots, vals)) = images(model, d, &emb) else { continue };
        match &reference {
            Some(p) if *p != pivots => {
                // keep the pivot pattern with larger rank; ties keep the first
                if pivots.len() <= p.len() {
                    continue;
                }
                residues.clear();
                modulus = BigInt::one();
                previous = None;
                reference = Some(pivots);
            }
            None => reference = Some(pivots),
            _ => {}
        }
        let mut coeffs_mod_p = Vec::with_capacity(n * degree);
        for j in 0..n {
            let per_conj: Vec<Fp> = vals.iter().map(|v| v[j]).collect();
            coeffs_mod_p.extend(power_basis(&per_conj, &emb, order)?);
        }
        let p = BigInt::from(emb.p);
        if residues.is_empty() {
            residues = coeffs_mod_p.iter().map(|c| BigInt::from(c.value())).collect();
            modulus = p;
        } else {
            let m_mod_p = Fp::new((&modulus % &p).try_into().unwrap(), emb.p);
            let inv = m_mod_p.finv();
            for (r, c) in residues.iter_mut().zip(&coeffs_mod_p) {
                let r_mod_p = Fp::new((&*r % &p).try_into().unwrap(), emb.p);
                let t = c.fsub(&r_mod_p).fmul(&inv);
                *r += &modulus * BigInt::from(t.value());
            }
            modulus *= p;
        }
        used += 1;
        let rec: Option<Vec<BigRational>> = residues
            .iter()
            .map(|r| rational_reconstruction(r, &modulus))
            .collect();
        if let Some(rec) = rec {
            if used >= 2 && previous.as_ref() == Some(&rec) {
                let scalars: Vec<Scalar> = rec
                    .chunks(degree)
                    .map(|c| Scalar::from_coeffs(order, c.to_vec()).expect("valid order"))
                    .collect();
                let mut f1 = scalars;
                let f2 = f1.split_off(d + 1);
                return Some(Rank2Derivation { degree: d, f1, f2 });
            }
            previous = Some(rec);
        } else {
            previous = None;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_small_fractions() {
        let m = BigInt::from(1_000_000_007u64);
        for (a, b) in [(3i64, 7i64), (-22, 9), (0, 1), (5, 1)] {
            let inv_b = BigInt::from(b).modpow(&(&m - 2), &m);
            let u = (BigInt::from(a) * inv_b).mod_floor(&m);
            assert_eq!(
                rational_reconstruction(&u, &m),
                Some(BigRational::new(a.into(), b.into()))
            );
        }
    }
}
