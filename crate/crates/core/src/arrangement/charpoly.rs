use std::fmt;

use thiserror::Error;

use super::{intersection_lattice, Arrangement, Lattice};

/// Integer polynomial in t, constant term first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPoly(pub Vec<i64>);

impl CharPoly {
    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn eval(&self, t: i64) -> i64 {
        self.0.iter().rev().fold(0, |acc, &c| acc * t + c)
    }

    /// ∏ (t − e).
    pub fn from_roots(roots: &[u32]) -> CharPoly {
        let mut p = vec![1i64];
        for &e in roots {
            let mut next = vec![0i64; p.len() + 1];
            for (i, &c) in p.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * e as i64;
            }
            p = next;
        }
        CharPoly(p)
    }
}

impl fmt::Display for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.0.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            let a = c.unsigned_abs();
            let mono = match k {
                0 => a.to_string(),
                _ => {
                    let t = if k == 1 { "t".to_string() } else { format!("t^{k}") };
                    if a == 1 {
                        t
                    } else {
                        format!("{a}*{t}")
                    }
                }
            };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
                write!(f, "{mono}")?;
            } else {
                write!(f, " {sign} {mono}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Möbius values μ(V, X) for every flat, indexed like `lattice.flats()`.
pub fn mobius(lattice: &Lattice) -> Vec<i64> {
    let flats = lattice.flats();
    let words = flats
        .iter()
        .flat_map(|f| f.closed().iter().copied())
        .max()
        .map_or(1, |m| m / 64 + 1);
    let bits: Vec<Vec<u64>> = flats
        .iter()
        .map(|f| {
            let mut b = vec![0u64; words];
            for &h in f.closed() {
                b[h / 64] |= 1 << (h % 64);
            }
            b
        })
        .collect();
    let mut mu = vec![0i64; flats.len()];
    for x in 0..flats.len() {
        if flats[x].rank() == 0 {
            mu[x] = 1;
            continue;
        }
        let mut s = 0;
        for y in 0..x {
            if flats[y].rank() < flats[x].rank()
                && bits[y].iter().zip(&bits[x]).all(|(a, b)| a & !b == 0)
            {
                s += mu[y];
            }
        }
        mu[x] = -s;
    }
    mu
}

/// χ(A, t) = Σ_X μ(V, X) t^{dim X}.
pub fn characteristic_polynomial(arr: &Arrangement) -> CharPoly {
    let lattice = intersection_lattice(arr, None);
    let mu = mobius(&lattice);
    let mut coeffs = vec![0i64; arr.dim() + 1];
    for (f, m) in lattice.flats().iter().zip(mu) {
        coeffs[f.dim()] += m;
    }
    CharPoly(coeffs)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("characteristic polynomial {0} does not split over the nonnegative integers")]
pub struct NotSplitting(pub CharPoly);

/// Nonnegative integer roots of χ with multiplicity, sorted, when χ splits
/// completely into such linear factors.
pub fn free_exponents_from_charpoly(arr: &Arrangement) -> Result<Vec<u32>, NotSplitting> {
    split_nonnegative(&characteristic_polynomial(arr), arr.len() as u32)
}

pub(crate) fn split_nonnegative(chi: &CharPoly, bound: u32) -> Result<Vec<u32>, NotSplitting> {
    let mut p = chi.0.clone();
    let mut roots = Vec::new();
    let mut e = 0u32;
    while p.len() > 1 && e <= bound {
        // synthetic division by (t − e)
        let n = p.len() - 1;
        let mut q = vec![0i64; n];
        let mut carry = 0i64;
        for k in (0..=n).rev() {
            let v = p[k] + carry * e as i64;
            if k == 0 {
                carry = v;
            } else {
                q[k - 1] = v;
                carry = v;
            }
        }
        if carry == 0 {
            roots.push(e);
            p = q;
        } else {
            e += 1;
        }
    }
    if p.len() == 1 && p[0] == 1 {
        Ok(roots)
    } else {
        Err(NotSplitting(chi.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::arrangement_from_ints;
    use crate::catalog::{intermediate, IntermediateSpec};

    #[test]
    fn small_polynomials() {
        let boolean = arrangement_from_ints(&[&[1, 0], &[0, 1]]);
        assert_eq!(characteristic_polynomial(&boolean), CharPoly(vec![1, -2, 1]));
        assert_eq!(free_exponents_from_charpoly(&boolean), Ok(vec![1, 1]));
        let three = arrangement_from_ints(&[&[1, 0], &[0, 1], &[1, -1]]);
        assert_eq!(characteristic_polynomial(&three), CharPoly::from_roots(&[1, 2]));
        let empty = Arrangement::empty(2, 1);
        assert_eq!(free_exponents_from_charpoly(&empty), Ok(vec![0, 0]));
    }

    #[test]
    fn non_splitting() {
        let chi = CharPoly(vec![1, -3, 1]);
        assert!(split_nonnegative(&chi, 10).is_err());
        assert_eq!(chi.to_string(), "t^2 - 3*t + 1");
    }

    #[test]
    fn g333_and_a1_4() {
        let g333 = intermediate(IntermediateSpec::new(3, 3, 0).unwrap());
        assert_eq!(characteristic_polynomial(&g333), CharPoly::from_roots(&[1, 4, 4]));
        let a14 = intermediate(IntermediateSpec::new(3, 4, 1).unwrap());
        assert_eq!(free_exponents_from_charpoly(&a14), Ok(vec![1, 4, 7, 7]));
    }

    #[test]
    fn non_essential_has_zero_roots() {
        let a = arrangement_from_ints(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, 0]]);
        assert_eq!(free_exponents_from_charpoly(&a), Ok(vec![0, 1, 2]));
        assert_eq!(characteristic_polynomial(&a).eval(1), 0);
    }
}
