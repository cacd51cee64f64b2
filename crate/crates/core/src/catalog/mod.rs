//! The intermediate arrangements A^k_ℓ(r), their exponents and restriction
//! types, and the shipped fixtures.

mod fixture;
pub mod tables;

use thiserror::Error;

use crate::arrangement::{Arrangement, LinearForm};
use crate::scalar::Scalar;

pub use fixture::{fixture_path, fixtures_dir, load_fixture, parse_fixture, write_fixture, FixtureError, FIXTURES};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("invalid intermediate spec r={r}, l={l}, k={k}: need r >= 2, l >= 2, 0 <= k <= l")]
    InvalidSpec { r: u32, l: usize, k: usize },
    #[error("hyperplane index {0} is not in the arrangement")]
    NotInArrangement(usize),
    #[error("restriction of a rank-{0} intermediate arrangement is not an intermediate arrangement")]
    TooSmall(usize),
    #[error("cannot parse spec string '{0}': expected A:r:l:k")]
    BadSpecString(String),
}

/// Parameters (r, ℓ, k) of A^k_ℓ(r).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntermediateSpec {
    pub r: u32,
    pub l: usize,
    pub k: usize,
}

impl IntermediateSpec {
    pub fn new(r: u32, l: usize, k: usize) -> Result<IntermediateSpec, CatalogError> {
        if r < 2 || l < 2 || k > l {
            return Err(CatalogError::InvalidSpec { r, l, k });
        }
        Ok(IntermediateSpec { r, l, k })
    }

    /// Parses `A:r:ℓ:k`.
    pub fn parse(text: &str) -> Result<IntermediateSpec, CatalogError> {
        let bad = || CatalogError::BadSpecString(text.to_string());
        let parts: Vec<&str> = text.trim().split(':').collect();
        if parts.len() != 4 || parts[0] != "A" {
            return Err(bad());
        }
        let r = parts[1].parse().map_err(|_| bad())?;
        let l = parts[2].parse().map_err(|_| bad())?;
        let k = parts[3].parse().map_err(|_| bad())?;
        IntermediateSpec::new(r, l, k)
    }

    /// k + r·ℓ(ℓ−1)/2.
    pub fn size(&self) -> usize {
        self.k + self.r as usize * self.l * (self.l - 1) / 2
    }

    /// Order of the scalars used; r = 2 needs no extension.
    pub fn scalar_order(&self) -> u32 {
        if self.r <= 2 {
            1
        } else {
            self.r
        }
    }
}

impl std::fmt::Display for IntermediateSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "A:{}:{}:{}", self.r, self.l, self.k)
    }
}

/// ζ^n in the scalar field of the spec.
fn root_power(spec: &IntermediateSpec, n: u32) -> Scalar {
    match spec.r {
        1 => Scalar::one(1),
        2 => Scalar::from_int(1, if n % 2 == 0 { 1 } else { -1 }),
        r => Scalar::zeta_pow(r, n as u64),
    }
}

fn power_label(n: u32) -> String {
    match n {
        0 => "1".into(),
        1 => "z".into(),
        n => format!("z^{n}"),
    }
}

/// What a hyperplane of A^k_ℓ(r) is, with 1-based coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntermediateHyperplane {
    /// x_i
    Coordinate(usize),
    /// x_i − ζ^n x_j with i < j
    Difference(usize, usize, u32),
}

/// The hyperplanes of A^k_ℓ(r) in generator order: x_1, …, x_k, then
/// x_i − ζ^n x_j for i < j (lexicographic) and n = 0, …, r − 1.
pub fn intermediate_hyperplanes(spec: IntermediateSpec) -> Vec<IntermediateHyperplane> {
    let mut out: Vec<IntermediateHyperplane> = (1..=spec.k).map(IntermediateHyperplane::Coordinate).collect();
    for i in 1..=spec.l {
        for j in i + 1..=spec.l {
            for n in 0..spec.r {
                out.push(IntermediateHyperplane::Difference(i, j, n));
            }
        }
    }
    out
}

/// A^k_ℓ(r) with labels `H_i` and `H_{i,j}(ζ^n)` written `H_{1,2}(1)`,
/// `H_{1,2}(z)`, `H_{1,2}(z^2)`.
pub fn intermediate(spec: IntermediateSpec) -> Arrangement {
    let order = spec.scalar_order();
    let mut forms = Vec::new();
    let mut labels = Vec::new();
    for h in intermediate_hyperplanes(spec) {
        match h {
            IntermediateHyperplane::Coordinate(i) => {
                forms.push(LinearForm::coordinate(spec.l, i - 1, order));
                labels.push(format!("H_{i}"));
            }
            IntermediateHyperplane::Difference(i, j, n) => {
                let mut c = vec![Scalar::zero(order); spec.l];
                c[i - 1] = Scalar::one(order);
                c[j - 1] = -root_power(&spec, n);
                forms.push(LinearForm::new(c).expect("nonzero"));
                labels.push(format!("H_{{{i},{j}}}({})", power_label(n)));
            }
        }
    }
    Arrangement::with_labels(spec.l, forms, labels).expect("generator forms are distinct")
}

/// {1, r + 1, …, (ℓ − 2)r + 1, (ℓ − 1)r − ℓ + k + 1}, sorted.
pub fn expected_exponents(spec: IntermediateSpec) -> Vec<u32> {
    let (r, l, k) = (spec.r as i64, spec.l as i64, spec.k as i64);
    let mut e: Vec<u32> = (0..l - 1).map(|i| (i * r + 1) as u32).collect();
    e.push(((l - 1) * r - l + k + 1) as u32);
    e.sort_unstable();
    e
}

/// Type of the restriction of A^k_ℓ(r) to its hyperplane with index `h`.
pub fn restriction_type(spec: IntermediateSpec, h: usize) -> Result<IntermediateSpec, CatalogError> {
    let hs = intermediate_hyperplanes(spec);
    let hyperplane = *hs.get(h).ok_or(CatalogError::NotInArrangement(h))?;
    if spec.l < 3 {
        return Err(CatalogError::TooSmall(spec.l));
    }
    let (l, k) = (spec.l, spec.k);
    let k_new = if k == 0 {
        1
    } else if k == l {
        l - 1
    } else {
        match hyperplane {
            IntermediateHyperplane::Coordinate(_) => l - 1,
            IntermediateHyperplane::Difference(_, j, _) if j <= k => k - 1,
            IntermediateHyperplane::Difference(i, j, _) if i <= k && k < j => k,
            IntermediateHyperplane::Difference(..) => k + 1,
        }
    };
    IntermediateSpec::new(spec.r, l - 1, k_new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::{characteristic_polynomial, restrict_to_hyperplane, CharPoly};

    #[test]
    fn sizes() {
        assert_eq!(intermediate(IntermediateSpec::new(3, 3, 0).unwrap()).len(), 9);
        assert_eq!(intermediate(IntermediateSpec::new(3, 4, 1).unwrap()).len(), 19);
        assert_eq!(intermediate(IntermediateSpec::new(3, 3, 3).unwrap()).len(), 12);
        assert!(IntermediateSpec::new(3, 3, 4).is_err());
    }

    #[test]
    fn labels() {
        let a = intermediate(IntermediateSpec::new(3, 3, 1).unwrap());
        assert_eq!(a.label(0), "H_1");
        assert_eq!(a.label(1), "H_{1,2}(1)");
        assert_eq!(a.label(2), "H_{1,2}(z)");
        assert_eq!(a.label(3), "H_{1,2}(z^2)");
        assert_eq!(a.find_label("H_{2,3}(z)"), Some(8));
    }

    #[test]
    fn exponent_formula() {
        assert_eq!(expected_exponents(IntermediateSpec::new(3, 4, 1).unwrap()), vec![1, 4, 7, 7]);
        assert_eq!(expected_exponents(IntermediateSpec::new(3, 3, 0).unwrap()), vec![1, 4, 4]);
        for r in 2..5 {
            for l in 2..6 {
                let s = IntermediateSpec::new(r, l, l).unwrap();
                let want: Vec<u32> = (0..l as u32).map(|i| i * r + 1).collect();
                assert_eq!(expected_exponents(s), want);
                for k in 0..=l {
                    let s = IntermediateSpec::new(r, l, k).unwrap();
                    assert_eq!(expected_exponents(s).iter().sum::<u32>() as usize, s.size());
                }
            }
        }
    }

    #[test]
    fn spec_strings() {
        assert_eq!(IntermediateSpec::parse("A:3:4:1").unwrap(), IntermediateSpec::new(3, 4, 1).unwrap());
        assert!(IntermediateSpec::parse("B:3:4:1").is_err());
        assert!(IntermediateSpec::parse("A:3:4").is_err());
    }

    #[test]
    fn restriction_types_match_computed_restrictions() {
        for r in 2..=3 {
            for l in 3..=4 {
                for k in 0..=l {
                    let spec = IntermediateSpec::new(r, l, k).unwrap();
                    let a = intermediate(spec);
                    for h in 0..a.len() {
                        let t = restriction_type(spec, h).unwrap();
                        let res = restrict_to_hyperplane(&a, h).arrangement;
                        assert_eq!(res.len(), t.size(), "{spec} at {}", a.label(h));
                        if l == 3 {
                            assert_eq!(
                                characteristic_polynomial(&res),
                                CharPoly::from_roots(&expected_exponents(t))
                            );
                        }
                    }
                }
            }
        }
    }
}
