//! Central hyperplane arrangements and multiarrangements over ℚ(ζ_r).

mod charpoly;
mod flat;
mod iso;
mod restrict;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::linalg;
use crate::scalar::{Scalar, ScalarError};

pub use charpoly::{characteristic_polynomial, free_exponents_from_charpoly, CharPoly, NotSplitting};
pub use flat::{intersection_lattice, Flat, Lattice};
pub use iso::{apply_coordinate_change, find_isomorphism, CoordinateChange};
pub use restrict::{
    concentrated_multiplicity, essentialize, localization, product, restrict_to_hyperplane,
    restriction, ziegler_multiplicity, Restriction, ZieglerRestriction,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArrangementError {
    #[error("linear form is identically zero")]
    ZeroForm,
    #[error("expected {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("hyperplane {0} appears twice")]
    DuplicateHyperplane(usize),
    #[error("hyperplane index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("multiplicity vector has length {found}, arrangement has {expected} hyperplanes")]
    MultiplicityLength { expected: usize, found: usize },
    #[error("concentrated multiplicity must be at least 1")]
    ZeroConcentration,
    #[error("not a flat of this arrangement")]
    NotAFlat,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// A linear form normalized so that its first nonzero coefficient is 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LinearForm {
    coeffs: Vec<Scalar>,
}

impl LinearForm {
    pub fn new(coeffs: Vec<Scalar>) -> Result<LinearForm, ArrangementError> {
        let lead = coeffs
            .iter()
            .find(|c| !c.is_zero())
            .ok_or(ArrangementError::ZeroForm)?
            .clone();
        let order = common_order(coeffs.iter())?;
        let coeffs = if lead.is_one() {
            coeffs
        } else {
            let inv = lead.try_inv()?;
            coeffs.iter().map(|c| c.try_mul(&inv)).collect::<Result<_, _>>()?
        };
        Ok(LinearForm {
            coeffs: coeffs
                .into_iter()
                .map(|c| c.with_order(order))
                .collect::<Result<_, _>>()?,
        })
    }

    /// The coordinate form x_i (0-based) in dimension `dim`.
    pub fn coordinate(dim: usize, i: usize, order: u32) -> LinearForm {
        let mut c = vec![Scalar::zero(order); dim];
        c[i] = Scalar::one(order);
        LinearForm { coeffs: c }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn order(&self) -> u32 {
        self.coeffs[0].order()
    }

    /// Value of the form at a point.
    pub fn eval(&self, v: &[Scalar]) -> Scalar {
        linalg::dot(&self.coeffs, v, &Scalar::zero(self.order()))
    }

    /// ζ ↦ ζ^k applied to every coefficient.
    pub fn galois(&self, k: u32) -> LinearForm {
        LinearForm {
            coeffs: self.coeffs.iter().map(|c| c.galois(k)).collect(),
        }
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn common_order<'a>(it: impl Iterator<Item = &'a Scalar>) -> Result<u32, ArrangementError> {
    let mut order = 1;
    for s in it {
        match (order, s.order()) {
            (_, 1) => {}
            (1, r) => order = r,
            (a, b) if a == b => {}
            (a, b) => return Err(ScalarError::OrderMismatch(a, b).into()),
        }
    }
    Ok(order)
}

/// An ordered list of distinct hyperplanes with display labels.
#[derive(Clone, PartialEq, Eq)]
pub struct Arrangement {
    dim: usize,
    order: u32,
    forms: Vec<LinearForm>,
    labels: Vec<String>,
}

impl Arrangement {
    /// Builds an arrangement; labels default to `a1, a2, …`.
    pub fn new(dim: usize, forms: Vec<LinearForm>) -> Result<Arrangement, ArrangementError> {
        let labels = (1..=forms.len()).map(|i| format!("a{i}")).collect();
        Arrangement::with_labels(dim, forms, labels)
    }

    pub fn with_labels(
        dim: usize,
        forms: Vec<LinearForm>,
        labels: Vec<String>,
    ) -> Result<Arrangement, ArrangementError> {
        assert_eq!(forms.len(), labels.len(), "one label per hyperplane");
        let mut seen = HashMap::new();
        for (i, f) in forms.iter().enumerate() {
            if f.dim() != dim {
                return Err(ArrangementError::DimensionMismatch {
                    expected: dim,
                    found: f.dim(),
                });
            }
            if seen.insert(f, i).is_some() {
                return Err(ArrangementError::DuplicateHyperplane(i));
            }
        }
        let order = common_order(forms.iter().flat_map(|f| f.coeffs.iter()))?;
        let forms = forms
            .into_iter()
            .map(|f| LinearForm {
                coeffs: f
                    .coeffs
                    .into_iter()
                    .map(|c| c.with_order(order).expect("checked order"))
                    .collect(),
            })
            .collect();
        Ok(Arrangement {
            dim,
            order,
            forms,
            labels,
        })
    }

    /// The empty arrangement Φ_ℓ.
    pub fn empty(dim: usize, order: u32) -> Arrangement {
        Arrangement {
            dim,
            order,
            forms: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The root-of-unity order shared by all coefficients.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn forms(&self) -> &[LinearForm] {
        &self.forms
    }

    pub fn form(&self, i: usize) -> &LinearForm {
        &self.forms[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, form: &LinearForm) -> Option<usize> {
        self.forms.iter().position(|f| f == form)
    }

    /// Resolves a hyperplane by label, or by 1-based position when the
    /// text is a bare integer.
    pub fn find_label(&self, label: &str) -> Option<usize> {
        let t = label.trim();
        if let Some(i) = self.labels.iter().position(|l| l == t) {
            return Some(i);
        }
        let digits = t
            .strip_prefix('a')
            .or_else(|| t.strip_prefix('\u{3b1}'))
            .unwrap_or(t);
        match digits.parse::<usize>() {
            Ok(n) if n >= 1 && n <= self.len() => Some(n - 1),
            _ => None,
        }
    }

    pub fn zero(&self) -> Scalar {
        Scalar::zero(self.order)
    }

    /// Exact rank of the coefficient matrix.
    pub fn rank(&self) -> usize {
        let rows: Vec<Vec<Scalar>> = self.forms.iter().map(|f| f.coeffs.clone()).collect();
        linalg::rank(&rows)
    }

    /// The sub-arrangement on the given indices, kept in the given order.
    pub fn subarrangement(&self, indices: &[usize]) -> Arrangement {
        Arrangement {
            dim: self.dim,
            order: self.order,
            forms: indices.iter().map(|&i| self.forms[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }

    /// Re-expresses every coefficient in ℚ(ζ_r) for a larger `r`-compatible order.
    pub fn with_order(&self, order: u32) -> Result<Arrangement, ArrangementError> {
        let forms = self
            .forms
            .iter()
            .map(|f| {
                Ok(LinearForm {
                    coeffs: f
                        .coeffs
                        .iter()
                        .map(|c| c.with_order(order))
                        .collect::<Result<_, ScalarError>>()?,
                })
            })
            .collect::<Result<_, ArrangementError>>()?;
        Ok(Arrangement {
            dim: self.dim,
            order,
            forms,
            labels: self.labels.clone(),
        })
    }
}

impl fmt::Debug for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Arrangement")
            .field("dim", &self.dim)
            .field("order", &self.order)
            .field("forms", &self.forms)
            .finish()
    }
}

/// An arrangement together with a positive multiplicity on each hyperplane.
///
/// Hyperplanes of multiplicity zero are dropped on construction.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiArrangement {
    arrangement: Arrangement,
    mult: Vec<u32>,
}

impl MultiArrangement {
    pub fn new(arrangement: Arrangement, mult: Vec<u32>) -> Result<MultiArrangement, ArrangementError> {
        if mult.len() != arrangement.len() {
            return Err(ArrangementError::MultiplicityLength {
                expected: arrangement.len(),
                found: mult.len(),
            });
        }
        if mult.iter().all(|&m| m > 0) {
            return Ok(MultiArrangement { arrangement, mult });
        }
        let keep: Vec<usize> = (0..mult.len()).filter(|&i| mult[i] > 0).collect();
        Ok(MultiArrangement {
            arrangement: arrangement.subarrangement(&keep),
            mult: keep.iter().map(|&i| mult[i]).collect(),
        })
    }

    /// The simple multiplicity 𝟙.
    pub fn simple(arrangement: Arrangement) -> MultiArrangement {
        let mult = vec![1; arrangement.len()];
        MultiArrangement { arrangement, mult }
    }

    pub fn arrangement(&self) -> &Arrangement {
        &self.arrangement
    }

    pub fn mult(&self) -> &[u32] {
        &self.mult
    }

    pub fn len(&self) -> usize {
        self.mult.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mult.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.arrangement.dim
    }

    /// |μ| = Σ μ(H).
    pub fn order(&self) -> u64 {
        self.mult.iter().map(|&m| m as u64).sum()
    }

    pub fn rank(&self) -> usize {
        self.arrangement.rank()
    }

    pub fn is_simple(&self) -> bool {
        self.mult.iter().all(|&m| m == 1)
    }

    /// Localization to the hyperplanes with the given indices.
    pub fn sub(&self, indices: &[usize]) -> MultiArrangement {
        MultiArrangement {
            arrangement: self.arrangement.subarrangement(indices),
            mult: indices.iter().map(|&i| self.mult[i]).collect(),
        }
    }

    /// Same multiarrangement with the hyperplanes reordered so the forms are
    /// sorted; used for order-independent comparison.
    pub fn canonical_pairs(&self) -> Vec<(LinearForm, u32)> {
        let mut v: Vec<(LinearForm, u32)> = self
            .arrangement
            .forms
            .iter()
            .cloned()
            .zip(self.mult.iter().copied())
            .collect();
        v.sort_by_cached_key(|(f, _)| f.to_string());
        v
    }

    /// Equality as multiarrangements, ignoring hyperplane order and labels.
    pub fn same_as(&self, other: &MultiArrangement) -> bool {
        self.dim() == other.dim() && self.canonical_pairs() == other.canonical_pairs()
    }
}

impl fmt::Debug for MultiArrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiArrangement")
            .field("dim", &self.dim())
            .field("forms", &self.arrangement.forms)
            .field("mult", &self.mult)
            .finish()
    }
}

/// Convenience constructor for tests and examples: integer coefficient rows.
pub fn arrangement_from_ints(rows: &[&[i64]]) -> Arrangement {
    let dim = rows.first().map_or(0, |r| r.len());
    let forms = rows
        .iter()
        .map(|r| LinearForm::new(r.iter().map(|&v| Scalar::from_int(1, v)).collect()).unwrap())
        .collect();
    Arrangement::new(dim, forms).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms_are_normalized() {
        let f = LinearForm::new(vec![
            Scalar::from_int(3, 0),
            Scalar::from_int(3, 2),
            Scalar::zeta(3),
        ])
        .unwrap();
        assert!(f.coeffs()[1].is_one());
        assert_eq!(f.coeffs()[2], Scalar::parse("1/2*z", 3).unwrap());
        assert_eq!(
            LinearForm::new(vec![Scalar::zero(1)]),
            Err(ArrangementError::ZeroForm)
        );
    }

    #[test]
    fn duplicates_rejected_after_normalization() {
        let a = LinearForm::new(vec![Scalar::from_int(1, 1), Scalar::from_int(1, 2)]).unwrap();
        let b = LinearForm::new(vec![Scalar::from_int(1, -2), Scalar::from_int(1, -4)]).unwrap();
        assert_eq!(
            Arrangement::new(2, vec![a, b]).unwrap_err(),
            ArrangementError::DuplicateHyperplane(1)
        );
    }

    #[test]
    fn zero_multiplicities_are_dropped() {
        let a = arrangement_from_ints(&[&[1, 0], &[0, 1], &[1, -1]]);
        let m = MultiArrangement::new(a, vec![2, 0, 1]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.order(), 3);
        assert_eq!(m.arrangement().labels(), &["a1", "a3"]);
    }

    #[test]
    fn labels_resolve() {
        let a = arrangement_from_ints(&[&[1, 0], &[0, 1]]);
        assert_eq!(a.find_label("a2"), Some(1));
        assert_eq!(a.find_label("1"), Some(0));
        assert_eq!(a.find_label("\u{3b1}2"), Some(1));
        assert_eq!(a.find_label("3"), None);
        assert_eq!(a.rank(), 2);
    }
}
