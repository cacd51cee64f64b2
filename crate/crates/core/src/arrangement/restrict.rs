use std::collections::HashMap;

use super::{Arrangement, ArrangementError, Flat, LinearForm, MultiArrangement};
use crate::linalg;
use crate::scalar::Scalar;

/// A_X: the hyperplanes containing X, in the ambient space.
pub fn localization(arr: &Arrangement, x: &Flat) -> Result<Arrangement, ArrangementError> {
    x.validate(arr)?;
    Ok(arr.subarrangement(x.closed()))
}

/// The same multiarrangement on V / (center), so that its rank equals its
/// dimension. Forms are written in the reduced basis of the annihilator of
/// the center; labels and multiplicities are kept.
pub fn essentialize(m: &MultiArrangement) -> MultiArrangement {
    let arr = m.arrangement();
    let all: Vec<usize> = (0..arr.len()).collect();
    let center = Flat::of_hyperplanes(arr, &all).expect("indices in range");
    let pivots: Vec<usize> = center
        .equations()
        .iter()
        .map(|row| row.iter().position(|c| !c.is_zero()).expect("reduced rows are nonzero"))
        .collect();
    let forms = arr
        .forms()
        .iter()
        .map(|f| LinearForm::new(pivots.iter().map(|&j| f.coeffs()[j].clone()).collect()).expect("form is nonzero on the quotient"))
        .collect();
    let ess = Arrangement::with_labels(pivots.len(), forms, arr.labels().to_vec())
        .expect("distinct forms stay distinct on the quotient");
    MultiArrangement::new(ess, m.mult().to_vec()).expect("same length")
}

/// A^X with the map from parent hyperplanes to restricted ones.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub arrangement: Arrangement,
    /// `trace[i]` is the restricted hyperplane under parent hyperplane `i`,
    /// or `None` when `i` contains X.
    pub trace: Vec<Option<usize>>,
}

impl Restriction {
    /// Parent hyperplanes lying over restricted hyperplane `y`.
    pub fn preimage(&self, y: usize) -> Vec<usize> {
        (0..self.trace.len())
            .filter(|&i| self.trace[i] == Some(y))
            .collect()
    }
}

/// Restricts to X in the coordinates given by the canonical basis of X.
/// Restricted hyperplanes are numbered in order of first appearance and
/// labelled after their first parent.
pub fn restriction(arr: &Arrangement, x: &Flat) -> Result<Restriction, ArrangementError> {
    x.validate(arr)?;
    Ok(restriction_unchecked(arr, x))
}

pub(crate) fn restriction_unchecked(arr: &Arrangement, x: &Flat) -> Restriction {
    let zero = arr.zero();
    let mut forms: Vec<LinearForm> = Vec::new();
    let mut labels = Vec::new();
    let mut seen: HashMap<LinearForm, usize> = HashMap::new();
    let mut trace = vec![None; arr.len()];
    for (i, f) in arr.forms().iter().enumerate() {
        if x.contains_hyperplane(i) {
            continue;
        }
        let coeffs: Vec<Scalar> = x
            .basis()
            .iter()
            .map(|b| linalg::dot(f.coeffs(), b, &zero))
            .collect();
        let g = LinearForm::new(coeffs).expect("hyperplane not containing X restricts to a nonzero form");
        let next = forms.len();
        let y = *seen.entry(g.clone()).or_insert_with(|| {
            forms.push(g);
            labels.push(arr.label(i).to_string());
            next
        });
        trace[i] = Some(y);
    }
    let arrangement = Arrangement::with_labels(x.dim(), forms, labels)
        .expect("restricted forms are distinct and share the dimension");
    Restriction { arrangement, trace }
}

/// Restriction to the hyperplane with index `h0`.
pub fn restrict_to_hyperplane(arr: &Arrangement, h0: usize) -> Restriction {
    let x = Flat::of_hyperplanes(arr, &[h0]).expect("index in range");
    restriction_unchecked(arr, &x)
}

/// (A^{H0}, κ) together with the trace map.
#[derive(Clone, Debug)]
pub struct ZieglerRestriction {
    pub multi: MultiArrangement,
    pub trace: Vec<Option<usize>>,
}

/// Ziegler multiplicity: κ(Y) counts the parent hyperplanes other than H0
/// that restrict to Y.
pub fn ziegler_multiplicity(arr: &Arrangement, h0: usize) -> Result<ZieglerRestriction, ArrangementError> {
    if h0 >= arr.len() {
        return Err(ArrangementError::IndexOutOfRange(h0));
    }
    let res = restrict_to_hyperplane(arr, h0);
    let mut kappa = vec![0u32; res.arrangement.len()];
    for y in res.trace.iter().flatten() {
        kappa[*y] += 1;
    }
    Ok(ZieglerRestriction {
        multi: MultiArrangement::new(res.arrangement, kappa)?,
        trace: res.trace,
    })
}

/// δ: multiplicity `m0` on H0 and 1 elsewhere.
pub fn concentrated_multiplicity(
    arr: &Arrangement,
    h0: usize,
    m0: u32,
) -> Result<MultiArrangement, ArrangementError> {
    if h0 >= arr.len() {
        return Err(ArrangementError::IndexOutOfRange(h0));
    }
    if m0 < 1 {
        return Err(ArrangementError::ZeroConcentration);
    }
    let mut mult = vec![1; arr.len()];
    mult[h0] = m0;
    MultiArrangement::new(arr.clone(), mult)
}

/// Block product in dimension ℓ1 + ℓ2.
pub fn product(m1: &MultiArrangement, m2: &MultiArrangement) -> MultiArrangement {
    let (l1, l2) = (m1.dim(), m2.dim());
    let order = match (m1.arrangement().order(), m2.arrangement().order()) {
        (1, r) | (r, 1) => r,
        (a, b) if a == b => a,
        (a, b) => panic!("cannot form a product of orders {a} and {b}"),
    };
    let zero = Scalar::zero(order);
    let mut forms = Vec::new();
    let mut labels = Vec::new();
    for (f, l) in m1.arrangement().forms().iter().zip(m1.arrangement().labels()) {
        let mut c = f.coeffs().to_vec();
        c.extend(std::iter::repeat(zero.clone()).take(l2));
        forms.push(LinearForm::new(c).unwrap());
        labels.push(l.clone());
    }
    for (f, l) in m2.arrangement().forms().iter().zip(m2.arrangement().labels()) {
        let mut c = vec![zero.clone(); l1];
        c.extend(f.coeffs().iter().cloned());
        forms.push(LinearForm::new(c).unwrap());
        labels.push(l.clone());
    }
    let mut mult = m1.mult().to_vec();
    mult.extend_from_slice(m2.mult());
    let arr = Arrangement::with_labels(l1 + l2, forms, labels).expect("blocks are disjoint");
    MultiArrangement::new(arr, mult).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::{arrangement_from_ints, intersection_lattice};
    use crate::catalog::{intermediate, IntermediateSpec};

    #[test]
    fn boolean_restriction() {
        let a = arrangement_from_ints(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let x = Flat::of_hyperplanes(&a, &[2]).unwrap();
        let r = restriction(&a, &x).unwrap();
        assert_eq!(r.arrangement.len(), 2);
        assert_eq!(r.trace, vec![Some(0), Some(1), None]);
        let z = ziegler_multiplicity(&a, 2).unwrap();
        assert_eq!(z.multi.mult(), &[1, 1]);
        assert_eq!(z.multi.order(), 2);
    }

    #[test]
    fn localizations() {
        let a = arrangement_from_ints(&[&[1, 0], &[0, 1]]);
        let lat = intersection_lattice(&a, None);
        assert!(localization(&a, &lat.flats()[0]).unwrap().is_empty());
        assert_eq!(localization(&a, &lat.flats()[1]).unwrap().len(), 1);
        assert_eq!(localization(&a, &lat.flats()[3]).unwrap().len(), 2);
    }

    #[test]
    fn essentialized_localization_is_g333() {
        // G(3,3,3) sits inside G(3,3,4) as the localization at x1 = x2 = x3
        let arr = intermediate(IntermediateSpec::new(3, 4, 0).unwrap());
        let idx: Vec<usize> = (0..arr.len()).filter(|&i| arr.form(i).coeffs()[3].is_zero()).collect();
        let local = MultiArrangement::simple(arr.subarrangement(&idx));
        assert_eq!(local.rank(), 3);
        let ess = essentialize(&local);
        assert_eq!((ess.dim(), ess.rank(), ess.len()), (3, 3, 9));
        let g333 = MultiArrangement::simple(intermediate(IntermediateSpec::new(3, 3, 0).unwrap()));
        assert!(crate::arrangement::find_isomorphism(&ess, &g333).is_some());
    }

    #[test]
    fn restriction_rejects_foreign_flat() {
        let a = arrangement_from_ints(&[&[1, 0], &[0, 1]]);
        let b = arrangement_from_ints(&[&[1, 1], &[0, 1]]);
        let x = Flat::of_hyperplanes(&b, &[0]).unwrap();
        assert!(restriction(&a, &x).is_err());
    }

    #[test]
    fn g333_restricts_to_a1_type() {
        let a = intermediate(IntermediateSpec::new(3, 4, 0).unwrap());
        for h in 0..a.len() {
            let z = ziegler_multiplicity(&a, h).unwrap();
            assert_eq!(z.multi.len(), 10);
            assert_eq!(z.multi.order(), 17);
        }
    }

    #[test]
    fn concentrated_and_product() {
        let a = arrangement_from_ints(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(concentrated_multiplicity(&a, 0, 4).unwrap().order(), 6);
        assert!(concentrated_multiplicity(&a, 0, 1).unwrap().is_simple());
        assert!(concentrated_multiplicity(&a, 0, 0).is_err());
        let three = MultiArrangement::simple(arrangement_from_ints(&[&[1, 0], &[0, 1], &[1, 1]]));
        let line = MultiArrangement::new(arrangement_from_ints(&[&[1]]), vec![2]).unwrap();
        let p = product(&three, &line);
        assert_eq!((p.dim(), p.len(), p.order()), (3, 4, 5));
        let empty = MultiArrangement::simple(Arrangement::empty(1, 1));
        let q = product(&empty, &line);
        assert_eq!(q.arrangement().form(0).coeffs()[1], Scalar::one(1));
    }
}
