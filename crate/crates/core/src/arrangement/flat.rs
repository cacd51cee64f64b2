use std::collections::HashMap;

use rayon::prelude::*;

use super::{Arrangement, ArrangementError, LinearForm};
use crate::linalg;
use crate::scalar::Scalar;

/// An element of the intersection lattice.
///
/// `closed` lists every hyperplane containing the subspace. `basis` holds the
/// canonical spanning vectors of the subspace: one per free column of the
/// reduced echelon form of the defining equations, with a 1 in that column
/// and 0 in the other free columns.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Flat {
    closed: Vec<usize>,
    rank: usize,
    basis: Vec<Vec<Scalar>>,
    equations: Vec<Vec<Scalar>>,
}

impl Flat {
    /// The whole space V (rank 0).
    pub fn ambient(arr: &Arrangement) -> Flat {
        let zero = arr.zero();
        let basis = (0..arr.dim())
            .map(|i| {
                let mut v = vec![zero.clone(); arr.dim()];
                v[i] = Scalar::one(arr.order());
                v
            })
            .collect();
        Flat {
            closed: Vec::new(),
            rank: 0,
            basis,
            equations: Vec::new(),
        }
    }

    /// The intersection of the given hyperplanes, closed in `arr`.
    pub fn of_hyperplanes(arr: &Arrangement, indices: &[usize]) -> Result<Flat, ArrangementError> {
        let mut rows = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= arr.len() {
                return Err(ArrangementError::IndexOutOfRange(i));
            }
            rows.push(arr.form(i).coeffs().to_vec());
        }
        Ok(Flat::from_equations(arr, rows))
    }

    fn from_equations(arr: &Arrangement, mut rows: Vec<Vec<Scalar>>) -> Flat {
        let zero = arr.zero();
        let pivots = linalg::rref(&mut rows);
        let basis = linalg::kernel_from_rref(&rows, &pivots, arr.dim(), &zero);
        let closed = (0..arr.len())
            .filter(|&i| vanishes_on(arr.form(i), &basis, &zero))
            .collect();
        Flat {
            closed,
            rank: pivots.len(),
            basis,
            equations: rows,
        }
    }

    /// The flat X ∩ H for a hyperplane H of `arr`.
    pub fn meet(&self, arr: &Arrangement, h: usize) -> Flat {
        let mut rows = self.equations.clone();
        rows.push(arr.form(h).coeffs().to_vec());
        Flat::from_equations(arr, rows)
    }

    pub fn closed(&self) -> &[usize] {
        &self.closed
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// dim X = ℓ − rank X.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Spanning vectors of X, each of length ℓ.
    pub fn basis(&self) -> &[Vec<Scalar>] {
        &self.basis
    }

    /// Reduced echelon rows of the equations cutting out X.
    pub fn equations(&self) -> &[Vec<Scalar>] {
        &self.equations
    }

    pub fn contains_hyperplane(&self, h: usize) -> bool {
        self.closed.binary_search(&h).is_ok()
    }

    /// True when X ⊆ ker(form).
    pub fn lies_in(&self, form: &LinearForm) -> bool {
        let zero = Scalar::zero(form.order());
        vanishes_on(form, &self.basis, &zero)
    }

    /// Checks that this flat really is a closed flat of `arr`.
    pub fn validate(&self, arr: &Arrangement) -> Result<(), ArrangementError> {
        let again = Flat::of_hyperplanes(arr, &self.closed).map_err(|_| ArrangementError::NotAFlat)?;
        if again.closed == self.closed && again.basis == self.basis {
            Ok(())
        } else {
            Err(ArrangementError::NotAFlat)
        }
    }
}

fn vanishes_on(form: &LinearForm, basis: &[Vec<Scalar>], zero: &Scalar) -> bool {
    basis
        .iter()
        .all(|b| linalg::dot(form.coeffs(), b, zero).is_zero())
}

/// All flats of rank ≤ `max_rank`, in canonical order: by rank, then by the
/// sorted closed set.
#[derive(Clone, Debug)]
pub struct Lattice {
    flats: Vec<Flat>,
    rank_start: Vec<usize>,
    index: HashMap<Vec<usize>, usize>,
}

impl Lattice {
    pub fn flats(&self) -> &[Flat] {
        &self.flats
    }

    pub fn len(&self) -> usize {
        self.flats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flats.is_empty()
    }

    pub fn max_rank(&self) -> usize {
        self.rank_start.len() - 2
    }

    pub fn of_rank(&self, k: usize) -> &[Flat] {
        if k + 1 >= self.rank_start.len() {
            return &[];
        }
        &self.flats[self.rank_start[k]..self.rank_start[k + 1]]
    }

    /// Number of flats of each rank 0, 1, ….
    pub fn counts(&self) -> Vec<usize> {
        self.rank_start.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn position(&self, closed: &[usize]) -> Option<usize> {
        self.index.get(closed).copied()
    }
}

/// Builds the intersection lattice layer by layer: each flat of rank k is
/// met with every hyperplane not already covered by a child found from it.
pub fn intersection_lattice(arr: &Arrangement, max_rank: Option<usize>) -> Lattice {
    let top = max_rank.unwrap_or_else(|| arr.rank()).min(arr.dim());
    let mut flats = vec![Flat::ambient(arr)];
    let mut rank_start = vec![0, 1];
    let mut layer: Vec<Flat> = flats.clone();
    for _ in 0..top {
        let children: Vec<Vec<Flat>> = layer
            .par_iter()
            .map(|f| {
                let mut covered = vec![false; arr.len()];
                for &h in f.closed() {
                    covered[h] = true;
                }
                let mut out = Vec::new();
                for h in 0..arr.len() {
                    if covered[h] {
                        continue;
                    }
                    let g = f.meet(arr, h);
                    for &c in g.closed() {
                        covered[c] = true;
                    }
                    out.push(g);
                }
                out
            })
            .collect();
        let mut next: HashMap<Vec<usize>, Flat> = HashMap::new();
        for g in children.into_iter().flatten() {
            next.entry(g.closed.clone()).or_insert(g);
        }
        if next.is_empty() {
            break;
        }
        let mut next: Vec<Flat> = next.into_values().collect();
        next.sort_by(|a, b| a.closed.cmp(&b.closed));
        flats.extend(next.iter().cloned());
        rank_start.push(flats.len());
        layer = next;
    }
    let index = flats
        .iter()
        .enumerate()
        .map(|(i, f)| (f.closed.clone(), i))
        .collect();
    Lattice {
        flats,
        rank_start,
        index,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::arrangement_from_ints;
    use crate::catalog::{intermediate, IntermediateSpec};
    use std::collections::HashSet;

    #[test]
    fn small_lattices() {
        let boolean = arrangement_from_ints(&[&[1, 0], &[0, 1]]);
        assert_eq!(intersection_lattice(&boolean, None).counts(), vec![1, 2, 1]);
        let three = arrangement_from_ints(&[&[1, 0], &[0, 1], &[1, -1]]);
        let lat = intersection_lattice(&three, None);
        assert_eq!(lat.counts(), vec![1, 3, 1]);
        assert_eq!(lat.of_rank(2)[0].closed(), &[0, 1, 2]);
        assert_eq!(lat.of_rank(2)[0].dim(), 0);
    }

    #[test]
    fn echelon_basis_of_a_line() {
        let a = arrangement_from_ints(&[&[1, -1, 0], &[0, 1, -1], &[1, 0, -1]]);
        let x = Flat::of_hyperplanes(&a, &[0, 1]).unwrap();
        assert_eq!(x.closed(), &[0, 1, 2]);
        let one = Scalar::one(1);
        assert_eq!(x.basis(), &[vec![one.clone(), one.clone(), one]]);
        assert!(x.validate(&a).is_ok());
    }

    /// Every subset of hyperplanes, deduplicated by the subspace it cuts out.
    fn brute_force_counts(arr: &Arrangement) -> Vec<usize> {
        let n = arr.len();
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut counts = vec![0; arr.rank() + 1];
        for mask in 0u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let mut rows: Vec<Vec<Scalar>> = idx.iter().map(|&i| arr.form(i).coeffs().to_vec()).collect();
            let rank = linalg::rref(&mut rows).len();
            // canonical key: the reduced row space
            let key: Vec<usize> = (0..n)
                .filter(|&h| {
                    let mut r2 = rows.clone();
                    r2.push(arr.form(h).coeffs().to_vec());
                    linalg::rank(&r2) == rank
                })
                .collect();
            if seen.insert(key) {
                counts[rank] += 1;
            }
        }
        counts
    }

    #[test]
    fn g333_lattice_matches_subset_enumeration() {
        let a = intermediate(IntermediateSpec::new(3, 3, 0).unwrap());
        let lat = intersection_lattice(&a, None);
        assert_eq!(lat.counts(), brute_force_counts(&a));
        assert_eq!(lat.counts(), vec![1, 9, 12, 1]);
    }

    #[test]
    fn layers_are_canonical_and_closed() {
        let a = intermediate(IntermediateSpec::new(3, 3, 2).unwrap());
        let lat = intersection_lattice(&a, None);
        for k in 0..=lat.max_rank() {
            let layer = lat.of_rank(k);
            assert!(layer.windows(2).all(|w| w[0].closed() < w[1].closed()));
            for f in layer {
                assert_eq!(f.rank(), k);
                assert!(f.validate(&a).is_ok());
                for h in 0..a.len() {
                    assert_eq!(f.lies_in(a.form(h)), f.contains_hyperplane(h));
                }
            }
        }
        let capped = intersection_lattice(&a, Some(1));
        assert_eq!(capped.counts(), vec![1, a.len()]);
    }
}
