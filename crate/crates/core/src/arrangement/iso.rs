use std::collections::HashMap;

use super::{intersection_lattice, Arrangement, LinearForm, MultiArrangement};
use crate::field::units_mod;
use crate::linalg;
use crate::scalar::Scalar;

/// A semilinear change of coordinates: first ζ ↦ ζ^galois on every
/// coefficient, then each form (as a row vector) is multiplied by `matrix`
/// and renormalized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateChange {
    pub galois: u32,
    pub matrix: Vec<Vec<Scalar>>,
}

impl CoordinateChange {
    pub fn identity(dim: usize, order: u32) -> CoordinateChange {
        CoordinateChange {
            galois: 1,
            matrix: (0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| if i == j { Scalar::one(order) } else { Scalar::zero(order) })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn transform(&self, form: &LinearForm) -> LinearForm {
        let f = form.galois(self.galois);
        let zero = Scalar::zero(f.order());
        let dim = self.matrix.len();
        let coeffs = (0..dim)
            .map(|j| {
                f.coeffs()
                    .iter()
                    .zip(&self.matrix)
                    .fold(zero.clone(), |acc, (a, row)| &acc + &(a * &row[j]))
            })
            .collect();
        LinearForm::new(coeffs).expect("coordinate change is invertible")
    }
}

/// Applies a coordinate change, keeping labels and multiplicities.
pub fn apply_coordinate_change(m: &MultiArrangement, change: &CoordinateChange) -> MultiArrangement {
    let arr = m.arrangement();
    let forms = arr.forms().iter().map(|f| change.transform(f)).collect();
    let arr = Arrangement::with_labels(arr.dim(), forms, arr.labels().to_vec())
        .expect("an invertible change keeps hyperplanes distinct");
    MultiArrangement::new(arr, m.mult().to_vec()).unwrap()
}

/// Per-hyperplane invariant: own multiplicity plus the sorted profile of
/// rank-2 flats through it.
fn signatures(m: &MultiArrangement) -> Vec<(u32, Vec<Vec<u32>>)> {
    let lat = intersection_lattice(m.arrangement(), Some(2));
    let mut sig: Vec<(u32, Vec<Vec<u32>>)> = m.mult().iter().map(|&k| (k, Vec::new())).collect();
    for f in lat.of_rank(2) {
        let mut profile: Vec<u32> = f.closed().iter().map(|&h| m.mult()[h]).collect();
        profile.sort_unstable();
        for &h in f.closed() {
            sig[h].1.push(profile.clone());
        }
    }
    for s in sig.iter_mut() {
        s.1.sort();
    }
    sig
}

/// Searches for a coordinate change carrying `from` onto `to` as
/// multiarrangements (forms matched up to scaling, multiplicities equal).
/// Tries the identity Galois action first, then the other conjugations.
pub fn find_isomorphism(from: &MultiArrangement, to: &MultiArrangement) -> Option<CoordinateChange> {
    let l = from.dim();
    if l != to.dim() || from.len() != to.len() || from.order() != to.order() || l == 0 {
        return None;
    }
    if from.rank() != l || to.rank() != l {
        return None;
    }
    let sig_to = signatures(to);
    let sig_from = signatures(from);
    let mut a = sig_from.clone();
    let mut b = sig_to.clone();
    a.sort();
    b.sort();
    if a != b {
        return None;
    }
    let order = match (from.arrangement().order(), to.arrangement().order()) {
        (1, r) | (r, 1) => r,
        (x, y) if x == y => x,
        _ => return None,
    };
    let target: HashMap<LinearForm, u32> = to
        .arrangement()
        .forms()
        .iter()
        .cloned()
        .zip(to.mult().iter().copied())
        .collect();
    for k in units_mod(order) {
        let forms: Vec<LinearForm> = from.arrangement().forms().iter().map(|f| f.galois(k)).collect();
        if let Some(matrix) = search_frames(&forms, from.mult(), &sig_from, to, &sig_to, &target) {
            return Some(CoordinateChange { galois: k, matrix });
        }
    }
    None
}

fn search_frames(
    forms: &[LinearForm],
    mult: &[u32],
    sig_from: &[(u32, Vec<Vec<u32>>)],
    to: &MultiArrangement,
    sig_to: &[(u32, Vec<Vec<u32>>)],
    target: &HashMap<LinearForm, u32>,
) -> Option<Vec<Vec<Scalar>>> {
    let l = forms[0].dim();
    let zero = Scalar::zero(forms[0].order());
    let mut class_size: HashMap<&(u32, Vec<Vec<u32>>), usize> = HashMap::new();
    for s in sig_from {
        *class_size.entry(s).or_default() += 1;
    }
    let mut order: Vec<usize> = (0..forms.len()).collect();
    order.sort_by_key(|&i| (class_size[&sig_from[i]], i));

    // frame: l independent forms, then one with all coordinates nonzero
    let mut frame: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for &i in &order {
        let mut trial = rows.clone();
        trial.push(forms[i].coeffs().to_vec());
        if linalg::rank(&trial) == trial.len() {
            rows = trial;
            frame.push(i);
            if frame.len() == l {
                break;
            }
        }
    }
    let a_inv = linalg::inverse(&transpose(&rows))?;
    let general = order.iter().copied().find(|&i| {
        !frame.contains(&i)
            && linalg::mat_vec(&a_inv, forms[i].coeffs(), &zero)
                .iter()
                .all(|c| !c.is_zero())
    })?;
    let c = linalg::mat_vec(&a_inv, forms[general].coeffs(), &zero);
    frame.push(general);

    let candidates: Vec<Vec<usize>> = frame
        .iter()
        .map(|&i| (0..to.len()).filter(|&j| sig_to[j] == sig_from[i]).collect())
        .collect();
    let to_forms = to.arrangement().forms();
    let mut chosen: Vec<usize> = Vec::new();
    dfs(
        &mut chosen,
        &candidates,
        l,
        to_forms,
        &mut |images: &[usize]| {
            let b_rows: Vec<Vec<Scalar>> = images[..l].iter().map(|&j| to_forms[j].coeffs().to_vec()).collect();
            let b_inv = linalg::inverse(&transpose(&b_rows))?;
            let d = linalg::mat_vec(&b_inv, to_forms[images[l]].coeffs(), &zero);
            if d.iter().any(|x| x.is_zero()) {
                return None;
            }
            // a_k G = λ_k b_k with λ_k = d_k / c_k, so G = A^{-1} Λ B
            let a_mat_inv = linalg::inverse(&rows)?;
            let lam_b: Vec<Vec<Scalar>> = (0..l)
                .map(|k| {
                    let lam = &d[k] / &c[k];
                    b_rows[k].iter().map(|x| &lam * x).collect()
                })
                .collect();
            let g: Vec<Vec<Scalar>> = (0..l)
                .map(|i| {
                    (0..l)
                        .map(|j| {
                            (0..l).fold(zero.clone(), |acc, k| &acc + &(&a_mat_inv[i][k] * &lam_b[k][j]))
                        })
                        .collect()
                })
                .collect();
            let change = CoordinateChange {
                galois: 1,
                matrix: g.clone(),
            };
            for (f, &m) in forms.iter().zip(mult) {
                if target.get(&change.transform(f)) != Some(&m) {
                    return None;
                }
            }
            Some(g)
        },
    )
}

fn dfs(
    chosen: &mut Vec<usize>,
    candidates: &[Vec<usize>],
    l: usize,
    to_forms: &[LinearForm],
    check: &mut dyn FnMut(&[usize]) -> Option<Vec<Vec<Scalar>>>,
) -> Option<Vec<Vec<Scalar>>> {
    if chosen.len() == candidates.len() {
        return check(chosen);
    }
    for &j in &candidates[chosen.len()] {
        if chosen.contains(&j) {
            continue;
        }
        if chosen.len() < l {
            let mut rows: Vec<Vec<Scalar>> = chosen.iter().map(|&i| to_forms[i].coeffs().to_vec()).collect();
            rows.push(to_forms[j].coeffs().to_vec());
            if linalg::rank(&rows) < rows.len() {
                continue;
            }
        }
        chosen.push(j);
        if let Some(g) = dfs(chosen, candidates, l, to_forms, check) {
            return Some(g);
        }
        chosen.pop();
    }
    None
}

fn transpose(m: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let n = m.first().map_or(0, Vec::len);
    (0..n).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{intermediate, IntermediateSpec};

    #[test]
    fn recovers_a_random_change() {
        let a = intermediate(IntermediateSpec::new(3, 3, 1).unwrap());
        let m = MultiArrangement::new(a.clone(), (0..a.len() as u32).map(|i| 1 + i % 2).collect()).unwrap();
        let p = |t: &str| Scalar::parse(t, 3).unwrap();
        let change = CoordinateChange {
            galois: 2,
            matrix: vec![
                vec![p("1"), p("z"), p("0")],
                vec![p("2"), p("0"), p("1")],
                vec![p("0"), p("1 - z"), p("3")],
            ],
        };
        let image = apply_coordinate_change(&m, &change);
        let found = find_isomorphism(&m, &image).expect("isomorphic");
        assert!(apply_coordinate_change(&m, &found).same_as(&image));
    }

    #[test]
    fn rejects_different_multiplicities() {
        let a = intermediate(IntermediateSpec::new(3, 3, 0).unwrap());
        let m1 = MultiArrangement::simple(a.clone());
        let mut mult = vec![1; a.len()];
        mult[0] = 2;
        mult[1] = 0;
        let m2 = MultiArrangement::new(a, mult).unwrap();
        assert!(find_isomorphism(&m1, &m2).is_none());
    }
}
