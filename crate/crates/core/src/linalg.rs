//! Gaussian elimination over any [`Field`].

use crate::field::Field;

/// Reduced row echelon form in place. Returns the pivot columns; zero rows
/// are dropped so `rows.len()` equals the rank afterwards.
pub fn rref<F: Field>(rows: &mut Vec<Vec<F>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut top = 0;
    for c in 0..ncols {
        if top == rows.len() {
            break;
        }
        let Some(p) = (top..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(top, p);
        let inv = rows[top][c].finv();
        if !inv.is_one() {
            for x in rows[top][c..].iter_mut() {
                *x = x.fmul(&inv);
            }
        }
        let pivot_row = rows[top].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == top || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for k in c..ncols {
                if !pivot_row[k].is_zero() {
                    row[k] = row[k].fsub(&pivot_row[k].fmul(&f));
                }
            }
        }
        pivots.push(c);
        top += 1;
    }
    rows.truncate(top);
    pivots
}

pub fn rank<F: Field>(rows: &[Vec<F>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Canonical kernel basis of the matrix with `ncols` columns: one vector per
/// free column `f`, with 1 at `f`, 0 at the other free columns and minus the
/// reduced entries at the pivots.
pub fn kernel<F: Field>(rows: &[Vec<F>], ncols: usize, zero: &F) -> Vec<Vec<F>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    kernel_from_rref(&m, &pivots, ncols, zero)
}

pub fn kernel_from_rref<F: Field>(
    reduced: &[Vec<F>],
    pivots: &[usize],
    ncols: usize,
    zero: &F,
) -> Vec<Vec<F>> {
    let mut is_pivot = vec![false; ncols];
    for &p in pivots {
        is_pivot[p] = true;
    }
    (0..ncols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![zero.clone(); ncols];
            v[f] = zero.one_like();
            for (row, &p) in reduced.iter().zip(pivots) {
                v[p] = row[f].fneg();
            }
            v
        })
        .collect()
}

/// Solves `A x = b` for a square invertible `A`; `None` when singular.
pub fn solve<F: Field>(a: &[Vec<F>], b: &[F]) -> Option<Vec<F>> {
    let n = a.len();
    let mut aug: Vec<Vec<F>> = a
        .iter()
        .zip(b)
        .map(|(row, x)| {
            let mut r = row.clone();
            r.push(x.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some(aug.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// Matrix inverse, `None` when singular.
pub fn inverse<F: Field>(a: &[Vec<F>]) -> Option<Vec<Vec<F>>> {
    let n = a.len();
    let zero = a.first()?.first()?.zero_like();
    let mut aug: Vec<Vec<F>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { zero.one_like() } else { zero.clone() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_vec<F: Field>(a: &[Vec<F>], x: &[F], zero: &F) -> Vec<F> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(zero.clone(), |acc, (u, v)| acc.fadd(&u.fmul(v)))
        })
        .collect()
}

pub fn dot<F: Field>(a: &[F], b: &[F], zero: &F) -> F {
    a.iter()
        .zip(b)
        .fold(zero.clone(), |acc, (u, v)| acc.fadd(&u.fmul(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fp;
    use crate::scalar::Scalar;
    use proptest::prelude::*;

    fn q(v: i64) -> Scalar {
        Scalar::from_int(1, v)
    }

    #[test]
    fn rref_small() {
        let mut m = vec![vec![q(2), q(4), q(2)], vec![q(1), q(2), q(3)]];
        let piv = rref(&mut m);
        assert_eq!(piv, vec![0, 2]);
        assert_eq!(m[0], vec![q(1), q(2), q(0)]);
        let k = kernel(&[vec![q(1), q(2), q(3)]], 3, &q(0));
        assert_eq!(k, vec![vec![q(-2), q(1), q(0)], vec![q(-3), q(0), q(1)]]);
    }

    #[test]
    fn inverse_and_solve() {
        let z = Scalar::zeta(3);
        let a = vec![
            vec![Scalar::one(3), z.clone()],
            vec![z.pow(2), Scalar::from_int(3, 2)],
        ];
        let inv = inverse(&a).unwrap();
        let x = solve(&a, &[Scalar::one(3), Scalar::zero(3)]).unwrap();
        assert_eq!(x, vec![inv[0][0].clone(), inv[1][0].clone()]);
        let singular = vec![vec![q(1), q(2)], vec![q(2), q(4)]];
        assert!(inverse(&singular).is_none());
    }

    proptest! {
        #[test]
        fn kernel_vectors_are_annihilated(
            entries in prop::collection::vec(0u64..7, 12),
            ncols in 2usize..5,
        ) {
            let p = 7;
            let nrows = entries.len() / ncols;
            let rows: Vec<Vec<Fp>> = (0..nrows)
                .map(|i| (0..ncols).map(|j| Fp::new(entries[i * ncols + j], p)).collect())
                .collect();
            let zero = Fp::new(0, p);
            let ker = kernel(&rows, ncols, &zero);
            prop_assert_eq!(ker.len() + rank(&rows), ncols);
            for v in &ker {
                prop_assert!(mat_vec(&rows, v, &zero).iter().all(|x| x.is_zero()));
            }
        }
    }
}
