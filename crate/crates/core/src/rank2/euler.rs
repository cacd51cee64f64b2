use rayon::prelude::*;

use super::{Rank2Cache, Rank2Error};
use crate::arrangement::{restrict_to_hyperplane, MultiArrangement};

/// Data behind one value μ*(Y).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalEuler {
    /// Indices (in the parent) of the hyperplanes containing H0 ∩ Y, H0 first.
    pub local: Vec<usize>,
    pub exp_full: [u64; 2],
    pub exp_deleted: [u64; 2],
    pub value: u32,
}

/// (A'', μ*) with the trace map and the local computations.
#[derive(Clone, Debug)]
pub struct EulerRestriction {
    pub multi: MultiArrangement,
    pub trace: Vec<Option<usize>>,
    pub locals: Vec<LocalEuler>,
}

/// (A', μ'): μ(H0) decremented, H0 removed when it reaches zero.
pub fn euler_deletion(m: &MultiArrangement, h0: usize) -> Result<MultiArrangement, Rank2Error> {
    if h0 >= m.len() {
        return Err(Rank2Error::NotInSupport(h0));
    }
    let mut mult = m.mult().to_vec();
    mult[h0] -= 1;
    Ok(MultiArrangement::new(m.arrangement().clone(), mult)?)
}

/// The value left unchanged when `f` is `e` with one entry lowered by one.
pub(crate) fn common_value(e: [u64; 2], f: [u64; 2]) -> Option<u64> {
    for i in 0..2 {
        if e[i] == 0 {
            continue;
        }
        let mut dec = e;
        dec[i] -= 1;
        dec.sort_unstable();
        if dec == f {
            return Some(e[1 - i]);
        }
    }
    None
}

pub fn euler_multiplicity(m: &MultiArrangement, h0: usize) -> Result<EulerRestriction, Rank2Error> {
    euler_multiplicity_cached(m, h0, &Rank2Cache::new())
}

/// Euler multiplicity on the restriction to H0: for each restricted
/// hyperplane Y, μ*(Y) is the exponent of (A_X, μ_X) that survives deletion
/// of H0, where X = H0 ∩ Y.
pub fn euler_multiplicity_cached(
    m: &MultiArrangement,
    h0: usize,
    cache: &Rank2Cache,
) -> Result<EulerRestriction, Rank2Error> {
    if h0 >= m.len() {
        return Err(Rank2Error::NotInSupport(h0));
    }
    let res = restrict_to_hyperplane(m.arrangement(), h0);
    let count = res.arrangement.len();
    let locals: Vec<Result<LocalEuler, Rank2Error>> = (0..count)
        .into_par_iter()
        .map(|y| {
            let mut local = vec![h0];
            local.extend(res.preimage(y));
            let mx = m.sub(&local);
            let exp_full = cache.exponents(&mx)?;
            let exp_deleted = cache.exponents(&euler_deletion(&mx, 0)?)?;
            let value = common_value(exp_full, exp_deleted).ok_or(Rank2Error::NoCommonExponent {
                y,
                e: exp_full,
                f: exp_deleted,
            })?;
            Ok(LocalEuler {
                local,
                exp_full,
                exp_deleted,
                value: value as u32,
            })
        })
        .collect();
    let locals = locals.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mult = locals.iter().map(|l| l.value).collect();
    Ok(EulerRestriction {
        multi: MultiArrangement::new(res.arrangement, mult)?,
        trace: res.trace,
        locals,
    })
}

/// Shapes of a local pencil (k lines, H0 with multiplicity m0) where μ*(X)
/// has a closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FastPath {
    /// k = 2: μ* is the other multiplicity.
    TwoLines,
    /// |μ_X| ≤ 2k − 1 and m0 > 1: μ* = k − 1.
    LowOrder,
    /// μ_X ≡ 2: μ* = k.
    AllDouble,
}

/// Closed-form values of μ*(X) that apply to this pencil.
pub fn euler_fast_paths(m0: u32, others: &[u32]) -> Vec<(FastPath, u32)> {
    let k = others.len() as u32 + 1;
    let m1 = others.iter().copied().max().unwrap_or(0);
    let total: u32 = m0 + others.iter().sum::<u32>();
    let mut out = Vec::new();
    if k == 2 {
        out.push((FastPath::TwoLines, m1));
    }
    if total <= 2 * k - 1 && m0 > 1 {
        out.push((FastPath::LowOrder, k - 1));
    }
    if m0 == 2 && others.iter().all(|&v| v == 2) {
        out.push((FastPath::AllDouble, k));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::{arrangement_from_ints, MultiArrangement};

    fn pencil(mults: Vec<u32>) -> MultiArrangement {
        let rows: Vec<Vec<i64>> = (0..mults.len() as i64)
            .map(|i| if i == 0 { vec![1, 0, 0] } else { vec![i - 1, 1, 0] })
            .collect();
        let mut rows = rows;
        rows.push(vec![0, 0, 1]);
        let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
        let mut m = mults;
        m.push(1);
        MultiArrangement::new(arrangement_from_ints(&refs), m).unwrap()
    }

    /// μ* at the restricted line coming from the pencil through H0 = x.
    fn local_value(mults: Vec<u32>) -> u32 {
        let m = pencil(mults);
        let e = euler_multiplicity(&m, 0).unwrap();
        e.locals.iter().find(|l| l.local[1] == 1).unwrap().value
    }

    #[test]
    fn deletion() {
        let m = pencil(vec![3, 1]);
        let d = euler_deletion(&m, 0).unwrap();
        assert_eq!(d.mult()[0], 2);
        let s = euler_deletion(&euler_deletion(&pencil(vec![1, 2]), 0).unwrap(), 0);
        assert!(s.is_ok());
        assert_eq!(euler_deletion(&pencil(vec![1, 2]), 0).unwrap().len(), 2);
    }

    #[test]
    fn two_line_case() {
        // k = 2 with m1 = 3
        assert_eq!(local_value(vec![2, 3]), 3);
        assert_eq!(euler_fast_paths(2, &[3]), vec![(FastPath::TwoLines, 3)]);
    }

    #[test]
    fn doubled_pencil() {
        // μ_X ≡ 2 with k = 4
        assert_eq!(local_value(vec![2, 2, 2, 2]), 4);
        assert!(euler_fast_paths(2, &[2, 2, 2]).contains(&(FastPath::AllDouble, 4)));
    }

    #[test]
    fn low_order_case() {
        // |μ_X| = 5 ≤ 2k − 1 = 5, m0 = 2 > 1
        assert_eq!(local_value(vec![2, 1, 1]), 2);
        assert_eq!(euler_fast_paths(2, &[1, 1]), vec![(FastPath::LowOrder, 2)]);
    }

    #[test]
    fn mixed_three_line_case_matches_direct_solves() {
        let m = pencil(vec![2, 1, 1]);
        let e = euler_multiplicity(&m, 0).unwrap();
        for l in &e.locals {
            let full = crate::rank2::rank2_exponents_exact(&m.sub(&l.local)).unwrap();
            let del = crate::rank2::rank2_exponents_exact(&euler_deletion(&m.sub(&l.local), 0).unwrap()).unwrap();
            assert_eq!(full.exponents, l.exp_full);
            assert_eq!(del.exponents, l.exp_deleted);
            assert_eq!(common_value(full.exponents, del.exponents), Some(l.value as u64));
        }
    }

    #[test]
    fn common_value_rule() {
        assert_eq!(common_value([2, 3], [2, 2]), Some(2));
        assert_eq!(common_value([2, 3], [1, 3]), Some(3));
        assert_eq!(common_value([3, 3], [2, 3]), Some(3));
        assert_eq!(common_value([2, 3], [0, 4]), None);
        assert_eq!(common_value([0, 3], [0, 2]), Some(0));
    }
}
