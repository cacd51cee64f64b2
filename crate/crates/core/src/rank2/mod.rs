//! Exponents of rank-2 multiarrangements and the Euler multiplicity.
//!
//! A rank-2 multiarrangement is moved into plane coordinates (x, y), where
//! every line is either `y` or `x + c·y`. A derivation θ = f1 ∂x + f2 ∂y of
//! degree d lies in D(A, μ) when α^{μ(H)} divides α(θ) for every line; these
//! conditions are linear in the 2(d + 1) coefficients of f1 and f2.
//!
//! Exponents are certified from both sides. The lower bound d1 ≥ d comes
//! from the degree-(d − 1) system having full column rank modulo a prime:
//! a nonzero maximal minor mod p is nonzero over ℚ(ζ). The upper bound is an
//! exact derivation of degree d, reconstructed from several primes and
//! checked by exact polynomial division.

mod euler;
mod modular;

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use thiserror::Error;

use crate::arrangement::{ArrangementError, LinearForm, MultiArrangement};
use crate::field::{Field, Fp, ModularEmbedding};
use crate::linalg;
use crate::scalar::Scalar;

pub(crate) use euler::common_value;
pub use euler::{
    euler_deletion, euler_multiplicity, euler_multiplicity_cached, euler_fast_paths,
    EulerRestriction, FastPath, LocalEuler,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Rank2Error {
    #[error("multiarrangement has rank {0}, expected at most 2")]
    RankTooLarge(usize),
    #[error("hyperplane index {0} is not in the support")]
    NotInSupport(usize),
    #[error("Euler multiplicity undefined at restricted hyperplane {y}: exp(A_X) = {e:?}, exp(A'_X) = {f:?} share no common value")]
    NoCommonExponent { y: usize, e: [u64; 2], f: [u64; 2] },
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
}

/// A line in plane coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PlaneLine<F> {
    /// The line y = 0.
    Y,
    /// The line x + c·y = 0.
    XPlus(F),
}

impl<F: Field> PlaneLine<F> {
    /// The form as a coefficient pair (a, b) for a·x + b·y.
    pub fn pair(&self, zero: &F) -> (F, F) {
        match self {
            PlaneLine::Y => (zero.clone(), zero.one_like()),
            PlaneLine::XPlus(c) => (zero.one_like(), c.clone()),
        }
    }
}

/// A rank-≤2 multiarrangement in plane coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlaneModel {
    pub order: u32,
    pub lines: Vec<(PlaneLine<Scalar>, u32)>,
}

impl PlaneModel {
    /// Moves a multiarrangement of rank ≤ 2 into plane coordinates: the
    /// coordinates of a form are its entries at the pivot columns of the
    /// reduced echelon basis of the span of all forms. A rank-1 support
    /// becomes the single line `x`.
    pub fn from_multi(m: &MultiArrangement) -> Result<PlaneModel, Rank2Error> {
        let arr = m.arrangement();
        let order = arr.order();
        let mut rows: Vec<Vec<Scalar>> = arr.forms().iter().map(|f| f.coeffs().to_vec()).collect();
        let pivots = linalg::rref(&mut rows);
        let lines = match pivots.len() {
            0 => Vec::new(),
            1 => vec![(PlaneLine::XPlus(Scalar::zero(order)), m.mult()[0])],
            2 => arr
                .forms()
                .iter()
                .zip(m.mult())
                .map(|(f, &k)| (PlaneModel::line(f, &pivots), k))
                .collect(),
            r => return Err(Rank2Error::RankTooLarge(r)),
        };
        Ok(PlaneModel { order, lines })
    }

    fn line(f: &LinearForm, pivots: &[usize]) -> PlaneLine<Scalar> {
        let a = &f.coeffs()[pivots[0]];
        let b = &f.coeffs()[pivots[1]];
        if a.is_zero() {
            PlaneLine::Y
        } else {
            PlaneLine::XPlus(b / a)
        }
    }

    /// Builds a model directly from plane lines; used by tests and examples.
    pub fn new(order: u32, lines: Vec<(PlaneLine<Scalar>, u32)>) -> PlaneModel {
        PlaneModel { order, lines }
    }

    /// |μ|.
    pub fn total(&self) -> u64 {
        self.lines.iter().map(|l| l.1 as u64).sum()
    }

    fn zero(&self) -> Scalar {
        Scalar::zero(self.order)
    }

    /// Image under a modular embedding, `None` if a coefficient is not
    /// p-integral.
    pub fn map(&self, emb: &ModularEmbedding) -> Option<Vec<(PlaneLine<Fp>, u32)>> {
        self.lines
            .iter()
            .map(|(l, m)| {
                let l = match l {
                    PlaneLine::Y => PlaneLine::Y,
                    PlaneLine::XPlus(c) => PlaneLine::XPlus(emb.map(c)?),
                };
                Some((l, *m))
            })
            .collect()
    }

    /// Sorted canonical key, independent of line order.
    pub fn key(&self) -> Vec<(PlaneLine<Scalar>, u32)> {
        let mut k = self.lines.clone();
        k.sort_by_cached_key(|(l, m)| {
            (
                match l {
                    PlaneLine::Y => String::new(),
                    PlaneLine::XPlus(c) => c.to_string(),
                },
                *m,
            )
        });
        k
    }
}

/// θ = f1 ∂x + f2 ∂y with `f[i]` the coefficient of x^{d−i} y^i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rank2Derivation {
    pub degree: usize,
    pub f1: Vec<Scalar>,
    pub f2: Vec<Scalar>,
}

impl fmt::Display for Rank2Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let poly = |p: &[Scalar]| -> String {
            let d = self.degree;
            let terms: Vec<String> = p
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| {
                    let mono = match (d - i, i) {
                        (0, 0) => String::new(),
                        (a, 0) => format!("*x^{a}"),
                        (0, b) => format!("*y^{b}"),
                        (a, b) => format!("*x^{a}*y^{b}"),
                    };
                    format!("({c}){mono}")
                })
                .collect();
            if terms.is_empty() {
                "0".into()
            } else {
                terms.join(" + ")
            }
        };
        write!(f, "[{}] dx + [{}] dy", poly(&self.f1), poly(&self.f2))
    }
}

/// Certified exponents {d1 ≤ d2} of a rank-≤2 multiarrangement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rank2Exponents {
    pub exponents: [u64; 2],
    pub witness: Rank2Derivation,
}

/// Binomial rows C(n, j) for n ≤ d as field elements (Pascal's rule).
fn binomials<F: Field>(d: usize, one: &F) -> Vec<Vec<F>> {
    let zero = one.zero_like();
    let mut rows: Vec<Vec<F>> = vec![vec![one.clone()]];
    for n in 1..=d {
        let prev = &rows[n - 1];
        let row = (0..=n)
            .map(|j| {
                let a = if j < n { prev[j].clone() } else { zero.clone() };
                let b = if j > 0 { prev[j - 1].clone() } else { zero.clone() };
                a.fadd(&b)
            })
            .collect();
        rows.push(row);
    }
    rows
}

/// The linear system of degree `d`; unknowns f1[0..=d] then f2[0..=d].
pub fn derivation_system<F: Field>(lines: &[(PlaneLine<F>, u32)], d: usize, zero: &F) -> Vec<Vec<F>> {
    let n = 2 * (d + 1);
    let one = zero.one_like();
    let binom = binomials(d, &one);
    let mut rows = Vec::new();
    for (line, m) in lines {
        let conds = (*m as usize).min(d + 1);
        match line {
            PlaneLine::Y => {
                for j in 0..conds {
                    let mut row = vec![zero.clone(); n];
                    row[d + 1 + j] = one.clone();
                    rows.push(row);
                }
            }
            PlaneLine::XPlus(c) => {
                let negc = c.fneg();
                let mut pw = vec![one.clone()];
                for e in 1..=d {
                    pw.push(pw[e - 1].fmul(&negc));
                }
                for j in 0..conds {
                    let mut row = vec![zero.clone(); n];
                    for i in 0..=d - j {
                        let e = d - i;
                        let v = binom[e][j].fmul(&pw[e - j]);
                        row[d + 1 + i] = v.fmul(c);
                        row[i] = v;
                    }
                    rows.push(row);
                }
            }
        }
    }
    rows
}

fn kernel_dim<F: Field>(lines: &[(PlaneLine<F>, u32)], d: usize, zero: &F) -> usize {
    let rows = derivation_system(lines, d, zero);
    2 * (d + 1) - linalg::rank(&rows)
}

/// Smallest exponent read off kernel dimensions, using
/// dim D_d = max(0, d − d1 + 1) + max(0, d − d2 + 1).
fn smallest_exponent<F: Field>(lines: &[(PlaneLine<F>, u32)], total: u64, zero: &F) -> u64 {
    let d0 = (total / 2) as usize;
    let k = kernel_dim(lines, d0, zero) as u64;
    if total % 2 == 0 && k == 2 {
        // balanced pair and a gap of one both give two solutions at d0
        if d0 > 0 && kernel_dim(lines, d0 - 1, zero) == 1 {
            return d0 as u64 - 1;
        }
        return d0 as u64;
    }
    (d0 as u64 + 1).saturating_sub(k)
}

/// Degree-(d) system has only the zero solution modulo some prime, which
/// proves the same over ℚ(ζ).
pub fn certify_no_derivation(model: &PlaneModel, d: usize) -> bool {
    (0..4).any(|i| {
        let emb = ModularEmbedding::nth(model.order, i);
        model
            .map(&emb)
            .is_some_and(|lines| kernel_dim(&lines, d, &emb.zero()) == 0)
    })
}

/// Exact check that α^{μ(H)} divides α(θ) for every line, by repeated
/// synthetic division.
pub fn verify_derivation(model: &PlaneModel, w: &Rank2Derivation) -> bool {
    if w.f1.len() != w.degree + 1 || w.f2.len() != w.degree + 1 {
        return false;
    }
    if w.f1.iter().chain(&w.f2).all(Scalar::is_zero) {
        return false;
    }
    let zero = model.zero();
    model.lines.iter().all(|(line, m)| {
        let m = *m as usize;
        match line {
            PlaneLine::Y => w.f2.iter().take(m).all(Scalar::is_zero) && (m <= w.degree + 1 || w.f2.iter().all(Scalar::is_zero)),
            PlaneLine::XPlus(c) => {
                // g(x, 1) with ascending powers of x: x^{d−i} ↔ g[i]
                let mut g: Vec<Scalar> = w
                    .f1
                    .iter()
                    .zip(&w.f2)
                    .map(|(a, b)| a + &(c * b))
                    .rev()
                    .collect();
                for _ in 0..m {
                    if g.iter().all(Scalar::is_zero) {
                        return true;
                    }
                    // divide by (x + c): synthetic division at −c
                    let root = -c;
                    let n = g.len() - 1;
                    if n == 0 {
                        return false;
                    }
                    let mut q = vec![zero.clone(); n];
                    let mut carry = zero.clone();
                    for k in (0..=n).rev() {
                        let v = &g[k] + &(&carry * &root);
                        if k == 0 {
                            carry = v;
                        } else {
                            q[k - 1] = v.clone();
                            carry = v;
                        }
                    }
                    if !carry.is_zero() {
                        return false;
                    }
                    g = q;
                }
                true
            }
        }
    })
}

fn derivation_from_vector(v: Vec<Scalar>, d: usize) -> Rank2Derivation {
    let mut f1 = v;
    let f2 = f1.split_off(d + 1);
    Rank2Derivation { degree: d, f1, f2 }
}

/// Exponents by ascending exact elimination over ℚ(ζ), no modular step.
pub fn rank2_exponents_exact(m: &MultiArrangement) -> Result<Rank2Exponents, Rank2Error> {
    let model = PlaneModel::from_multi(m)?;
    Ok(exact_from_model(&model))
}

fn exact_from_model(model: &PlaneModel) -> Rank2Exponents {
    let zero = model.zero();
    let total = model.total();
    for d in 0..=(total / 2) as usize {
        let rows = derivation_system(&model.lines, d, &zero);
        let ker = linalg::kernel(&rows, 2 * (d + 1), &zero);
        if let Some(v) = ker.into_iter().next() {
            return Rank2Exponents {
                exponents: [d as u64, total - d as u64],
                witness: derivation_from_vector(v, d),
            };
        }
    }
    unreachable!("a derivation of degree ⌊|μ|/2⌋ always exists in rank 2")
}

/// Certified exponents of a rank-≤2 multiarrangement.
pub fn rank2_exponents(m: &MultiArrangement) -> Result<Rank2Exponents, Rank2Error> {
    let model = PlaneModel::from_multi(m)?;
    Ok(certified_from_model(&model))
}

pub fn certified_from_model(model: &PlaneModel) -> Rank2Exponents {
    let total = model.total();
    for attempt in 0..3 {
        let emb = ModularEmbedding::nth(model.order, attempt);
        let Some(lines) = model.map(&emb) else { continue };
        let d1 = smallest_exponent(&lines, total, &emb.zero()) as usize;
        if d1 > 0 && kernel_dim(&lines, d1 - 1, &emb.zero()) != 0 {
            continue;
        }
        if let Some(w) = modular::reconstruct_witness(model, d1, attempt) {
            if verify_derivation(model, &w) {
                return Rank2Exponents {
                    exponents: [d1 as u64, total - d1 as u64],
                    witness: w,
                };
            }
        }
    }
    exact_from_model(model)
}

/// Exponents only, from a single prime; not certified.
pub fn rank2_exponents_modular(model: &PlaneModel, emb: &ModularEmbedding) -> Option<[u64; 2]> {
    let lines = model.map(emb)?;
    let total = model.total();
    let d1 = smallest_exponent(&lines, total, &emb.zero());
    Some([d1, total - d1])
}

/// Thread-safe memo of certified exponents keyed by the plane model.
#[derive(Default)]
pub struct Rank2Cache {
    map: Mutex<HashMap<Vec<(PlaneLine<Scalar>, u32)>, [u64; 2]>>,
}

impl Rank2Cache {
    pub fn new() -> Rank2Cache {
        Rank2Cache::default()
    }

    pub fn exponents(&self, m: &MultiArrangement) -> Result<[u64; 2], Rank2Error> {
        let model = PlaneModel::from_multi(m)?;
        Ok(self.exponents_of_model(&model))
    }

    pub fn exponents_of_model(&self, model: &PlaneModel) -> [u64; 2] {
        let key = model.key();
        if let Some(e) = self.map.lock().unwrap().get(&key) {
            return *e;
        }
        let e = certified_from_model(model).exponents;
        self.map.lock().unwrap().insert(key, e);
        e
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::{arrangement_from_ints, ziegler_multiplicity, Arrangement};
    use crate::catalog::{intermediate, IntermediateSpec};
    use proptest::prelude::*;

    fn multi(rows: &[&[i64]], mult: Vec<u32>) -> MultiArrangement {
        MultiArrangement::new(arrangement_from_ints(rows), mult).unwrap()
    }

    fn check(m: &MultiArrangement) -> [u64; 2] {
        let r = rank2_exponents(m).unwrap();
        let model = PlaneModel::from_multi(m).unwrap();
        assert!(verify_derivation(&model, &r.witness));
        assert_eq!(r.witness.degree as u64, r.exponents[0]);
        if r.exponents[0] > 0 {
            assert!(certify_no_derivation(&model, r.exponents[0] as usize - 1));
        }
        assert_eq!(r.exponents.iter().sum::<u64>(), m.order());
        assert_eq!(rank2_exponents_exact(m).unwrap().exponents, r.exponents);
        let emb = ModularEmbedding::nth(model.order, 0);
        assert_eq!(rank2_exponents_modular(&model, &emb), Some(r.exponents));
        r.exponents
    }

    #[test]
    fn two_lines() {
        for (a, b) in [(1, 1), (3, 5), (4, 2), (0, 3)] {
            let m = multi(&[&[1, 0], &[0, 1]], vec![a, b]);
            let mut want = [a as u64, b as u64];
            want.sort();
            if a == 0 || b == 0 {
                want = [0, (a + b) as u64];
            }
            assert_eq!(check(&m), want);
        }
    }

    #[test]
    fn three_lines() {
        assert_eq!(check(&multi(&[&[1, 0], &[0, 1], &[1, -1]], vec![1, 1, 1])), [1, 2]);
        assert_eq!(check(&multi(&[&[1, 0], &[0, 1], &[1, -1]], vec![2, 2, 2])), [3, 3]);
        assert_eq!(check(&multi(&[&[1, 0], &[0, 1], &[1, -1]], vec![2, 1, 1])), [2, 2]);
    }

    /// Dimension of degree-d derivations, written independently of the
    /// solver: α^m divides g iff every partial derivative of g of order < m
    /// vanishes at the point (−b, a) of the line a·x + b·y = 0.
    fn brute_force_dim(lines: &[(i64, i64, u32)], d: usize) -> usize {
        let q = |v: i64| Scalar::from_int(1, v);
        let falling = |p: usize, j: usize| -> i64 { (0..j).map(|t| (p - t) as i64).product() };
        let n = 2 * (d + 1);
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        for &(a, b, m) in lines {
            for order in 0..m as usize {
                for j in 0..=order {
                    let k = order - j;
                    let mut row = vec![q(0); n];
                    for i in 0..=d {
                        let (px, py) = (d - i, i);
                        if j > px || k > py {
                            continue;
                        }
                        let v = falling(px, j)
                            * falling(py, k)
                            * (-b).pow((px - j) as u32)
                            * a.pow((py - k) as u32);
                        row[i] = q(a * v);
                        row[d + 1 + i] = q(b * v);
                    }
                    rows.push(row);
                }
            }
        }
        n - linalg::rank(&rows)
    }

    #[test]
    fn three_lines_double_matches_brute_force() {
        let lines = [(1, 0, 2), (0, 1, 2), (1, -1, 2)];
        let dims: Vec<usize> = (0..=4).map(|d| brute_force_dim(&lines, d)).collect();
        // first nonzero dimension gives d1
        let d1 = dims.iter().position(|&k| k > 0).unwrap();
        let m = multi(&[&[1, 0], &[0, 1], &[1, -1]], vec![2, 2, 2]);
        assert_eq!(check(&m)[0], d1 as u64);
        assert_eq!(dims[d1], 2);
    }

    #[test]
    fn g333_ziegler_is_balanced() {
        let a = intermediate(IntermediateSpec::new(3, 3, 0).unwrap());
        for h in 0..a.len() {
            let z = ziegler_multiplicity(&a, h).unwrap();
            assert_eq!(check(&z.multi), [4, 4]);
        }
    }

    #[test]
    fn higher_ambient_dimension() {
        let m = multi(&[&[1, -1, 0], &[0, 1, -1], &[1, 0, -1]], vec![3, 1, 2]);
        assert_eq!(check(&m), [3, 3]);
        let single = multi(&[&[0, 1, 1]], vec![4]);
        assert_eq!(check(&single), [0, 4]);
        let empty = MultiArrangement::simple(Arrangement::empty(3, 1));
        assert_eq!(check(&empty), [0, 0]);
        let too_big = multi(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]], vec![1, 1, 1]);
        assert_eq!(rank2_exponents(&too_big), Err(Rank2Error::RankTooLarge(3)));
    }

    #[test]
    fn cyclotomic_pencil() {
        // x^3 − y^3 with each factor doubled
        let arr = intermediate(IntermediateSpec::new(3, 2, 0).unwrap());
        let m = MultiArrangement::new(arr, vec![2, 2, 2]).unwrap();
        assert_eq!(check(&m), [3, 3]);
    }

    #[test]
    fn cache_agrees() {
        let cache = Rank2Cache::new();
        let m = multi(&[&[1, 0], &[0, 1], &[1, -1], &[1, 1]], vec![5, 1, 2, 3]);
        let e = cache.exponents(&m).unwrap();
        assert_eq!(e, check(&m));
        assert_eq!(cache.exponents(&m).unwrap(), e);
        assert_eq!(cache.len(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sum_rule_and_witness(
            mults in prop::collection::vec(1u32..6, 2..6),
            slopes in prop::collection::vec(-4i64..5, 6),
            scale in 1i64..5,
        ) {
            let mut rows: Vec<Vec<i64>> = vec![vec![0, 1]];
            let mut used = std::collections::HashSet::new();
            for &s in &slopes {
                if used.insert(s) {
                    rows.push(vec![1, s]);
                }
            }
            rows.truncate(mults.len());
            let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
            let m = multi(&refs, mults[..rows.len()].to_vec());
            let e = check(&m);
            // rescaling a form leaves the exponents alone
            let mut scaled: Vec<Vec<i64>> = rows.clone();
            scaled[0] = scaled[0].iter().map(|v| v * scale).collect();
            let refs2: Vec<&[i64]> = scaled.iter().map(|r| r.as_slice()).collect();
            prop_assert_eq!(rank2_exponents(&multi(&refs2, mults[..rows.len()].to_vec())).unwrap().exponents, e);
        }
    }
}
