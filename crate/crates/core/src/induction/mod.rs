//! Addition-deletion: triples, the inductive-freeness decision with
//! replayable certificates, localization obstructions, hereditary checks and
//! the backward refuter for additive freeness.

mod certificate;
mod refute;
mod search;

use std::sync::atomic::AtomicU64;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::arrangement::{
    intersection_lattice, restriction, Arrangement, ArrangementError, Flat, MultiArrangement,
};
use crate::rank2::{euler_deletion, euler_multiplicity, EulerRestriction, Rank2Error};

pub use certificate::{emit_induction_table, replay, table_json, CertificateJson, ReplayError, TableStart};
pub use refute::{additive_refuter, RefutationReport, RefutationVerdict, RefuterStep};
pub(crate) use search::{Context, Outcome, Searcher};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InductionError {
    #[error("expected {expected} exponents, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("virtual exponents {given:?} do not fit: {reason}")]
    BadVirtualExponents { given: Vec<u64>, reason: String },
    #[error(transparent)]
    Rank2(#[from] Rank2Error),
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
}

/// sha256 of a multiplicity vector, hex encoded.
pub fn digest(mult: &[u32]) -> String {
    let mut h = Sha256::new();
    for m in mult {
        h.update(m.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// The addition test: when `exp_restriction` embeds in `exp_deletion` as a
/// multiset, returns `exp_deletion` with its one leftover entry raised by 1.
pub fn check_addition_step(exp_deletion: &[u64], exp_restriction: &[u64]) -> Result<Option<Vec<u64>>, InductionError> {
    if exp_restriction.len() + 1 != exp_deletion.len() {
        return Err(InductionError::SizeMismatch {
            expected: exp_deletion.len().saturating_sub(1),
            found: exp_restriction.len(),
        });
    }
    let mut rest = exp_deletion.to_vec();
    rest.sort_unstable();
    for e in exp_restriction {
        match rest.iter().position(|x| x == e) {
            Some(i) => {
                rest.remove(i);
            }
            None => return Ok(None),
        }
    }
    let mut out = exp_restriction.to_vec();
    out.push(rest[0] + 1);
    out.sort_unstable();
    Ok(Some(out))
}

/// (A, μ), (A', μ') and (A'', μ*) with respect to H0.
#[derive(Clone, Debug)]
pub struct Triple {
    pub full: MultiArrangement,
    pub deletion: MultiArrangement,
    pub restriction: EulerRestriction,
}

pub fn triple(m: &MultiArrangement, h0: usize) -> Result<Triple, InductionError> {
    Ok(Triple {
        full: m.clone(),
        deletion: euler_deletion(m, h0)?,
        restriction: euler_multiplicity(m, h0)?,
    })
}

/// One addition in a chain: multiplicity of `hyperplane` goes up by one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InductionStep {
    pub hyperplane: usize,
    pub label: String,
    /// Digest of the multiplicity after the addition.
    pub digest: String,
    pub exp_deletion: Vec<u64>,
    pub exp_restriction: Vec<u64>,
    pub exponents: Vec<u64>,
    /// Chain for the Euler restriction when it has rank ≥ 3.
    pub restriction: Option<Box<InductionCertificate>>,
}

/// A chain of additions from the empty arrangement to `target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InductionCertificate {
    pub dim: usize,
    pub labels: Vec<String>,
    pub target: Vec<u32>,
    pub steps: Vec<InductionStep>,
}

impl InductionCertificate {
    /// Final exponents; all zero for the empty chain.
    pub fn exponents(&self) -> Vec<u64> {
        self.steps.last().map_or_else(|| vec![0; self.dim], |s| s.exponents.clone())
    }

    /// Multiplicity before step `i`.
    pub fn state_before(&self, i: usize) -> Vec<u32> {
        let mut nu = vec![0; self.target.len()];
        for s in &self.steps[..i] {
            nu[s.hyperplane] += 1;
        }
        nu
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Yes(InductionCertificate),
    No,
    Unknown,
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes(_))
    }

    pub fn exponents(&self) -> Option<Vec<u64>> {
        match self {
            Verdict::Yes(c) => Some(c.exponents()),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Yes(_) => "yes",
            Verdict::No => "no",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Node limit; exceeding it yields `Unknown`.
    pub budget: u64,
    /// Skip branches whose predicted exponents violate the local-global
    /// identity for the second elementary symmetric function.
    pub b2_pruning: bool,
    /// Receives the running node count.
    pub progress: Option<Arc<AtomicU64>>,
}

impl Default for SearchOptions {
    fn default() -> SearchOptions {
        SearchOptions {
            budget: 2_000_000,
            b2_pruning: true,
            progress: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchReport {
    pub verdict: Verdict,
    pub nodes: u64,
}

pub fn is_inductively_free(m: &MultiArrangement, budget: u64) -> Verdict {
    is_inductively_free_with(
        m,
        SearchOptions {
            budget,
            ..SearchOptions::default()
        },
    )
    .verdict
}

pub fn is_inductively_free_with(m: &MultiArrangement, options: SearchOptions) -> SearchReport {
    let counter = options.progress.unwrap_or_default();
    let ctx = Context::with_counter(options.budget, options.b2_pruning, counter);
    let searcher = Searcher::new(m.arrangement().clone());
    let verdict = match searcher.decide(&ctx, m.mult()) {
        Outcome::Yes(_) => Verdict::Yes(searcher.certificate(&ctx, m.mult())),
        Outcome::No => Verdict::No,
        Outcome::Unknown => Verdict::Unknown,
    };
    SearchReport {
        verdict,
        nodes: ctx.nodes(),
    }
}

/// Certificate for a chain that must pass through the simple arrangement and
/// then raise multiplicities in the given order. Returns the failing row on
/// error.
pub fn chain_through_simple(
    m: &MultiArrangement,
    order: &[usize],
    budget: u64,
) -> Result<InductionCertificate, String> {
    let simple = MultiArrangement::simple(m.arrangement().clone());
    let base = match is_inductively_free(&simple, budget) {
        Verdict::Yes(c) => c,
        v => return Err(format!("simple arrangement is {}", v.name())),
    };
    let ctx = Context::new(budget, false);
    let searcher = Searcher::new(m.arrangement().clone());
    let mut nu = vec![1u32; m.len()];
    let mut exps = base.exponents();
    let mut steps = base.steps;
    for (row, &h0) in order.iter().enumerate() {
        nu[h0] += 1;
        let (mu_star, outcome) = searcher
            .restriction_outcome(&ctx, &nu, h0)
            .ok_or_else(|| format!("row {}: Euler multiplicity undefined", row + 1))?;
        let exp_restriction = match outcome {
            Outcome::Yes(e) => e,
            o => return Err(format!("row {}: restriction {o:?}", row + 1)),
        };
        let next = check_addition_step(&exps, &exp_restriction)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("row {}: {exp_restriction:?} does not embed in {exps:?}", row + 1))?;
        steps.push(InductionStep {
            hyperplane: h0,
            label: m.arrangement().label(h0).to_string(),
            digest: digest(&nu),
            exp_deletion: exps,
            exp_restriction,
            exponents: next.clone(),
            restriction: searcher.restriction_certificate(&ctx, h0, &mu_star),
        });
        exps = next;
    }
    if nu != m.mult() {
        return Err("row order does not reach the target multiplicity".into());
    }
    Ok(InductionCertificate {
        dim: m.dim(),
        labels: m.arrangement().labels().to_vec(),
        target: nu,
        steps,
    })
}

/// A flat whose localization is not inductively free.
#[derive(Clone, Debug)]
pub struct Obstruction {
    pub flat: Flat,
    pub localization: MultiArrangement,
}

/// Scans flats of rank 3 to `rank_limit` (lower ranks are always inductively
/// free) and returns the first whose localization is decided No.
pub fn localization_obstruction(m: &MultiArrangement, rank_limit: usize, budget: u64) -> Option<Obstruction> {
    let lattice = intersection_lattice(m.arrangement(), Some(rank_limit));
    for k in 3..=rank_limit {
        for flat in lattice.of_rank(k) {
            let local = m.sub(flat.closed());
            if is_inductively_free(&local, budget) == Verdict::No {
                return Some(Obstruction {
                    flat: flat.clone(),
                    localization: local,
                });
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Hereditary {
    Yes { restrictions: usize },
    /// The first restriction (by flat) not decided Yes, with its verdict.
    No { flat: Vec<usize>, verdict: &'static str },
}

/// Decides A and every restriction A^X with the simple multiplicity.
pub fn hereditarily_inductively_free(arr: &Arrangement, budget: u64) -> Hereditary {
    let lattice = intersection_lattice(arr, None);
    let mut seen = std::collections::HashSet::new();
    for flat in lattice.flats() {
        let res = if flat.rank() == 0 {
            arr.clone()
        } else {
            restriction(arr, flat).expect("lattice flats are closed").arrangement
        };
        let simple = MultiArrangement::simple(res);
        if !seen.insert(simple.canonical_pairs()) {
            continue;
        }
        let v = is_inductively_free(&simple, budget);
        if !v.is_yes() {
            return Hereditary::No {
                flat: flat.closed().to_vec(),
                verdict: v.name(),
            };
        }
    }
    Hereditary::Yes {
        restrictions: seen.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::{arrangement_from_ints, concentrated_multiplicity, ziegler_multiplicity};
    use crate::catalog::{intermediate, IntermediateSpec};

    #[test]
    fn addition_step_examples() {
        assert_eq!(check_addition_step(&[1, 6, 7], &[6, 7]).unwrap(), Some(vec![2, 6, 7]));
        assert_eq!(check_addition_step(&[13, 19, 22], &[13, 19]).unwrap(), Some(vec![13, 19, 23]));
        assert_eq!(check_addition_step(&[1, 2, 4], &[3, 4]).unwrap(), None);
        assert!(check_addition_step(&[1, 2], &[1, 2]).is_err());
    }

    #[test]
    fn boolean_triple() {
        let m = MultiArrangement::simple(arrangement_from_ints(&[&[1, 0], &[0, 1]]));
        let t = triple(&m, 0).unwrap();
        assert_eq!(t.deletion.len(), 1);
        assert_eq!(t.restriction.multi.dim(), 1);
        assert_eq!(t.restriction.multi.mult(), &[1]);
        assert_eq!(t.full.order(), t.deletion.order() + 1);
    }

    #[test]
    fn concentrated_triple_gives_ziegler() {
        let a = intermediate(IntermediateSpec::new(3, 3, 1).unwrap());
        let d = concentrated_multiplicity(&a, 2, 3).unwrap();
        let t = triple(&d, 2).unwrap();
        assert_eq!(t.deletion.mult()[2], 2);
        let z = ziegler_multiplicity(&a, 2).unwrap();
        assert!(t.restriction.multi.same_as(&z.multi));
    }

    #[test]
    fn small_verdicts() {
        let boolean = MultiArrangement::simple(arrangement_from_ints(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]));
        assert_eq!(is_inductively_free(&boolean, 1000).exponents(), Some(vec![1, 1, 1]));
        let pencil = MultiArrangement::new(
            arrangement_from_ints(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, 0], &[1, 2, 0]]),
            vec![3, 1, 2, 1],
        )
        .unwrap();
        let v = is_inductively_free(&pencil, 1000);
        assert_eq!(v.exponents().map(|e| e.iter().sum::<u64>()), Some(7));
        let g333 = MultiArrangement::simple(intermediate(IntermediateSpec::new(3, 3, 0).unwrap()));
        assert_eq!(is_inductively_free(&g333, 100_000), Verdict::No);
        assert_eq!(is_inductively_free(&g333, 3), Verdict::Unknown);
    }

    #[test]
    fn empty_chain() {
        let e = MultiArrangement::simple(Arrangement::empty(3, 1));
        match is_inductively_free(&e, 10) {
            Verdict::Yes(c) => {
                assert!(c.steps.is_empty());
                assert_eq!(c.exponents(), vec![0, 0, 0]);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn hereditary_small_cases() {
        let boolean = arrangement_from_ints(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert!(matches!(hereditarily_inductively_free(&boolean, 1000), Hereditary::Yes { .. }));
        let g333 = intermediate(IntermediateSpec::new(3, 3, 0).unwrap());
        assert!(matches!(
            hereditarily_inductively_free(&g333, 100_000),
            Hereditary::No { verdict: "no", .. }
        ));
    }

    #[test]
    fn digests_are_stable() {
        assert_eq!(digest(&[1, 2]), digest(&[1, 2]));
        assert_ne!(digest(&[1, 2]), digest(&[2, 1]));
        assert_eq!(digest(&[]).len(), 64);
    }
}
