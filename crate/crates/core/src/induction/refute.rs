//! Backward search over virtual exponents.
//!
//! From (A, μ) with a guessed exponent multiset, a deletion at H is
//! admissible when |μ*| at H equals the sum of all but one virtual exponent;
//! that excluded exponent drops by one and the search continues on the
//! deletion. Reaching the empty arrangement yields a candidate chain;
//! exhausting every path refutes additive freeness with those exponents.

use std::collections::HashSet;

use super::{digest, Context, InductionError, Searcher};
use crate::arrangement::MultiArrangement;

/// Digests kept in a report; the count is always exact.
const DEAD_END_SAMPLE: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefuterStep {
    pub hyperplane: usize,
    pub label: String,
    /// |μ*| at the deleted hyperplane.
    pub restriction_order: u64,
    /// Virtual exponents before the deletion.
    pub virtual_exponents: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RefutationVerdict {
    Refuted,
    /// Deletions from the target down to the empty arrangement.
    ChainFound(Vec<RefuterStep>),
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefutationReport {
    /// States expanded.
    pub explored: u64,
    pub dead_end_count: u64,
    /// Digests of the first dead ends met, as `multiplicity|virtual exponents`.
    pub dead_ends: Vec<String>,
    /// Most deletions reached along any path.
    pub max_depth: usize,
    pub verdict: RefutationVerdict,
}

enum Walk {
    Found(Vec<RefuterStep>),
    Dead,
    Budget,
}

struct Refuter<'a> {
    searcher: Searcher,
    ctx: Context,
    failed: HashSet<(Vec<u32>, Vec<u64>)>,
    budget: u64,
    report: &'a mut RefutationReport,
}

impl Refuter<'_> {
    fn walk(&mut self, nu: &mut Vec<u32>, virt: &[u64], depth: usize) -> Walk {
        if nu.iter().all(|&m| m == 0) {
            return Walk::Found(Vec::new());
        }
        let key = (nu.clone(), virt.to_vec());
        if self.failed.contains(&key) {
            return Walk::Dead;
        }
        if self.report.explored >= self.budget {
            return Walk::Budget;
        }
        self.report.explored += 1;
        self.report.max_depth = self.report.max_depth.max(depth);
        let total: u64 = nu.iter().map(|&m| m as u64).sum();
        let mut admissible = false;
        let mut budget_hit = false;
        for (h, order) in self.searcher.restriction_orders(&self.ctx, nu) {
            let Some(order) = order else { continue };
            let excluded = total - order.min(total);
            let Some(pos) = virt.iter().position(|&v| v == excluded && v > 0) else { continue };
            admissible = true;
            let mut next_virt = virt.to_vec();
            next_virt[pos] -= 1;
            next_virt.sort_unstable();
            nu[h] -= 1;
            let r = self.walk(nu, &next_virt, depth + 1);
            nu[h] += 1;
            match r {
                Walk::Found(mut chain) => {
                    chain.push(RefuterStep {
                        hyperplane: h,
                        label: self.searcher.arrangement().label(h).to_string(),
                        restriction_order: order,
                        virtual_exponents: virt.to_vec(),
                    });
                    return Walk::Found(chain);
                }
                Walk::Budget => budget_hit = true,
                Walk::Dead => {}
            }
        }
        if budget_hit {
            return Walk::Budget;
        }
        if !admissible {
            self.report.dead_end_count += 1;
            if self.report.dead_ends.len() < DEAD_END_SAMPLE {
                let v: Vec<u32> = virt.iter().map(|&x| x as u32).collect();
                self.report.dead_ends.push(format!("{}|{}", digest(nu), digest(&v)));
            }
        }
        self.failed.insert(key);
        Walk::Dead
    }
}

/// Runs the backward search from (A, μ) with the given virtual exponents.
pub fn additive_refuter(
    m: &MultiArrangement,
    virtual_exponents: &[u64],
    budget: u64,
) -> Result<RefutationReport, InductionError> {
    let bad = |reason: &str| InductionError::BadVirtualExponents {
        given: virtual_exponents.to_vec(),
        reason: reason.to_string(),
    };
    if virtual_exponents.len() != m.rank() {
        return Err(bad(&format!("expected {} values, one per rank", m.rank())));
    }
    if virtual_exponents.iter().sum::<u64>() != m.order() {
        return Err(bad(&format!("sum must equal |mu| = {}", m.order())));
    }
    let mut report = RefutationReport {
        explored: 0,
        dead_end_count: 0,
        dead_ends: Vec::new(),
        max_depth: 0,
        verdict: RefutationVerdict::Refuted,
    };
    let mut virt = virtual_exponents.to_vec();
    virt.sort_unstable();
    let mut refuter = Refuter {
        searcher: Searcher::new(m.arrangement().clone()),
        ctx: Context::new(u64::MAX, false),
        failed: HashSet::new(),
        budget,
        report: &mut report,
    };
    let mut nu = m.mult().to_vec();
    let verdict = match refuter.walk(&mut nu, &virt, 0) {
        Walk::Found(mut chain) => {
            chain.reverse();
            RefutationVerdict::ChainFound(chain)
        }
        Walk::Dead => RefutationVerdict::Refuted,
        Walk::Budget => RefutationVerdict::BudgetExhausted,
    };
    report.verdict = verdict;
    Ok(report)
}
