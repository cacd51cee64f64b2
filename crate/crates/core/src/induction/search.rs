//! Memoized top-down search for addition chains on a fixed arrangement.
//!
//! States are multiplicity vectors ν ≤ μ over the hyperplanes of one
//! arrangement. A state is settled Yes when some H0 in its support has an
//! inductively free Euler restriction whose exponents embed in those of the
//! settled deletion. Supports of rank ≤ 2 are settled directly.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::{check_addition_step, digest, InductionCertificate, InductionStep};
use crate::arrangement::{intersection_lattice, restrict_to_hyperplane, Arrangement};
use crate::rank2::{common_value, PlaneLine, PlaneModel, Rank2Cache};
use crate::scalar::Scalar;

/// Shared state of one decision run.
pub(crate) struct Context {
    nodes: Arc<AtomicU64>,
    budget: u64,
    pruning: bool,
    rank2: Rank2Cache,
}

impl Context {
    pub(crate) fn new(budget: u64, pruning: bool) -> Context {
        Context::with_counter(budget, pruning, Arc::default())
    }

    /// Counts nodes into `nodes`, which others may watch.
    pub(crate) fn with_counter(budget: u64, pruning: bool, nodes: Arc<AtomicU64>) -> Context {
        Context {
            nodes,
            budget,
            pruning,
            rank2: Rank2Cache::new(),
        }
    }

    pub(crate) fn nodes(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed)
    }

    fn tick(&self) -> bool {
        self.nodes.fetch_add(1, Ordering::Relaxed) < self.budget
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Yes(Vec<u64>),
    No,
    Unknown,
}

#[derive(Clone, Debug)]
struct Choice {
    h0: usize,
    restricted: Vec<u32>,
    exp_restriction: Vec<u64>,
}

#[derive(Clone, Debug)]
enum Node {
    Yes { exps: Vec<u64>, choice: Option<Choice> },
    No,
}

struct Flat2 {
    closed: Vec<usize>,
    lines: Vec<PlaneLine<Scalar>>,
    member: Vec<bool>,
}

struct Restricted {
    /// Rank-2 flat H0 ∩ Y for each restricted hyperplane Y.
    flat_of: Vec<usize>,
    child: Searcher,
}

/// Search over the multiplicities of one arrangement.
pub(crate) struct Searcher {
    arr: Arrangement,
    flats: Vec<Flat2>,
    pair: HashMap<(usize, usize), usize>,
    restricted: Vec<OnceLock<Restricted>>,
    memo: Mutex<HashMap<Vec<u32>, Node>>,
    local: Mutex<HashMap<(usize, Vec<u32>), [u64; 2]>>,
}

fn plane_line(coeffs: &[Scalar], pivots: &[usize]) -> PlaneLine<Scalar> {
    let a = &coeffs[pivots[0]];
    let b = &coeffs[pivots[1]];
    if a.is_zero() {
        PlaneLine::Y
    } else {
        PlaneLine::XPlus(b / a)
    }
}

fn pad(dim: usize, tail: &[u64]) -> Vec<u64> {
    let mut v = vec![0; dim - tail.len().min(dim)];
    v.extend_from_slice(tail);
    v.sort_unstable();
    v
}

fn elementary2(e: &[u64]) -> u64 {
    let s: u64 = e.iter().sum();
    let sq: u64 = e.iter().map(|x| x * x).sum();
    (s * s - sq) / 2
}

impl Searcher {
    pub(crate) fn new(arr: Arrangement) -> Searcher {
        let lattice = intersection_lattice(&arr, Some(2));
        let mut flats = Vec::new();
        let mut pair = HashMap::new();
        for f in lattice.of_rank(2) {
            let pivots: Vec<usize> = f
                .equations()
                .iter()
                .map(|row| row.iter().position(|c| !c.is_zero()).expect("nonzero row"))
                .collect();
            let lines = f
                .closed()
                .iter()
                .map(|&h| plane_line(arr.form(h).coeffs(), &pivots))
                .collect();
            let mut member = vec![false; arr.len()];
            for &h in f.closed() {
                member[h] = true;
            }
            let id = flats.len();
            for (i, &a) in f.closed().iter().enumerate() {
                for &b in &f.closed()[i + 1..] {
                    pair.insert((a, b), id);
                }
            }
            flats.push(Flat2 {
                closed: f.closed().to_vec(),
                lines,
                member,
            });
        }
        let restricted = (0..arr.len()).map(|_| OnceLock::new()).collect();
        Searcher {
            arr,
            flats,
            pair,
            restricted,
            memo: Mutex::new(HashMap::new()),
            local: Mutex::new(HashMap::new()),
        }
    }

    pub(crate) fn arrangement(&self) -> &Arrangement {
        &self.arr
    }

    fn dim(&self) -> usize {
        self.arr.dim()
    }

    fn flat_id(&self, a: usize, b: usize) -> usize {
        self.pair[&(a.min(b), a.max(b))]
    }

    /// Exponents of ν restricted to a rank-2 flat.
    fn flat_exps(&self, ctx: &Context, id: usize, local: &[u32]) -> [u64; 2] {
        let nonzero: Vec<usize> = (0..local.len()).filter(|&i| local[i] > 0).collect();
        match nonzero.len() {
            0 => return [0, 0],
            1 => return [0, local[nonzero[0]] as u64],
            2 => {
                let (a, b) = (local[nonzero[0]] as u64, local[nonzero[1]] as u64);
                return [a.min(b), a.max(b)];
            }
            _ => {}
        }
        let key = (id, local.to_vec());
        if let Some(e) = self.local.lock().unwrap().get(&key) {
            return *e;
        }
        let flat = &self.flats[id];
        let model = PlaneModel::new(
            self.arr.order(),
            nonzero.iter().map(|&i| (flat.lines[i].clone(), local[i])).collect(),
        );
        let e = ctx.rank2.exponents_of_model(&model);
        self.local.lock().unwrap().insert(key, e);
        e
    }

    fn local_mult(&self, id: usize, nu: &[u32]) -> Vec<u32> {
        self.flats[id].closed.iter().map(|&h| nu[h]).collect()
    }

    /// Exponents when the support of ν has rank ≤ 2.
    fn low_rank_exps(&self, ctx: &Context, nu: &[u32]) -> Option<Vec<u64>> {
        let support: Vec<usize> = (0..nu.len()).filter(|&i| nu[i] > 0).collect();
        match support.len() {
            0 => Some(vec![0; self.dim()]),
            1 => Some(pad(self.dim(), &[nu[support[0]] as u64])),
            _ => {
                let id = self.flat_id(support[0], support[1]);
                let flat = &self.flats[id];
                if support.iter().all(|&h| flat.member[h]) {
                    let e = self.flat_exps(ctx, id, &self.local_mult(id, nu));
                    Some(pad(self.dim(), &e))
                } else {
                    None
                }
            }
        }
    }

    /// Σ e1·e2 over the rank-2 localizations of ν.
    fn b2(&self, ctx: &Context, nu: &[u32]) -> u64 {
        (0..self.flats.len())
            .into_par_iter()
            .map(|id| {
                let local = self.local_mult(id, nu);
                if local.iter().filter(|&&m| m > 0).count() < 2 {
                    return 0;
                }
                let e = self.flat_exps(ctx, id, &local);
                e[0] * e[1]
            })
            .sum()
    }

    fn restricted(&self, h0: usize) -> &Restricted {
        self.restricted[h0].get_or_init(|| {
            let res = restrict_to_hyperplane(&self.arr, h0);
            let flat_of = (0..res.arrangement.len())
                .map(|y| {
                    let first = res.preimage(y)[0];
                    self.flat_id(h0, first)
                })
                .collect();
            Restricted {
                flat_of,
                child: Searcher::new(res.arrangement),
            }
        })
    }

    /// μ* on the full restriction to H0 (zero where no support hyperplane
    /// meets H0 in that trace); `None` when some local value is undefined.
    pub(crate) fn euler(&self, ctx: &Context, nu: &[u32], h0: usize) -> Option<Vec<u32>> {
        let r = self.restricted(h0);
        r.flat_of
            .par_iter()
            .map(|&id| {
                let mut local = self.local_mult(id, nu);
                let pos = self.flats[id].closed.iter().position(|&h| h == h0).unwrap();
                if local.iter().enumerate().all(|(i, &m)| i == pos || m == 0) {
                    return Some(0);
                }
                let full = self.flat_exps(ctx, id, &local);
                local[pos] -= 1;
                let deleted = self.flat_exps(ctx, id, &local);
                common_value(full, deleted).map(|v| v as u32)
            })
            .collect()
    }

    fn candidates(&self, nu: &[u32]) -> Vec<usize> {
        let mut c: Vec<usize> = (0..nu.len()).filter(|&i| nu[i] > 0).collect();
        c.sort_by_key(|&i| (std::cmp::Reverse(nu[i]), i));
        c
    }

    pub(crate) fn decide(&self, ctx: &Context, nu: &[u32]) -> Outcome {
        if let Some(n) = self.memo.lock().unwrap().get(nu) {
            return match n {
                Node::Yes { exps, .. } => Outcome::Yes(exps.clone()),
                Node::No => Outcome::No,
            };
        }
        if !ctx.tick() {
            return Outcome::Unknown;
        }
        if let Some(exps) = self.low_rank_exps(ctx, nu) {
            self.memo.lock().unwrap().insert(
                nu.to_vec(),
                Node::Yes {
                    exps: exps.clone(),
                    choice: None,
                },
            );
            return Outcome::Yes(exps);
        }
        let total: u64 = nu.iter().map(|&m| m as u64).sum();
        let b2 = ctx.pruning.then(|| self.b2(ctx, nu));
        let mut unknown = false;
        for h0 in self.candidates(nu) {
            let Some(mu_star) = self.euler(ctx, nu, h0) else { continue };
            let exp_restriction = match self.restricted(h0).child.decide(ctx, &mu_star) {
                Outcome::Yes(e) => e,
                Outcome::No => continue,
                Outcome::Unknown => {
                    unknown = true;
                    continue;
                }
            };
            let sum: u64 = exp_restriction.iter().sum();
            if sum >= total {
                continue;
            }
            if let Some(b2) = b2 {
                let mut predicted = exp_restriction.clone();
                predicted.push(total - sum);
                if elementary2(&predicted) != b2 {
                    continue;
                }
            }
            let mut deleted = nu.to_vec();
            deleted[h0] -= 1;
            match self.decide(ctx, &deleted) {
                Outcome::Yes(exp_deletion) => {
                    if let Some(exps) = check_addition_step(&exp_deletion, &exp_restriction).ok().flatten() {
                        self.memo.lock().unwrap().insert(
                            nu.to_vec(),
                            Node::Yes {
                                exps: exps.clone(),
                                choice: Some(Choice {
                                    h0,
                                    restricted: mu_star,
                                    exp_restriction,
                                }),
                            },
                        );
                        return Outcome::Yes(exps);
                    }
                }
                Outcome::Unknown => unknown = true,
                Outcome::No => {}
            }
        }
        if unknown {
            Outcome::Unknown
        } else {
            self.memo.lock().unwrap().insert(nu.to_vec(), Node::No);
            Outcome::No
        }
    }

    fn is_low_rank(&self, ctx: &Context, nu: &[u32]) -> bool {
        self.low_rank_exps(ctx, nu).is_some()
    }

    /// The chain behind a settled Yes, from the empty arrangement up to ν.
    pub(crate) fn certificate(&self, ctx: &Context, nu: &[u32]) -> InductionCertificate {
        let mut cur = nu.to_vec();
        let mut steps = Vec::new();
        while cur.iter().any(|&m| m > 0) {
            let node = self.memo.lock().unwrap().get(&cur).cloned();
            let (exps, choice) = match node {
                Some(Node::Yes { exps, choice }) => (exps, choice),
                _ => match self.decide(ctx, &cur) {
                    Outcome::Yes(e) => (e, None),
                    other => panic!("certificate requested for an unsettled state: {other:?}"),
                },
            };
            let choice = choice.unwrap_or_else(|| {
                let h0 = self.candidates(&cur)[0];
                let restricted = self.euler(ctx, &cur, h0).expect("rank-2 Euler multiplicity exists");
                let child = &self.restricted(h0).child;
                let exp_restriction = match child.decide(ctx, &restricted) {
                    Outcome::Yes(e) => e,
                    other => panic!("restriction of a rank-2 state must be settled: {other:?}"),
                };
                Choice {
                    h0,
                    restricted,
                    exp_restriction,
                }
            });
            let mut deleted = cur.clone();
            deleted[choice.h0] -= 1;
            let exp_deletion = match self.decide(ctx, &deleted) {
                Outcome::Yes(e) => e,
                other => panic!("deletion along a chain must be settled: {other:?}"),
            };
            let child = &self.restricted(choice.h0).child;
            let restriction = (!child.is_low_rank(ctx, &choice.restricted))
                .then(|| Box::new(child.certificate(ctx, &choice.restricted)));
            steps.push(InductionStep {
                hyperplane: choice.h0,
                label: self.arr.label(choice.h0).to_string(),
                digest: digest(&cur),
                exp_deletion,
                exp_restriction: choice.exp_restriction,
                exponents: exps,
                restriction,
            });
            cur = deleted;
        }
        steps.reverse();
        InductionCertificate {
            dim: self.dim(),
            labels: self.arr.labels().to_vec(),
            target: nu.to_vec(),
            steps,
        }
    }

    /// μ* at H0 and the verdict on the Euler restriction.
    pub(crate) fn restriction_outcome(&self, ctx: &Context, nu: &[u32], h0: usize) -> Option<(Vec<u32>, Outcome)> {
        let mu_star = self.euler(ctx, nu, h0)?;
        let outcome = self.restricted(h0).child.decide(ctx, &mu_star);
        Some((mu_star, outcome))
    }

    /// Nested chain for a settled Euler restriction of rank ≥ 3.
    pub(crate) fn restriction_certificate(
        &self,
        ctx: &Context,
        h0: usize,
        mu_star: &[u32],
    ) -> Option<Box<InductionCertificate>> {
        let child = &self.restricted(h0).child;
        (!child.is_low_rank(ctx, mu_star)).then(|| Box::new(child.certificate(ctx, mu_star)))
    }

    /// |μ*| at each hyperplane of the support, in branch order.
    pub(crate) fn restriction_orders(&self, ctx: &Context, nu: &[u32]) -> Vec<(usize, Option<u64>)> {
        self.candidates(nu)
            .into_iter()
            .map(|h| (h, self.euler(ctx, nu, h).map(|v| v.iter().map(|&m| m as u64).sum())))
            .collect()
    }

    /// Certified exponents of a rank-2 localization, bypassing the caches.
    #[cfg(test)]
    pub(crate) fn flat_exps_uncached(&self, id: usize, local: &[u32]) -> [u64; 2] {
        let flat = &self.flats[id];
        let lines = (0..local.len())
            .filter(|&i| local[i] > 0)
            .map(|i| (flat.lines[i].clone(), local[i]))
            .collect();
        crate::rank2::certified_from_model(&PlaneModel::new(self.arr.order(), lines)).exponents
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::{arrangement_from_ints, MultiArrangement};
    use crate::rank2::rank2_exponents_exact;

    #[test]
    fn flat_exponents_match_direct_computation() {
        let arr = arrangement_from_ints(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, 0], &[1, 2, 0], &[0, 0, 1]]);
        let s = Searcher::new(arr.clone());
        let ctx = Context::new(1000, true);
        let id = s.flat_id(0, 1);
        for local in [vec![1, 1, 1, 1], vec![3, 1, 2, 1], vec![2, 0, 2, 2]] {
            let direct = rank2_exponents_exact(&MultiArrangement::new(arr.subarrangement(&s.flats[id].closed), local.clone()).unwrap())
                .unwrap()
                .exponents;
            assert_eq!(s.flat_exps(&ctx, id, &local), direct);
            assert_eq!(s.flat_exps_uncached(id, &local), direct);
        }
    }

    #[test]
    fn elementary_symmetric() {
        assert_eq!(elementary2(&[1, 2, 3]), 11);
        assert_eq!(pad(3, &[4, 2]), vec![0, 2, 4]);
    }
}
