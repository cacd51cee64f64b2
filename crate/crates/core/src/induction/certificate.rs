use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::{check_addition_step, digest, InductionCertificate, InductionStep};
use crate::arrangement::{restrict_to_hyperplane, Arrangement, MultiArrangement};
use crate::rank2::{euler_multiplicity_cached, Rank2Cache};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {step}: {msg}")]
    Step { step: usize, msg: String },
    #[error("certificate does not match the arrangement: {0}")]
    Mismatch(String),
    #[error("malformed certificate: {0}")]
    Malformed(String),
}

fn fail(step: usize, msg: impl Into<String>) -> ReplayError {
    ReplayError::Step {
        step: step + 1,
        msg: msg.into(),
    }
}

/// Stable JSON layout: `steps` are `[exp(A', μ'), label, exp(A'', μ*)]`;
/// `restrictions` holds nested chains keyed by 1-based step number.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub dim: usize,
    pub labels: Vec<String>,
    pub target: Vec<u32>,
    pub exponents: Vec<u64>,
    pub steps: Vec<(Vec<u64>, String, Vec<u64>)>,
    pub digests: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub restrictions: BTreeMap<String, CertificateJson>,
}

impl From<&InductionCertificate> for CertificateJson {
    fn from(c: &InductionCertificate) -> CertificateJson {
        CertificateJson {
            dim: c.dim,
            labels: c.labels.clone(),
            target: c.target.clone(),
            exponents: c.exponents(),
            steps: c
                .steps
                .iter()
                .map(|s| (s.exp_deletion.clone(), s.label.clone(), s.exp_restriction.clone()))
                .collect(),
            digests: c.steps.iter().map(|s| s.digest.clone()).collect(),
            restrictions: c
                .steps
                .iter()
                .enumerate()
                .filter_map(|(i, s)| s.restriction.as_ref().map(|r| ((i + 1).to_string(), CertificateJson::from(&**r))))
                .collect(),
        }
    }
}

impl CertificateJson {
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("plain data serializes")
    }

    pub fn into_certificate(self) -> Result<InductionCertificate, ReplayError> {
        let bad = |m: String| ReplayError::Malformed(m);
        if self.digests.len() != self.steps.len() {
            return Err(bad("one digest per step expected".into()));
        }
        let mut restrictions = self.restrictions;
        let n = self.steps.len();
        let mut steps = Vec::with_capacity(n);
        for (i, ((exp_deletion, label, exp_restriction), digest)) in
            self.steps.iter().cloned().zip(self.digests).enumerate()
        {
            let hyperplane = self
                .labels
                .iter()
                .position(|l| *l == label)
                .ok_or_else(|| bad(format!("unknown label {label}")))?;
            let exponents = if i + 1 < n {
                self.steps[i + 1].0.clone()
            } else {
                self.exponents.clone()
            };
            let restriction = match restrictions.remove(&(i + 1).to_string()) {
                Some(r) => Some(Box::new(r.into_certificate()?)),
                None => None,
            };
            steps.push(InductionStep {
                hyperplane,
                label,
                digest,
                exp_deletion,
                exp_restriction,
                exponents,
                restriction,
            });
        }
        Ok(InductionCertificate {
            dim: self.dim,
            labels: self.labels,
            target: self.target,
            steps,
        })
    }
}

/// Re-derives every step from scratch: μ* and the restriction exponents
/// through the rank-2 module, nested chains recursively, and the addition
/// test at each row. Returns the final exponents.
pub fn replay(cert: &InductionCertificate, arr: &Arrangement) -> Result<Vec<u64>, ReplayError> {
    replay_with(cert, arr, &Rank2Cache::new())
}

fn replay_with(cert: &InductionCertificate, arr: &Arrangement, cache: &Rank2Cache) -> Result<Vec<u64>, ReplayError> {
    if cert.labels != arr.labels() || cert.dim != arr.dim() || cert.target.len() != arr.len() {
        return Err(ReplayError::Mismatch("labels, dimension or hyperplane count differ".into()));
    }
    let mut nu = vec![0u32; arr.len()];
    let mut exps = vec![0u64; arr.dim()];
    for (i, step) in cert.steps.iter().enumerate() {
        let h0 = step.hyperplane;
        if h0 >= arr.len() || arr.label(h0) != step.label {
            return Err(fail(i, format!("hyperplane {} does not carry label {}", h0, step.label)));
        }
        if step.exp_deletion != exps {
            return Err(fail(i, format!("exp(A') recorded {:?}, replayed {:?}", step.exp_deletion, exps)));
        }
        nu[h0] += 1;
        if digest(&nu) != step.digest {
            return Err(fail(i, "multiplicity digest differs"));
        }
        let support: Vec<usize> = (0..nu.len()).filter(|&j| nu[j] > 0).collect();
        let m = MultiArrangement::new(arr.clone(), nu.clone()).expect("lengths agree");
        let local_h0 = support.iter().position(|&j| j == h0).expect("h0 in support");
        let euler = euler_multiplicity_cached(&m, local_h0, cache).map_err(|e| fail(i, e.to_string()))?;
        let restricted = &euler.multi;
        let exp_restriction = if restricted.arrangement().rank() <= 2 {
            let mut v = vec![0u64; arr.dim() - 1];
            if !restricted.is_empty() {
                let e = crate::rank2::rank2_exponents(restricted).map_err(|e| fail(i, e.to_string()))?;
                let nonzero: Vec<u64> = e.exponents.into_iter().filter(|&x| x > 0).collect();
                let k = v.len() - nonzero.len();
                v[k..].copy_from_slice(&nonzero);
                v.sort_unstable();
            }
            v
        } else {
            let nested = step
                .restriction
                .as_ref()
                .ok_or_else(|| fail(i, "restriction of rank >= 3 without a nested chain"))?;
            let full = restrict_to_hyperplane(arr, h0).arrangement;
            let mut mu_star = vec![0u32; full.len()];
            for (y, f) in restricted.arrangement().forms().iter().enumerate() {
                let j = full.index_of(f).ok_or_else(|| fail(i, "restricted hyperplane not found"))?;
                mu_star[j] = restricted.mult()[y];
            }
            if nested.target != mu_star {
                return Err(fail(i, "nested chain targets a different Euler multiplicity"));
            }
            replay_with(nested, &full, cache).map_err(|e| fail(i, format!("nested: {e}")))?
        };
        if exp_restriction != step.exp_restriction {
            return Err(fail(
                i,
                format!("exp(A'') recorded {:?}, replayed {:?}", step.exp_restriction, exp_restriction),
            ));
        }
        let next = check_addition_step(&exps, &exp_restriction)
            .map_err(|e| fail(i, e.to_string()))?
            .ok_or_else(|| fail(i, format!("{exp_restriction:?} does not embed in {exps:?}")))?;
        if next != step.exponents {
            return Err(fail(i, format!("exp(A) recorded {:?}, replayed {:?}", step.exponents, next)));
        }
        exps = next;
    }
    if nu != cert.target {
        return Err(ReplayError::Mismatch("chain does not end at the target multiplicity".into()));
    }
    Ok(exps)
}

/// Where a rendered table begins.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableStart {
    /// Every step from the empty arrangement.
    Empty,
    /// From the first step whose pre-state is the simple multiplicity on the
    /// target support.
    Simple,
}

fn first_row(cert: &InductionCertificate, start: TableStart) -> usize {
    match start {
        TableStart::Empty => 0,
        TableStart::Simple => {
            let simple: Vec<u32> = cert.target.iter().map(|&m| m.min(1)).collect();
            (0..=cert.steps.len())
                .find(|&i| cert.state_before(i) == simple)
                .unwrap_or(0)
        }
    }
}

fn set(e: &[u64]) -> String {
    let inner: Vec<String> = e.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

/// Three aligned columns exp(A', μ'), the added hyperplane and exp(A'', μ*),
/// followed by the final exponents. An empty chain renders only the header.
pub fn emit_induction_table(cert: &InductionCertificate, start: TableStart) -> String {
    let header = ["exp(A',mu')".to_string(), "H".to_string(), "exp(A'',mu*)".to_string()];
    let rows: Vec<[String; 3]> = cert.steps[first_row(cert, start)..]
        .iter()
        .map(|s| [set(&s.exp_deletion), s.label.clone(), set(&s.exp_restriction)])
        .collect();
    let mut width = [0; 3];
    for r in std::iter::once(&header).chain(&rows) {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |r: &[String; 3]| {
        let cells: Vec<String> = r
            .iter()
            .zip(width)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        cells.join("  ").trim_end().to_string()
    };
    let mut out = vec![line(&header), "-".repeat(width.iter().sum::<usize>() + 4)];
    out.extend(rows.iter().map(line));
    if !rows.is_empty() {
        out.push(set(&cert.exponents()));
    }
    out.join("\n") + "\n"
}

/// Machine-readable counterpart of [`emit_induction_table`].
pub fn table_json(cert: &InductionCertificate, start: TableStart) -> Value {
    let rows: Vec<Value> = cert.steps[first_row(cert, start)..]
        .iter()
        .map(|s| json!([s.exp_deletion, s.label, s.exp_restriction]))
        .collect();
    json!({
        "columns": ["exp(A',mu')", "H", "exp(A'',mu*)"],
        "rows": rows,
        "exponents": cert.exponents(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::arrangement_from_ints;
    use crate::induction::{is_inductively_free, Verdict};

    fn braid_cert() -> (MultiArrangement, InductionCertificate) {
        let arr = arrangement_from_ints(&[&[1, -1, 0], &[1, 0, -1], &[0, 1, -1], &[1, 0, 0]]);
        let m = MultiArrangement::new(arr, vec![2, 1, 1, 2]).unwrap();
        match is_inductively_free(&m, 10_000) {
            Verdict::Yes(c) => (m, c),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn replay_and_json_round_trip() {
        let (m, cert) = braid_cert();
        assert_eq!(replay(&cert, m.arrangement()).unwrap(), cert.exponents());
        let text = serde_json::to_string(&CertificateJson::from(&cert)).unwrap();
        let back: CertificateJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.into_certificate().unwrap(), cert);
    }

    #[test]
    fn tampering_is_detected() {
        let (m, cert) = braid_cert();
        let mut bad = cert.clone();
        bad.steps[2].exp_restriction[0] += 1;
        assert!(matches!(replay(&bad, m.arrangement()), Err(ReplayError::Step { step: 3, .. })));
        let mut short = cert;
        short.steps.pop();
        assert!(replay(&short, m.arrangement()).is_err());
    }

    #[test]
    fn tables() {
        let (_, cert) = braid_cert();
        let t = emit_induction_table(&cert, TableStart::Empty);
        assert_eq!(t.lines().count(), cert.steps.len() + 3);
        assert!(t.ends_with(&format!("{}\n", set(&cert.exponents()))));
        let simple = emit_induction_table(&cert, TableStart::Simple);
        assert_eq!(simple.lines().count(), 2 + 2 + 1);
        let empty = InductionCertificate {
            dim: 2,
            labels: vec![],
            target: vec![],
            steps: vec![],
        };
        assert_eq!(emit_induction_table(&empty, TableStart::Empty).lines().count(), 2);
        assert_eq!(table_json(&cert, TableStart::Simple)["rows"].as_array().unwrap().len(), 2);
    }
}
