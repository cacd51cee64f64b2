//! Published induction tables for the shipped Ziegler restrictions, and the
//! parent hyperplanes they are restricted at.
//!
//! Each table starts at the simple arrangement and raises one multiplicity
//! per row. Rows carry the hyperplane label and the exponents of the Euler
//! restriction at that step.

use std::path::Path;

use thiserror::Error;

use super::{load_fixture, FixtureError};
use crate::arrangement::{
    apply_coordinate_change, ziegler_multiplicity, ArrangementError, CoordinateChange, MultiArrangement,
};
use crate::induction::{chain_through_simple, InductionCertificate};

#[derive(Debug, Clone, Copy)]
pub struct InductionTable {
    pub name: &'static str,
    pub fixture: &'static str,
    /// Exponents of the underlying simple arrangement.
    pub start: &'static [u64],
    /// (label, exponents of the restriction) in order.
    pub rows: &'static [(&'static str, &'static [u64])],
    pub exponents: &'static [u64],
}

pub const TABLES: [InductionTable; 5] = [
    InductionTable {
        name: "(G33,A2),kappa",
        fixture: "g33_a2_kappa.arr",
        start: &[1, 6, 7],
        rows: &[
            ("a5", &[6, 7]),
            ("a5", &[6, 7]),
            ("a8", &[6, 7]),
            ("a8", &[6, 7]),
            ("a4", &[6, 7]),
            ("a11", &[6, 7]),
            ("a7", &[6, 7]),
            ("a12", &[7, 8]),
            ("a10", &[7, 8]),
            ("a9", &[7, 8]),
            ("a6", &[7, 9]),
            ("a2", &[7, 9]),
            ("a1", &[7, 9]),
        ],
        exponents: &[7, 9, 11],
    },
    InductionTable {
        name: "(G34,A1A2),kappa",
        fixture: "g34_a1a2_kappa.arr",
        start: &[1, 13, 16],
        rows: &[
            ("a18", &[13, 16]),
            ("a18", &[13, 16]),
            ("a22", &[13, 16]),
            ("a9", &[13, 16]),
            ("a8", &[13, 16]),
            ("a7", &[13, 16]),
            ("a13", &[13, 16]),
            ("a6", &[13, 16]),
            ("a10", &[13, 16]),
            ("a23", &[13, 16]),
            ("a5", &[13, 16]),
            ("a19", &[13, 16]),
            ("a19", &[13, 16]),
            ("a1", &[13, 16]),
            ("a1", &[13, 16]),
            ("a1", &[13, 16]),
            ("a28", &[13, 17]),
            ("a21", &[13, 17]),
            ("a20", &[13, 17]),
            ("a16", &[13, 19]),
            ("a14", &[13, 19]),
            ("a17", &[13, 19]),
            ("a15", &[13, 19]),
            ("a4", &[13, 19]),
            ("a2", &[13, 19]),
        ],
        exponents: &[13, 19, 23],
    },
    InductionTable {
        name: "(G34,A3),kappa from (G34,A1^2)",
        fixture: "g34_a3_kappa_from_a1sq.arr",
        start: &[1, 11, 13],
        rows: &[
            ("a23", &[11, 13]),
            ("a20", &[11, 13]),
            ("a19", &[11, 13]),
            ("a18", &[11, 13]),
            ("a17", &[11, 13]),
            ("a13", &[11, 13]),
            ("a12", &[11, 13]),
            ("a11", &[11, 13]),
            ("a10", &[11, 13]),
            ("a9", &[11, 13]),
            ("a4", &[11, 13]),
            ("a2", &[11, 13]),
            ("a14", &[13, 13]),
            ("a8", &[13, 13]),
            ("a6", &[13, 13]),
            ("a1", &[13, 13]),
            ("a14", &[13, 13]),
            ("a14", &[13, 16]),
            ("a8", &[13, 14]),
            ("a8", &[13, 17]),
            ("a6", &[13, 15]),
            ("a6", &[13, 18]),
            ("a1", &[13, 16]),
            ("a1", &[13, 19]),
            ("a21", &[13, 19]),
            ("a21", &[13, 19]),
            ("a7", &[13, 19]),
            ("a5", &[13, 19]),
            ("a7", &[13, 19]),
            ("a5", &[13, 19]),
        ],
        exponents: &[13, 19, 23],
    },
    InductionTable {
        name: "(G34,A3),kappa from (G34,A2)",
        fixture: "g34_a3_kappa_from_a2.arr",
        start: &[1, 11, 13],
        rows: &[
            ("a6", &[11, 13]),
            ("a6", &[11, 13]),
            ("a15", &[11, 13]),
            ("a11", &[11, 13]),
            ("a12", &[11, 13]),
            ("a4", &[11, 13]),
            ("a4", &[11, 13]),
            ("a1", &[11, 13]),
            ("a1", &[11, 13]),
            ("a19", &[11, 13]),
            ("a19", &[11, 13]),
            ("a22", &[12, 13]),
            ("a21", &[12, 13]),
            ("a20", &[12, 13]),
            ("a18", &[13, 14]),
            ("a17", &[13, 14]),
            ("a16", &[13, 14]),
            ("a14", &[13, 15]),
            ("a13", &[13, 15]),
            ("a10", &[13, 16]),
            ("a9", &[13, 16]),
            ("a8", &[13, 16]),
            ("a7", &[13, 16]),
        ],
        exponents: &[13, 16, 19],
    },
    InductionTable {
        name: "(G34,G(3,3,3)),kappa",
        fixture: "g34_g333_kappa.arr",
        start: &[1, 7, 13],
        rows: &[
            ("a12", &[7, 13]),
            ("a11", &[7, 13]),
            ("a10", &[7, 13]),
            ("a9", &[7, 13]),
            ("a8", &[7, 13]),
            ("a7", &[7, 13]),
            ("a6", &[7, 13]),
            ("a4", &[7, 13]),
            ("a1", &[7, 13]),
            ("a4", &[10, 13]),
            ("a7", &[10, 13]),
            ("a8", &[10, 13]),
            ("a9", &[10, 13]),
            ("a10", &[10, 13]),
            ("a12", &[10, 13]),
            ("a11", &[10, 13]),
            ("a6", &[10, 13]),
            ("a1", &[10, 13]),
            ("a17", &[13, 16]),
            ("a17", &[13, 16]),
            ("a17", &[13, 16]),
            ("a5", &[13, 16]),
            ("a5", &[13, 16]),
            ("a2", &[13, 16]),
            ("a2", &[13, 16]),
            ("a5", &[13, 16]),
            ("a2", &[13, 16]),
        ],
        exponents: &[13, 16, 19],
    },
];

pub fn find_table(name_or_fixture: &str) -> Option<&'static InductionTable> {
    let key = name_or_fixture.trim_end_matches(".arr");
    TABLES
        .iter()
        .find(|t| t.name == name_or_fixture || t.fixture.trim_end_matches(".arr") == key)
}

/// A shipped Ziegler restriction together with the parent it comes from.
#[derive(Debug, Clone, Copy)]
pub struct CrossDerivation {
    pub parent: &'static str,
    /// Label of H0 in the parent fixture.
    pub hyperplane: &'static str,
    pub child: &'static str,
}

pub const CROSS_DERIVATIONS: [CrossDerivation; 5] = [
    CrossDerivation {
        parent: "g33_a1.arr",
        hyperplane: "a1",
        child: "g33_a2_kappa.arr",
    },
    CrossDerivation {
        parent: "g34_a1sq.arr",
        hyperplane: "a2",
        child: "g34_a1a2_kappa.arr",
    },
    CrossDerivation {
        parent: "g34_a1sq.arr",
        hyperplane: "a1",
        child: "g34_a3_kappa_from_a1sq.arr",
    },
    CrossDerivation {
        parent: "g34_a2.arr",
        hyperplane: "a6",
        child: "g34_g333_kappa.arr",
    },
    CrossDerivation {
        parent: "g34_a2.arr",
        hyperplane: "a1",
        child: "g34_a3_kappa_from_a2.arr",
    },
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
    #[error("unknown hyperplane label '{0}'")]
    UnknownLabel(String),
    #[error("chain rejected: {0}")]
    Chain(String),
    #[error("row {row} ({label}): restriction exponents {computed:?}, table has {printed:?}")]
    RowMismatch {
        row: usize,
        label: String,
        computed: Vec<u64>,
        printed: Vec<u64>,
    },
    #[error("{what}: computed {computed:?}, table has {printed:?}")]
    ExponentMismatch {
        what: &'static str,
        computed: Vec<u64>,
        printed: Vec<u64>,
    },
    #[error("order identity fails: |kappa| = {order} but the parent has {parent} hyperplanes")]
    OrderIdentity { parent: usize, order: u64 },
    #[error("Ziegler restriction differs from the fixture in {0} hyperplanes")]
    CrossMismatch(usize),
}

/// Coordinate change taking a computed Ziegler restriction onto its shipped
/// child fixture. All shipped pairs already share coordinates.
pub fn frozen_coordinate_change() -> CoordinateChange {
    CoordinateChange::identity(3, 3)
}

/// Recomputes a child fixture from its parent and compares.
pub fn cross_derive(dir: &Path, pair: &CrossDerivation) -> Result<MultiArrangement, TableError> {
    let parent = load_fixture(dir.join(pair.parent))?;
    let child = load_fixture(dir.join(pair.child))?;
    if child.order() + 1 != parent.len() as u64 {
        return Err(TableError::OrderIdentity {
            parent: parent.len(),
            order: child.order(),
        });
    }
    let h0 = parent
        .arrangement()
        .find_label(pair.hyperplane)
        .ok_or_else(|| TableError::UnknownLabel(pair.hyperplane.into()))?;
    let z = ziegler_multiplicity(parent.arrangement(), h0)?;
    let moved = apply_coordinate_change(&z.multi, &frozen_coordinate_change());
    if moved.same_as(&child) {
        return Ok(moved);
    }
    let want = child.canonical_pairs();
    let got = moved.canonical_pairs();
    let differing = got.iter().filter(|p| !want.contains(p)).count() + want.iter().filter(|p| !got.contains(p)).count();
    Err(TableError::CrossMismatch(differing))
}

/// Replays a table's hyperplane order on its fixture, checking every row's
/// restriction exponents and the endpoints against the printed values.
pub fn replay_table(dir: &Path, table: &InductionTable, budget: u64) -> Result<InductionCertificate, TableError> {
    let m = load_fixture(dir.join(table.fixture))?;
    let order = table
        .rows
        .iter()
        .map(|(l, _)| m.arrangement().find_label(l).ok_or_else(|| TableError::UnknownLabel(l.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let cert = chain_through_simple(&m, &order, budget).map_err(TableError::Chain)?;
    let first = cert.steps.len() - table.rows.len();
    let start = cert.steps[first].exp_deletion.clone();
    if start != table.start {
        return Err(TableError::ExponentMismatch {
            what: "simple arrangement",
            computed: start,
            printed: table.start.to_vec(),
        });
    }
    for (i, (step, (label, printed))) in cert.steps[first..].iter().zip(table.rows).enumerate() {
        if step.exp_restriction != *printed {
            return Err(TableError::RowMismatch {
                row: i + 1,
                label: label.to_string(),
                computed: step.exp_restriction.clone(),
                printed: printed.to_vec(),
            });
        }
    }
    if cert.exponents() != table.exponents {
        return Err(TableError::ExponentMismatch {
            what: "final exponents",
            computed: cert.exponents(),
            printed: table.exponents.to_vec(),
        });
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{fixture_path, fixtures_dir};

    #[test]
    fn row_counts_match_orders() {
        for t in &TABLES {
            let m = load_fixture(fixture_path(t.fixture)).unwrap();
            assert_eq!(t.rows.len() as u64, m.order() - m.len() as u64, "{}", t.name);
            assert_eq!(t.start.iter().sum::<u64>(), m.len() as u64);
            assert_eq!(t.exponents.iter().sum::<u64>(), m.order());
            // each printed row is one valid addition step
            let mut e = t.start.to_vec();
            for (_, r) in t.rows {
                e = crate::induction::check_addition_step(&e, r).unwrap().unwrap();
            }
            assert_eq!(e, t.exponents);
        }
    }

    #[test]
    fn lookup() {
        assert_eq!(find_table("g33_a2_kappa").unwrap().exponents, &[7, 9, 11]);
        assert!(find_table("g33_a1.arr").is_none());
    }

    #[test]
    fn cross_derivations_hold() {
        for pair in &CROSS_DERIVATIONS {
            cross_derive(&fixtures_dir(), pair).unwrap_or_else(|e| panic!("{} -> {}: {e}", pair.parent, pair.child));
        }
    }

    #[test]
    fn smallest_table_replays() {
        let cert = replay_table(&fixtures_dir(), &TABLES[0], 100_000).unwrap();
        assert_eq!(cert.exponents(), vec![7, 9, 11]);
    }
}
