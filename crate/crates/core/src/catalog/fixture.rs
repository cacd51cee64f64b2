//! Line-oriented fixture files:
//!
//! ```text
//! # comment
//! dim 3
//! zeta 3
//! form (0, 1, -1) mult 2
//! form (1, -z, 1 + z) mult 1
//! ```
//!
//! Hyperplanes are labelled `a1, a2, …` by position among the `form` lines.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::arrangement::{Arrangement, ArrangementError, LinearForm, MultiArrangement};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixtureError {
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: hyperplane repeats line {first} with a different multiplicity")]
    ConflictingDuplicate { line: usize, first: usize },
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
}

/// Shipped fixtures, by file name.
pub const FIXTURES: [&str; 8] = [
    "g33_a1.arr",
    "g33_a2_kappa.arr",
    "g34_a1sq.arr",
    "g34_a1a2_kappa.arr",
    "g34_a3_kappa_from_a1sq.arr",
    "g34_a2.arr",
    "g34_g333_kappa.arr",
    "g34_a3_kappa_from_a2.arr",
];

/// Directory holding the shipped fixtures.
pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Location of a shipped fixture inside the source tree.
pub fn fixture_path(name: &str) -> PathBuf {
    fixtures_dir().join(name)
}

pub fn load_fixture(path: impl AsRef<Path>) -> Result<MultiArrangement, FixtureError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| FixtureError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_fixture(&text)
}

fn split_top_level(body: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in body.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&body[start..]);
    parts
}

pub fn parse_fixture(text: &str) -> Result<MultiArrangement, FixtureError> {
    let mut dim: Option<usize> = None;
    let mut order = 1u32;
    let mut forms: Vec<LinearForm> = Vec::new();
    let mut labels = Vec::new();
    let mut mult = Vec::new();
    let mut seen: HashMap<LinearForm, (usize, usize)> = HashMap::new();
    let mut position = 0;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let err = |msg: &str| FixtureError::Parse {
            line: line_no,
            msg: msg.to_string(),
        };
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match keyword {
            "dim" => {
                if !forms.is_empty() {
                    return Err(err("dim must precede the forms"));
                }
                dim = Some(rest.trim().parse().map_err(|_| err("dim expects a positive integer"))?);
            }
            "zeta" => {
                if !forms.is_empty() {
                    return Err(err("zeta must precede the forms"));
                }
                order = rest.trim().parse().map_err(|_| err("zeta expects a positive integer"))?;
                if order == 0 {
                    return Err(err("zeta expects a positive integer"));
                }
            }
            "form" => {
                let d = dim.ok_or_else(|| err("form before dim"))?;
                let rest = rest.trim();
                if !rest.starts_with('(') {
                    return Err(err("expected '(' after form"));
                }
                let mut depth = 0;
                let mut close = None;
                for (i, c) in rest.char_indices() {
                    match c {
                        '(' => depth += 1,
                        ')' => {
                            depth -= 1;
                            if depth == 0 {
                                close = Some(i);
                                break;
                            }
                        }
                        _ => {}
                    }
                }
                let close = close.ok_or_else(|| err("unbalanced parentheses"))?;
                let coeffs = split_top_level(&rest[1..close])
                    .into_iter()
                    .map(|s| Scalar::parse(s, order).map_err(|e| err(&format!("coefficient '{}': {e}", s.trim()))))
                    .collect::<Result<Vec<_>, _>>()?;
                if coeffs.len() != d {
                    return Err(err(&format!("expected {d} coefficients, found {}", coeffs.len())));
                }
                let tail = rest[close + 1..].trim();
                let m: u32 = match tail.split_whitespace().collect::<Vec<_>>().as_slice() {
                    [] => 1,
                    ["mult", v] => v.parse().map_err(|_| err("mult expects a nonnegative integer"))?,
                    _ => return Err(err("expected 'mult <n>' after the form")),
                };
                position += 1;
                let form = LinearForm::new(coeffs).map_err(|e| err(&e.to_string()))?;
                if let Some(&(first, idx)) = seen.get(&form) {
                    if mult[idx] != m {
                        return Err(FixtureError::ConflictingDuplicate { line: line_no, first });
                    }
                    continue;
                }
                seen.insert(form.clone(), (line_no, forms.len()));
                forms.push(form);
                labels.push(format!("a{position}"));
                mult.push(m);
            }
            _ => return Err(err(&format!("unknown keyword '{keyword}'"))),
        }
    }
    let dim = dim.ok_or(FixtureError::Parse {
        line: 0,
        msg: "missing dim header".into(),
    })?;
    let arr = Arrangement::with_labels(dim, forms, labels)?;
    Ok(MultiArrangement::new(arr, mult)?)
}

/// Renders `m` in the fixture grammar, one labelled form per line.
pub fn write_fixture(m: &MultiArrangement) -> String {
    let arr = m.arrangement();
    let mut out = format!("dim {}\nzeta {}\n", arr.dim(), arr.order());
    for (i, form) in arr.forms().iter().enumerate() {
        out.push_str(&format!("# {}\nform {form} mult {}\n", arr.label(i), m.mult()[i]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_normalizes() {
        let m = parse_fixture("dim 2\nzeta 3\nform (2, 2*z) mult 3 # trailing\nform (0, -1)\n").unwrap();
        assert_eq!(m.mult(), &[3, 1]);
        assert_eq!(m.arrangement().form(0).coeffs()[1], Scalar::zeta(3));
        assert_eq!(m.arrangement().labels(), &["a1", "a2"]);
    }

    #[test]
    fn reports_line_numbers() {
        let e = parse_fixture("dim 2\n\nform (1, q) mult 1\n").unwrap_err();
        assert!(matches!(e, FixtureError::Parse { line: 3, .. }), "{e}");
        let e = parse_fixture("dim 2\nform (1, 1) mult 1\nform (2, 2) mult 2\n").unwrap_err();
        assert_eq!(e, FixtureError::ConflictingDuplicate { line: 3, first: 2 });
        assert!(parse_fixture("form (1) mult 1").is_err());
        assert!(parse_fixture("dim 2\nform (1, 0, 0)").is_err());
    }

    #[test]
    fn written_fixtures_parse_back() {
        for name in FIXTURES {
            let m = load_fixture(fixture_path(name)).unwrap();
            let back = parse_fixture(&write_fixture(&m)).unwrap();
            assert!(back.same_as(&m), "{name}");
            assert_eq!(back.mult(), m.mult());
        }
    }

    #[test]
    fn shipped_fixture_sizes() {
        let expect = [
            ("g33_a1.arr", 28, 28),
            ("g33_a2_kappa.arr", 14, 27),
            ("g34_a1sq.arr", 56, 56),
            ("g34_a1a2_kappa.arr", 30, 55),
            ("g34_a3_kappa_from_a1sq.arr", 25, 55),
            ("g34_a2.arr", 49, 49),
            ("g34_g333_kappa.arr", 21, 48),
            ("g34_a3_kappa_from_a2.arr", 25, 48),
        ];
        for (name, count, order) in expect {
            let m = load_fixture(fixture_path(name)).unwrap();
            assert_eq!((m.len(), m.order()), (count, order), "{name}");
        }
        assert!(load_fixture("/nonexistent.arr").is_err());
    }
}
