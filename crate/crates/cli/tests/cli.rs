use std::path::Path;
use std::process::{Command, Output};

use multiarr::catalog::{fixtures_dir, load_fixture};
use multiarr::induction::{replay, CertificateJson};
use serde_json::Value;

fn multiarr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multiarr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let o = multiarr(&all);
    (o.status.code().unwrap(), serde_json::from_slice(&o.stdout).unwrap())
}

#[test]
fn lattice_counts_by_rank() {
    let (code, v) = json(&["lattice", "--spec", "A:3:3:0"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "ok");
    assert_eq!(v["counts"], serde_json::json!([1, 9, 12, 1]));
}

#[test]
fn lattice_respects_max_rank() {
    let (_, v) = json(&["lattice", "--spec", "A:3:3:0", "--max-rank", "2", "--full"]);
    assert_eq!(v["counts"], serde_json::json!([1, 9, 12]));
    let flats = v["flats"].as_array().unwrap();
    assert_eq!(flats.len(), 22);
    assert!(flats.iter().all(|f| f["rank"].as_u64().unwrap() <= 2));
}

#[test]
fn missing_fixture_is_an_error() {
    let o = multiarr(&["lattice", "--fixture", "/nonexistent/file.arr"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no fixture"));
    let (code, v) = json(&["charpoly", "--fixture", "/nonexistent/file.arr"]);
    assert_eq!(code, 3);
    assert_eq!(v["status"], "error");
}

#[test]
fn input_is_required() {
    let (code, v) = json(&["charpoly"]);
    assert_eq!(code, 3);
    assert!(v["message"].as_str().unwrap().contains("--fixture"));
}

#[test]
fn charpoly_splits() {
    let (_, v) = json(&["charpoly", "--spec", "A:3:3:0"]);
    assert_eq!(v["roots"], serde_json::json!([1, 4, 4]));
}

#[test]
fn kappa_is_inductively_free_with_table() {
    let o = multiarr(&["indfree", "--fixture", "g33_a2_kappa.arr"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("exponents {7,9,11}"));
    let (_, v) = json(&["indfree", "--fixture", "g33_a2_kappa.arr"]);
    assert_eq!(v["verdict"], "yes");
    assert_eq!(v["exponents"], serde_json::json!([7, 9, 11]));
    assert_eq!(v["table"]["rows"].as_array().unwrap().len(), 13);
    assert_eq!(v["certificate"]["steps"].as_array().unwrap().len(), 27);
}

#[test]
fn g333_is_not_inductively_free() {
    let (code, v) = json(&["indfree", "--spec", "A:3:3:0"]);
    assert_eq!(code, 1);
    assert_eq!(v["status"], "refuted");
    assert_eq!(v["verdict"], "no");
}

#[test]
fn ziegler_restriction_of_intermediate() {
    let (code, v) = json(&["indfree", "--spec", "A:3:4:0", "--ziegler", "H_{1,2}(1)"]);
    assert_eq!(code, 0);
    assert_eq!(v["exponents"], serde_json::json!([4, 6, 7]));
}

#[test]
fn ziegler_output_reads_as_a_fixture() {
    let o = multiarr(&["ziegler", "--spec", "A:3:4:0", "--at", "H_{1,2}(1)"]);
    assert_eq!(o.status.code(), Some(0));
    let m = multiarr::catalog::parse_fixture(&stdout(&o)).unwrap();
    assert_eq!(m.order(), 17);
}

#[test]
fn unknown_hyperplane_is_reported() {
    let (code, v) = json(&["euler", "--spec", "A:3:3:0", "--at", "nope"]);
    assert_eq!(code, 3);
    assert!(v["message"].as_str().unwrap().contains("nope"));
}

#[test]
fn refuter_outcomes() {
    let (code, v) = json(&["refute", "--fixture", "g33_a2_kappa.arr", "--exponents", "7,9,11"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "chain");
    let (code, v) = json(&["refute", "--fixture", "g33_a2_kappa.arr", "--exponents", "7,10,10"]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "refuted");
}

#[test]
fn refuter_on_a_plane_finds_a_chain() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plane.arr");
    std::fs::write(
        &path,
        "dim 2\nzeta 3\nform (1, 0) mult 2\nform (0, 1) mult 1\nform (1, -1) mult 1\n",
    )
    .unwrap();
    let (code, v) = json(&["refute", "--fixture", path.to_str().unwrap(), "--exponents", "2,2"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "chain");
}

#[test]
fn shipped_table_replays() {
    let (code, v) = json(&["table", "--fixture", "g33_a2_kappa.arr"]);
    assert_eq!(code, 0);
    assert_eq!(v["name"], "(G33,A2),kappa");
    assert_eq!(v["exponents"], serde_json::json!([7, 9, 11]));
}

#[test]
fn verify_selected_checks() {
    let o = multiarr(&["verify-paper", "--only", "tables"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("PASS"));
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn corrupted_fixture_is_named() {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(fixtures_dir()).unwrap() {
        let p = entry.unwrap().path();
        std::fs::copy(&p, dir.path().join(p.file_name().unwrap())).unwrap();
    }
    let target = dir.path().join("g33_a2_kappa.arr");
    let text = std::fs::read_to_string(&target).unwrap();
    let bumped = text.replacen("form (-1, 1, 3) mult 1", "form (-1, 1, 3) mult 2", 1);
    assert_ne!(text, bumped);
    std::fs::write(&target, bumped).unwrap();
    let o = multiarr(&[
        "verify-paper",
        "--only",
        "fixtures",
        "--fixtures",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert!(text.contains("FAIL"), "{text}");
    assert!(text.contains("order identity"), "{text}");
}

#[test]
fn json_certificate_replays() {
    let (_, v) = json(&["indfree", "--fixture", "g34_a1a2_kappa.arr"]);
    let cert: CertificateJson = serde_json::from_value(v["certificate"].clone()).unwrap();
    let cert = cert.into_certificate().unwrap();
    let m = load_fixture(Path::new(&fixtures_dir()).join("g34_a1a2_kappa.arr")).unwrap();
    assert_eq!(replay(&cert, m.arrangement()).unwrap(), vec![13, 19, 23]);
}

#[test]
fn json_is_deterministic_across_runs_and_threads() {
    let args = |t: &'static str| ["--json", "--threads", t, "indfree", "--fixture", "g34_a3_kappa_from_a2.arr"];
    let a = multiarr(&args("1")).stdout;
    let b = multiarr(&args("1")).stdout;
    let c = multiarr(&args("4")).stdout;
    assert_eq!(a, b);
    assert_eq!(a, c);
}
