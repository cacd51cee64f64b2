use std::process::ExitCode;

use multiarr::catalog::fixtures_dir;
use multiarr::verify::{run_check, Status, CHECKS};

fn main() -> ExitCode {
    let dir = fixtures_dir();
    let mut failures = Vec::new();
    for check in CHECKS.iter() {
        let r = run_check(check, &dir);
        let mark = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Limitation => "LIMITATION",
        };
        println!("criterion {:>2} {:<10} {:<10} {}", r.id, r.key, mark, r.detail);
        if r.status == Status::Fail {
            failures.push(r.id);
        }
    }
    if failures.is_empty() {
        println!("acceptance: ok");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failures:?}");
        ExitCode::FAILURE
    }
}
