//! Acceptance check for the report pipeline: worker count must never leak
//! into the bytes a run produces. Companion to the numeric acceptance suite
//! in the core crate; this half owns criterion 12.

use std::process::Command;

fn capture(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_biasmoments"))
        .args(args)
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0), "run failed: {args:?}");
    out.stdout
}

#[test]
fn criterion_12_reports_identical_across_worker_counts() {
    let cases: &[&[&str]] = &[
        &[
            "sweep-elliptic",
            "--family",
            "fam1",
            "--params",
            "2,3,1,5,7",
            "--pmax",
            "1000",
            "--format",
            "csv",
        ],
        &[
            "sweep-elliptic",
            "--family",
            "fam2",
            "--params",
            "1,2,3,4,5",
            "--pmax",
            "1000",
            "--format",
            "json",
        ],
        &["verify-closed-forms", "--pmax", "200", "--format", "csv"],
        &[
            "verify-constant-j",
            "--pmax",
            "60",
            "--kmax",
            "3",
            "--rmax",
            "3",
            "--format",
            "json",
        ],
    ];
    let mut pass = true;
    for case in cases {
        let single = capture(&[case, &["--workers", "1"][..]].concat());
        let eight = capture(&[case, &["--workers", "8"][..]].concat());
        if single != eight {
            pass = false;
            eprintln!("byte mismatch between worker counts for {case:?}");
        }
    }
    println!(
        "criterion 12: {} report bytes identical at worker counts 1 and 8 across {} runs",
        if pass { "PASS" } else { "FAIL" },
        cases.len()
    );
    assert!(pass, "reports must not depend on worker count");
}
