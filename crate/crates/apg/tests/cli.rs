//! End-to-end command-line tests: golden outputs, exit codes, advisory
//! degree handling, and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_str()
        .expect("utf-8 path")
        .to_string()
}

fn golden(name: &str) -> Vec<u8> {
    let path: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read(&path).unwrap_or_else(|e| panic!("golden file {path:?}: {e}"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_golden(args: &[&str], name: &str) {
    let out = run(args);
    assert!(
        out.status.success(),
        "{name}: exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        out.stdout,
        golden(name),
        "{name}: output drifted:\n{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn golden_outputs_are_stable() {
    let intro = fixture("intro.apg");
    let single3 = fixture("single3.apg");
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["validate", &intro], "validate_intro.json"),
        (vec!["invariants", &intro], "invariants_intro.json"),
        (vec!["invariants", &single3, "--k", "1"], "invariants_single3.json"),
        (vec!["rank", &intro], "rank_intro.json"),
        (vec!["reduce", &intro], "reduce_intro.json"),
        (vec!["canonical", &intro], "canonical_intro.json"),
        (vec!["admissible", &single3], "admissible_single3.json"),
        (vec!["export-dot", &intro], "export_dot_intro.txt"),
    ];
    for (args, name) in cases {
        assert_golden(&args, name);
    }
    assert_golden(
        &["equiv", &fixture("pos7.apg"), &fixture("neg7.apg")],
        "equiv_pos7_neg7.json",
    );
    assert_golden(
        &[
            "equiv",
            &fixture("triple_4_15_30.apg"),
            &fixture("triple_m6_m5_60.apg"),
        ],
        "equiv_triples.json",
    );
    assert_golden(&["betti", &fixture("s2cp2_2.apg")], "betti_s2cp2_2.json");
    assert_golden(
        &["betti", &fixture("marked_pair.apg"), "--k", "2"],
        "betti_marked_pair_k2.json",
    );
    assert_golden(
        &["obstructions", &fixture("theoremb_3_1.apg")],
        "obstructions_theoremb.json",
    );
    assert_golden(
        &["enumerate", "--rank-max", "1", "--alpha-max", "2", "--label-max", "1"],
        "enumerate_small.json",
    );
    assert_golden(
        &["recover-triples", "--triple", "4,15,30"],
        "recover_4_15_30.json",
    );
    assert_golden(&["family", "hcp3", "--index", "1"], "family_hcp3_1.json");
    assert_golden(
        &["validate", &fixture("cyclic.apg"), "--format", "text"],
        "validate_cyclic.txt",
    );
}

#[test]
fn validation_reports_without_failing() {
    let out = run(&["validate", &fixture("cyclic.apg"), "--format", "text"]);
    assert_eq!(out.status.code(), Some(0), "reports are not errors");
    let text = String::from_utf8(out.stdout).expect("utf-8");
    assert!(text.contains("component 1: not simply-connected"));
}

#[test]
fn equivalent_mirror_weights() {
    let out = run(&[
        "equiv",
        &fixture("pos7.apg"),
        &fixture("neg7.apg"),
        "--format",
        "text",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "equivalent\n");
}

#[test]
fn exit_codes_separate_domain_and_usage_errors() {
    let out = run(&["rank", "definitely-missing.apg"]);
    assert_eq!(out.status.code(), Some(1), "unreadable input is a domain error");

    let out = run(&["rank", &fixture("single3.apg"), "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2), "unknown flags are usage errors");

    let out = run(&["rank", &fixture("single3.apg"), "--format", "dot"]);
    assert_eq!(out.status.code(), Some(2), "dot output needs a graph command");

    let out = run(&["invariants", &fixture("single3.apg"), "--k", "0"]);
    assert_eq!(out.status.code(), Some(2), "degree zero is rejected");

    let out = run(&["recover-triples"]);
    assert_eq!(out.status.code(), Some(2), "an input source is required");

    let out = run(&["equiv", &fixture("k2_advisory.apg"), &fixture("single3.apg")]);
    assert_eq!(out.status.code(), Some(1), "mismatched degrees are a domain error");
}

#[test]
fn advisory_degree_yields_to_the_flag() {
    let out = run(&["invariants", &fixture("k2_advisory.apg")]);
    let text = String::from_utf8(out.stdout).expect("utf-8");
    assert!(text.contains("\"k\": 2"), "advisory degree applies by default");

    let out = run(&["invariants", &fixture("k2_advisory.apg"), "--k", "1"]);
    let text = String::from_utf8(out.stdout).expect("utf-8");
    assert!(text.contains("\"k\": 1"), "explicit flag wins");
}

#[test]
fn already_reduced_input_round_trips() {
    let out = run(&["reduce", &fixture("single3.apg"), "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "u a alpha=3\n");
}

#[test]
fn closed_output_pipe_exits_quietly() {
    use std::io::Read;
    use std::process::Stdio;

    let mut child = Command::new(env!("CARGO_BIN_EXE_apg"))
        .args(["enumerate", "--rank-max", "2", "--alpha-max", "6", "--label-max", "1"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");

    let mut stdout = child.stdout.take().expect("piped stdout");
    let mut first = [0u8; 64];
    stdout.read_exact(&mut first).expect("some output arrives");
    drop(stdout);

    let out = child.wait_with_output().expect("child finishes");
    assert_eq!(out.status.code(), Some(0), "a closed pipe is not an error");
    assert!(
        out.stderr.is_empty(),
        "no panic or complaint on stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["enumerate", "--rank-max", "2", "--alpha-max", "3"];
    let baseline = run(&args).stdout;
    assert!(!baseline.is_empty());
    for trial in 0..10 {
        let sequential = run(&args).stdout;
        let parallel = run(&["enumerate", "--rank-max", "2", "--alpha-max", "3", "--parallel"])
            .stdout;
        assert_eq!(baseline, sequential, "sequential trial {trial}");
        assert_eq!(baseline, parallel, "parallel trial {trial}");
    }
}
