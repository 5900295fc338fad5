use std::process::{Command, Output};

fn housing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_housing"))
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn run_prints_the_allocation_and_checks_expectations() {
    let out = housing(&["run", "--mechanism", "bttc", "--market", "markets/two-agents.toml"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "bttc: ((H2,C2),(H1,C1))\nagent 1: (H2, C2)\nagent 2: (H1, C1)\n");

    let out = housing(&["run", "--mechanism", "cttc", "--market", "markets/two-agents.toml", "--expect", "((H1,C1),(H2,C2))"]);
    assert_eq!(out.status.code(), Some(0));
    let out = housing(&["run", "--mechanism", "cttc", "--market", "markets/two-agents.toml", "--expect", "((H2,C2),(H1,C1))"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("does not match --expect"));
}

#[test]
fn stepwise_trace() {
    let out = housing(&["run", "--mechanism", "bttc-stepwise", "--market", "markets/three-agents.toml", "--trace"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("bttc-stepwise: ((H2,C2),(H1,C1),(H3,C3))\n"));
    assert!(text.contains("step 1: 1 -> H2 -> 2 -> C1 -> 1\n"));
    assert!(text.contains("step 2: 3 -> H3 -> 3\n"));
}

#[test]
fn usage_errors_exit_with_two() {
    let out = housing(&["run", "--mechanism", "bttcc", "--market", "markets/two-agents.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("did you mean `bttc`?"));

    let out = housing(&["run", "--mechanism", "bttc", "--market", "markets/missing.toml"]);
    assert_eq!(out.status.code(), Some(2));

    let out = housing(&["audit", "--mechanism", "bttc", "--n", "2", "--m", "2", "--domain", "lexicographic", "--require", "ir,spx"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown property code `spx`"));

    let out = housing(&["run", "--mechanism", "cttc", "--market", "markets/strict.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn guards_refuse_and_can_be_overridden() {
    let out = housing(&["enumerate", "--n", "3", "--m", "3", "--domain", "strict"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("27 bundles, limit is 12 bundles"), "{}", stderr(&out));
    let out = housing(&["search", "--n", "3", "--m", "2", "--domain", "lexicographic", "--require", "ir,sp"]);
    assert_eq!(out.status.code(), Some(2));

    let args = ["enumerate", "--n", "2", "--m", "2", "--domain", "separable"];
    assert!(housing(&args).status.success());
    let out = housing(&[&["--guard-override", "max-separable-bundles=3"][..], &args[..]].concat());
    assert_eq!(out.status.code(), Some(2));
    let out = housing(&[&["--guard-override", "frobs=3"][..], &args[..]].concat());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn search_verdicts_and_expectations() {
    let out = housing(&["search", "--n", "2", "--m", "2", "--domain", "strict", "--require", "ir,sp,ce", "--expect", "unsat"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("UNSAT (desk-scale, exhaustive over strict n=2, m=2 (576 profiles))"));

    let out = housing(&[
        "search", "--n", "2", "--m", "2", "--domain", "separable", "--require", "ir,sp,ce", "--target", "cttc", "--expect", "unique",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("UNIQUE, equal to cttc"));

    let out = housing(&["search", "--n", "2", "--m", "2", "--domain", "separable", "--require", "ir", "--expect", "unique"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn audit_expectations() {
    let args = ["audit", "--mechanism", "cttc", "--n", "2", "--m", "2", "--domain", "separable", "--require", "sp,gsp"];
    assert_eq!(housing(&[&args[..], &["--expect", "sp+,gsp-"]].concat()).status.code(), Some(0));
    assert_eq!(housing(&[&args[..], &["--expect", "gsp+"]].concat()).status.code(), Some(1));
    let out = housing(&[
        "audit", "--mechanism", "msir", "--order", "1,2", "--n", "2", "--m", "2", "--domain", "lexicographic", "--require", "sp",
    ]);
    assert!(stdout(&out).contains("agent 2 changes its report"), "{}", stdout(&out));
}

#[test]
fn replay_reports_the_contradiction() {
    let out = housing(&["replay-a5", "--expect", "contradiction"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("strategy-proofness is violated in both cases: yes"));
    assert!(text.contains("UNSAT"));
}

#[test]
fn json_output_is_parseable() {
    let out = housing(&["--format", "json", "search", "--n", "2", "--m", "2", "--domain", "lexicographic", "--require", "ir,sp,nb,pe2", "--target", "bttc"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["verdict"], "UNIQUE");
    assert_eq!(v["target"]["equals_unique"], true);
    assert_eq!(v["report_version"], 1);

    let out = housing(&["--format", "json", "run", "--mechanism", "bttc", "--market", "markets/two-agents.toml"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v.is_object());
}

#[test]
fn output_is_deterministic_and_independent_of_jobs() {
    for args in [
        &["audit", "--mechanism", "cttc", "--n", "2", "--m", "2", "--domain", "separable"][..],
        &["search", "--n", "2", "--m", "2", "--domain", "lexicographic", "--require", "ir,sp,nb,pe2", "--model-cap", "3"][..],
        &["search", "--n", "2", "--m", "2", "--domain", "separable", "--require", "ir"][..],
    ] {
        let reference = housing(&[&["--jobs", "1"][..], args].concat());
        assert!(reference.status.success());
        for jobs in ["1", "2", "4"] {
            let again = housing(&[&["--jobs", jobs][..], args].concat());
            assert_eq!(stdout(&again), stdout(&reference), "--jobs {jobs} {args:?}");
        }
    }
}
