use std::path::PathBuf;

use opengame::{run, Streams};
use serde_json::Value;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn data(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    root.join(name).to_string_lossy().into_owned()
}

fn opengame(args: &[&str], input: &str) -> Run {
    let mut input = input.as_bytes();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("opengame").chain(args.iter().copied());
    let code = run(argv, Streams { input: &mut input, out: &mut out, err: &mut err });
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn ndjson(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("{l:?}: {e}"))).collect()
}

#[test]
fn validate_prints_canonical_form() {
    let r = opengame(&["validate", &data("sierpinski.json")], "");
    assert_eq!(r.code, 0, "{}", r.err);
    let v = &ndjson(&r.out)[0];
    assert_eq!(v["valid"], true);
    assert_eq!(v["canonical_opens"], serde_json::json!([[], ["a"], ["a", "b"]]));
}

#[test]
fn invariants_of_sierpinski() {
    let r = opengame(&["invariants", &data("sierpinski.json")], "");
    assert_eq!(r.code, 0);
    let v = &ndjson(&r.out)[0];
    for (k, want) in [("d", 1), ("delta", 1), ("gd", 1), ("pi", 1), ("w", 2), ("t", 1)] {
        assert_eq!(v[k], want, "{k}");
    }
}

#[test]
fn suite_chain_on_three_points() {
    let r = opengame(&["suite", "--n", "3", "--checks", "chain"], "");
    assert_eq!(r.code, 0, "{}", r.err);
    let lines = ndjson(&r.out);
    assert_eq!(lines.len(), 29);
    assert!(lines.iter().all(|l| l["pass"] == true));
}

#[test]
fn suite_variants_on_two_points() {
    let r = opengame(&["suite", "--n", "2", "--checks", "variants", "--jobs", "2"], "");
    assert_eq!(r.code, 0);
    assert_eq!(ndjson(&r.out).len(), 4);
}

#[test]
fn suite_rejects_unknown_checks() {
    let r = opengame(&["suite", "--n", "2", "--checks", "nope"], "");
    assert_eq!(r.code, 1);
    assert!(r.out.is_empty());
    assert!(r.err.contains("unknown check"));
}

#[test]
fn usage_errors_go_to_the_error_stream() {
    let r = opengame(&["invariants", "--bogus", &data("sierpinski.json")], "");
    assert_eq!(r.code, 1);
    assert!(r.out.is_empty());
    assert!(!r.err.is_empty());
    let r = opengame(&["invariants", "/no/such/file.json"], "");
    assert_eq!(r.code, 1);
    assert!(r.err.contains("cannot read"));
}

#[test]
fn solve_table_rows() {
    let r = opengame(&["solve", &data("two_sierpinski.json"), "--variant", "free"], "");
    assert_eq!(r.code, 0);
    let rows = ndjson(&r.out);
    let start = rows.iter().find(|row| row["closed_set"] == serde_json::json!([])).unwrap();
    assert_eq!(start["value"], 2);
    let end = rows.iter().find(|row| row["value"] == 0).unwrap();
    assert_eq!(end["best_move"], Value::Null);
}

#[test]
fn interactive_sierpinski_matches_gd() {
    let r = opengame(&["play", &data("sierpinski.json"), "--pI", "optimal", "--pII", "interactive"], "b\n");
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("matched gd=1"), "{}", r.out);
}

#[test]
fn interactive_rejects_points_outside_the_open() {
    let r = opengame(&["play", &data("sierpinski.json"), "--pII", "interactive"], "a\nb\n");
    assert_eq!(r.code, 0);
    assert!(r.out.contains("rejected"));
    assert!(r.out.contains("length 1"));
}

#[test]
fn interactive_discrete_two_takes_two_picks() {
    for pi in ["optimal", "pi-base"] {
        let r = opengame(&["play", &data("discrete2.json"), "--pI", pi, "--pII", "interactive"], "x\ny\nx\n");
        assert_eq!(r.code, 0, "{}", r.err);
        assert!(r.out.contains("length 2"), "{}", r.out);
    }
}

#[test]
fn interactive_two_sierpinski_pi_base_takes_two() {
    // Offer order is {b} then {d}; any legal input has the same length.
    for input in ["b\nd\n", "a\nb\nc\nd\n"] {
        let r = opengame(&["play", &data("two_sierpinski.json"), "--pI", "pi-base", "--pII", "interactive"], input);
        assert_eq!(r.code, 0, "{}", r.err);
        assert!(r.out.contains("length 2"), "{}", r.out);
    }
}

#[test]
fn interactive_end_of_input_is_an_error() {
    let r = opengame(&["play", &data("discrete2.json"), "--pII", "interactive"], "x\n");
    assert_eq!(r.code, 1);
    assert!(r.err.contains("input ended"));
}

#[test]
fn play_transcripts_are_seeded() {
    let args = ["play", &data("two_sierpinski.json"), "--pI", "pi-base", "--pII", "random", "--seed", "9"];
    let a = opengame(&args, "");
    let b = opengame(&args, "");
    assert_eq!(a.code, 0);
    assert_eq!(a.out, b.out);
    let lines = ndjson(&a.out);
    assert_eq!(lines.last().unwrap()["length"], 2);
}

#[test]
fn aggregate_play_writes_an_increasing_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("ledger.ndjson");
    let r = opengame(
        &["play", "--pI", "aggregate", "--factors", &data("discrete2_times_s.json"), "--pII", "stall", "--ledger", ledger.to_str().unwrap()],
        "",
    );
    assert_eq!(r.code, 0, "{}", r.err);
    let entries = ndjson(&std::fs::read_to_string(&ledger).unwrap());
    let key = |e: &Value| ["alpha", "beta", "eta", "epsilon"].map(|k| e[k].as_u64().unwrap());
    assert!(entries.windows(2).all(|w| key(&w[0]) < key(&w[1])));
    assert_eq!(ndjson(&r.out).last().unwrap()["length"].as_u64().unwrap(), entries.len() as u64);
}

#[test]
fn ledger_needs_the_aggregate_strategy() {
    let r = opengame(&["play", &data("sierpinski.json"), "--ledger", "/tmp/x.ndjson"], "");
    assert_eq!(r.code, 1);
}

#[test]
fn product_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("prod.json");
    let r = opengame(&["product", &data("sierpinski.json"), &data("sierpinski.json"), "-o", out.to_str().unwrap()], "");
    assert_eq!(r.code, 0, "{}", r.err);
    let r = opengame(&["invariants", out.to_str().unwrap()], "");
    let v = &ndjson(&r.out)[0];
    assert_eq!((v["n"].as_u64(), v["pi"].as_u64(), v["gd"].as_u64()), (Some(4), Some(1), Some(1)));
}

#[test]
fn fan_check_exit_codes() {
    let r = opengame(&["fan-check", &data("s_times_s.json"), "--kappa", "2"], "");
    assert_eq!(r.code, 0, "{}", r.err);
    let lines = ndjson(&r.out);
    assert_eq!(lines.last().unwrap()["status"], "holds");
    let r = opengame(&["fan-check", &data("s_times_s.json"), "--kappa", "0"], "");
    assert_eq!(r.code, 2);
    assert_eq!(ndjson(&r.out).last().unwrap()["status"], "unknown");
}

#[test]
fn fan_check_witness_file() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.ndjson");
    let r = opengame(
        &["fan-check", &data("discrete2_times_s.json"), "--kappa", "2", "--pool", "all", "--reading", "traces", "--witness", w.to_str().unwrap()],
        "",
    );
    assert_eq!(r.code, 0, "{}", r.err);
    assert_eq!(ndjson(&r.out).len(), 1);
    let cells = ndjson(&std::fs::read_to_string(&w).unwrap());
    assert!(cells.iter().all(|c| c["outcome"] == "found"));
}

#[test]
fn greedy_on_the_line() {
    let r = opengame(&["greedy", &data("line.json"), "--start", "p0"], "");
    assert_eq!(r.code, 0, "{}", r.err);
    let steps = ndjson(&r.out);
    let points: Vec<&str> = steps.iter().map(|s| s["point"].as_str().unwrap()).collect();
    assert_eq!(points, ["p0", "p2", "p1"]);
    assert_eq!(steps[1]["radius"], "1");
    assert_eq!(steps[2]["radius"], "2/5");
    let r = opengame(&["greedy", &data("line.json"), "--start", "zz"], "");
    assert_eq!(r.code, 1);
}

#[test]
fn enumerate_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("corpus.ndjson");
    let r = opengame(&["enumerate", "--n", "4", "--mode", "labeled", "--method", "both", "--out", out.to_str().unwrap()], "");
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.is_empty());
    assert_eq!(ndjson(&std::fs::read_to_string(&out).unwrap()).len(), 355);
    let r = opengame(&["enumerate", "--n", "4", "--mode", "unlabeled"], "");
    assert_eq!(ndjson(&r.out).len(), 33);
    let r = opengame(&["enumerate", "--n", "5", "--method", "family-closure"], "");
    assert_eq!(r.code, 1);
}

#[test]
fn pretty_format_is_valid_json() {
    let r = opengame(&["--format", "pretty", "invariants", &data("two_sierpinski.json")], "");
    assert_eq!(r.code, 0);
    let v: Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(v["gd"], 2);
}

#[test]
fn invalid_topologies_are_file_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"points":["a","b","c"],"opens":[[],["a"],["b"],["a","b","c"]]}"#).unwrap();
    let r = opengame(&["validate", bad.to_str().unwrap()], "");
    assert_eq!(r.code, 1);
    assert!(r.err.contains("not a valid topology"), "{}", r.err);
}
