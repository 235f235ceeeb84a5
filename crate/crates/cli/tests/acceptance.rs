//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::process::Command;
use std::time::{Duration, Instant};

use opengame_core::enumeration::{enumerate_labeled, enumerate_unlabeled, Method};
use opengame_core::metric::{greedy_dense_sequence, PseudometricSpace, Rational};
use opengame_core::suite::{check_greedy, run_suite, Check, CheckRecord, SuiteConfig};

type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn within(elapsed: Duration, limit: Duration) -> (bool, String) {
    (elapsed <= limit, format!("{:.2}s of {}s", elapsed.as_secs_f64(), limit.as_secs()))
}

fn suite_over(ns: impl IntoIterator<Item = usize>, check: Check) -> (Vec<CheckRecord>, Duration) {
    let t = Instant::now();
    let mut records = Vec::new();
    for n in ns {
        records.extend(run_suite(&SuiteConfig::new(n, vec![check], 0)).expect("suite configuration is valid"));
    }
    (records, t.elapsed())
}

fn summarize(records: &[CheckRecord], extra: (bool, String)) -> Outcome {
    let failed: Vec<&CheckRecord> = records.iter().filter(|r| !r.pass).collect();
    let mut detail = format!("{}/{} pass, {}", records.len() - failed.len(), records.len(), extra.1);
    if let Some(f) = failed.first() {
        detail.push_str(&format!("; first failure {} {}", f.space, f.detail));
    }
    Outcome { pass: failed.is_empty() && !records.is_empty() && extra.0, detail }
}

fn enumeration_counts() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, expect) in [(1, 1), (2, 4), (3, 29), (4, 355)] {
        let a = enumerate_labeled(n, Method::FamilyClosure).unwrap();
        let b = enumerate_labeled(n, Method::Preorder).unwrap();
        let same = a == b && a.iter().zip(&b).all(|(x, y)| x.opens() == y.opens());
        ok &= same && a.len() == expect;
        parts.push(format!("L{n}={}", a.len()));
    }
    for (n, expect) in [(2, 3), (3, 9), (4, 33)] {
        let u = enumerate_unlabeled(n).unwrap();
        ok &= u.len() == expect;
        parts.push(format!("U{n}={}", u.len()));
    }
    let (fast, time) = within(t.elapsed(), Duration::from_secs(60));
    Outcome { pass: ok && fast, detail: format!("{} generators agree={ok}, {time}", parts.join(" ")) }
}

fn greedy_metric() -> Outcome {
    let xs = [Rational::from_integer(0), Rational::new(2, 5), Rational::from_integer(1)];
    let dist = xs.iter().map(|a| xs.iter().map(|b| if a > b { a - b } else { b - a }).collect()).collect();
    let line = PseudometricSpace::unlabeled(dist).unwrap();
    let run = greedy_dense_sequence(&line, 0).unwrap();
    let worked = run.order == [0, 2, 1] && run.radii == [Rational::from_integer(1), Rational::new(2, 5)];
    let (line_ok, _) = check_greedy(&line, 0).unwrap();
    let (records, _) = suite_over([1], Check::Metric);
    let mut out = summarize(&records, (worked && line_ok, format!("worked example order={:?} radii={:?}", run.order, run.radii.iter().map(|r| r.to_string()).collect::<Vec<_>>())));
    out.pass &= records.len() == 200;
    out
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_opengame");
    let mut reports = Vec::new();
    for (i, jobs) in ["1", "4"].iter().enumerate() {
        let path = dir.path().join(format!("report{i}.ndjson"));
        let status = Command::new(bin)
            .args(["suite", "--n", "4", "--checks", "all", "--seed", "42", "--jobs", jobs, "--report"])
            .arg(&path)
            .status()
            .unwrap();
        reports.push((status.success(), std::fs::read(&path).unwrap_or_default()));
    }
    let same = reports[0].1 == reports[1].1;
    let lines = reports[0].1.iter().filter(|&&b| b == b'\n').count();
    Outcome {
        pass: same && reports.iter().all(|r| r.0) && lines > 0,
        detail: format!("{lines} report lines, identical={same}, both exited 0={}", reports.iter().all(|r| r.0)),
    }
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("enumeration cross-check", Box::new(enumeration_counts)),
        (
            "invariant chain on 4-point spaces",
            Box::new(|| {
                let (r, t) = suite_over([4], Check::Chain);
                summarize(&r, within(t, Duration::from_secs(300)))
            }),
        ),
        (
            "game-variant equivalences",
            Box::new(|| {
                let (r, t) = suite_over(1..=4, Check::Variants);
                summarize(&r, (true, format!("{:.2}s", t.as_secs_f64())))
            }),
        ),
        (
            "exact-force lengths",
            Box::new(|| {
                let (r, t) = suite_over(1..=4, Check::ExactForce);
                summarize(&r, (true, format!("{:.2}s", t.as_secs_f64())))
            }),
        ),
        (
            "pi-base strategy worst case",
            Box::new(|| {
                let (r, t) = suite_over(1..=4, Check::PiBase);
                summarize(&r, (true, format!("{:.2}s", t.as_secs_f64())))
            }),
        ),
        (
            "dense-set lower bound",
            Box::new(|| {
                let (r, t) = suite_over(1..=3, Check::DensePii);
                summarize(&r, (true, format!("{:.2}s", t.as_secs_f64())))
            }),
        ),
        (
            "product theorems on pairs",
            Box::new(|| {
                let (r, t) = suite_over([3], Check::Product);
                let mut out = summarize(&r, within(t, Duration::from_secs(600)));
                out.pass &= r.len() == 13 * 13;
                out
            }),
        ),
        ("greedy metric algorithm", Box::new(greedy_metric)),
        ("report determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {} {name}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
