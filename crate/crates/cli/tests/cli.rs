//! Runs the built `pjet` binary. Golden reports live in `tests/golden`;
//! set `PJET_BLESS=1` to rewrite them after an intended output change.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn pjet(args: &[&str]) -> Output {
    pjet_with_env(args, &[])
}

fn pjet_with_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pjet"));
    cmd.args(args).env_remove("PJET_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// `(golden file stem, arguments, expected exit code)`.
const GOLDEN: &[(&str, &[&str], i32)] = &[
    ("verify-core-p3", &["verify-core", "--p", "3", "--k", "4", "--degree", "6", "--seed", "1"], 0),
    ("verify-core-p5-d2", &["verify-core", "--p", "5", "--d", "2", "--k", "4", "--trials", "100", "--seed", "2"], 0),
    ("curve-report-cm", &["curve-report", "--p", "7", "--a4", "0", "--a6", "1", "--k", "6"], 0),
    ("curve-report-non-cm", &["curve-report", "--p", "7", "--a4", "2", "--a6", "3", "--k", "6"], 0),
    ("curve-report-supersingular", &["curve-report", "--p", "5", "--a4", "0", "--a6", "1", "--k", "6"], 0),
    ("curve-report-singular", &["curve-report", "--p", "7", "--a4", "2", "--a6", "5"], 3),
    ("l11delta-cm", &["l11delta", "--p", "7", "--a4", "0", "--a6", "1", "--n", "20", "--seed", "3"], 0),
];

#[test]
fn golden_reports_match() {
    let bless = std::env::var_os("PJET_BLESS").is_some();
    for (stem, args, code) in GOLDEN {
        let out = pjet(args);
        assert_eq!(out.status.code(), Some(*code), "{stem}: {}", String::from_utf8_lossy(&out.stderr));
        let path = golden_dir().join(format!("{stem}.json"));
        if bless {
            std::fs::write(&path, &out.stdout).unwrap();
            continue;
        }
        let expected = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(expected == out.stdout, "{stem} differs from {}", path.display());
    }
}

#[test]
fn every_command_is_byte_deterministic() {
    for (stem, args, _) in GOLDEN {
        let first = pjet(args);
        let second = pjet(args);
        let single = pjet_with_env(args, &[("PJET_THREADS", "1")]);
        assert_eq!(first.stdout, second.stdout, "{stem}");
        assert_eq!(first.stdout, single.stdout, "{stem} depends on the thread count");
    }
}

#[test]
fn reports_conform_to_the_shipped_schema() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schema/pjet-report-1.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let mut runs: Vec<Output> = GOLDEN.iter().map(|(_, args, _)| pjet(args)).collect();
    runs.push(pjet(&["--timing", "l11delta", "--p", "5", "--a4", "0", "--a6", "1", "--n", "0"]));
    for out in &runs {
        let v = json(out);
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{errors:?}\n{v}");
    }
}

#[test]
fn keys_are_sorted() {
    fn check(v: &Value) {
        match v {
            Value::Object(map) => {
                let keys: Vec<&String> = map.keys().collect();
                let mut sorted = keys.clone();
                sorted.sort();
                assert_eq!(keys, sorted);
                map.values().for_each(check);
            }
            Value::Array(items) => items.iter().for_each(check),
            _ => {}
        }
    }
    check(&json(&pjet(GOLDEN[2].1)));
}

#[test]
fn usage_errors_exit_2() {
    let bad_p = pjet(&["verify-core", "--p", "4", "--k", "4"]);
    assert_eq!(bad_p.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_p.stderr).contains("p not prime"));
    let bad_k = pjet(&["verify-core", "--p", "3", "--k", "1"]);
    assert_eq!(bad_k.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_k.stderr).contains("k must be ≥ 2"));
    assert_eq!(pjet(&["curve-report", "--p", "3", "--a4", "0", "--a6", "1"]).status.code(), Some(2));
    assert_eq!(pjet(&["verify-core", "--k", "4"]).status.code(), Some(2));
    let threads = pjet_with_env(&["l11delta", "--p", "7", "--a4", "0", "--a6", "1"], &[("PJET_THREADS", "0")]);
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn singular_curve_reports_its_discriminant() {
    let out = pjet(&["curve-report", "--p", "7", "--a4", "2", "--a6", "5"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "singular-reduction");
    // -16 (4 * 2^3 + 27 * 5^2) = -16 * 707 and 707 = 7 * 101.
    assert_eq!(v["error"]["witness"]["discriminant"], "-11312");
    assert_eq!(v["error"]["witness"]["quotient"], "-1616");
}

#[test]
fn cm_curve_reports_evidence_for_a_lift() {
    let v = json(&pjet(GOLDEN[2].1));
    assert_eq!(v["payload"]["a_p"], -4);
    assert_eq!(v["payload"]["verdict"], "evidence-for");
    assert_eq!(v["payload"]["order1"]["reverification"]["passed"], 30);
}

#[test]
fn l11delta_batches() {
    let v = json(&pjet(&["l11delta", "--p", "7", "--a4", "2", "--a6", "3", "--n", "25"]));
    assert_eq!(v["checks"][0]["detail"]["zeros"], 25);
    assert_eq!(v["checks"][1]["detail"]["nonzeros"], 25);
    let empty = pjet(&["l11delta", "--p", "7", "--a4", "2", "--a6", "3", "--n", "0"]);
    assert_eq!(empty.status.code(), Some(0));
    assert_eq!(json(&empty)["warnings"][0], "empty batch: both checks pass vacuously");
}

#[test]
fn timing_and_pretty_are_opt_in() {
    let args = ["l11delta", "--p", "7", "--a4", "0", "--a6", "1", "--n", "5"];
    assert!(json(&pjet(&args)).get("timing_ms").is_none());
    let mut timed = vec!["--timing"];
    timed.extend(args);
    assert!(json(&pjet(&timed))["timing_ms"].is_u64());
    let mut pretty = vec!["--pretty"];
    pretty.extend(args);
    let text = String::from_utf8(pjet(&pretty).stdout).unwrap();
    assert!(text.contains("PASS  genuine-jets-vanish"), "{text}");
    assert!(text.ends_with("all checks passed\n"));
}
