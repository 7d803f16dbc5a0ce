//! Traceability between operations, the mathematics they implement and the
//! tests that cover them.
//!
//! Each operation carries one annotation comment of the form
//!
//! ```text
//! // trace: <operation> | <concept> | <covering test> | <precision budget>
//! ```
//!
//! [`generate_trace_table`] collects them from `crates/*/{src,tests}`, checks
//! the roster in [`REQUIRED_OPS`], checks that every named test exists, and
//! renders the markdown table kept in the book.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;
use walkdir::WalkDir;

/// Operations that must be annotated exactly once.
pub const REQUIRED_OPS: &[&str] = &[
    "ring_new",
    "add",
    "inv",
    "frobenius",
    "p_derivation",
    "witt_add",
    "witt_mul",
    "ghost",
    "is_p_derivation",
    "prolong",
    "prolong_via_frobenius",
    "jet_eval",
    "apply_map",
    "verify_jet_square",
    "howell_form",
    "solve_linear_zpk",
    "count_points_fp",
    "weierstrass_add",
    "formal_group_law",
    "formal_log",
    "prolonged_law",
    "psi2_build",
    "psi2_is_additive",
    "order1_character_search",
    "l11delta_eval",
    "cmd_verify_core",
    "cmd_curve_report",
    "cmd_l11delta",
    "generate_trace_table",
];

/// Constructions deliberately left without an operation, listed in the table
/// so that their absence is a recorded decision.
pub const OUT_OF_SCOPE: &[(&str, &str)] = &[
    (
        "Abstract-ring lemmas on prolongation sequences",
        "statements about arbitrary p-adically complete rings with no finite-precision content",
    ),
    (
        "Isogeny and Kunneth arguments for the non-existence of order-1 characters",
        "replaced by the bounded order-1 character search",
    ),
    ("Canonical lifts via modular polynomials", "the roster uses a curve that is already its own canonical lift"),
    (
        "Non-existence of global functions on jet spaces",
        "a statement over infinite precision; only bounded-degree evidence is computed",
    ),
];

const PREFIX: &str = "// trace:";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub op: String,
    pub concept: String,
    /// Path relative to the scanned root, with `/` separators.
    pub file: String,
    pub test: String,
    pub precision: String,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{file}:{line}: malformed trace annotation (need 4 fields separated by '|')")]
    Malformed { file: String, line: usize },
    #[error("{}", coverage_message(.missing_anchor, .missing_test, .duplicate))]
    Coverage { missing_anchor: Vec<String>, missing_test: Vec<String>, duplicate: Vec<String> },
}

fn coverage_message(missing_anchor: &[String], missing_test: &[String], duplicate: &[String]) -> String {
    let mut out = String::from("traceability check failed");
    for (what, items) in [
        ("operations without an anchor", missing_anchor),
        ("anchors naming a missing test", missing_test),
        ("operations anchored more than once", duplicate),
    ] {
        if !items.is_empty() {
            let _ = write!(out, "\n  {what}: {}", items.join(", "));
        }
    }
    out
}

/// Annotations and test function names found under `root`.
#[derive(Debug, Default)]
pub struct Scan {
    pub rows: Vec<TraceRow>,
    pub tests: BTreeSet<String>,
}

fn source_files(root: &Path) -> Vec<PathBuf> {
    let crates = root.join("crates");
    let mut files: Vec<PathBuf> = WalkDir::new(&crates)
        .sort_by_file_name()
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "rs"))
        .map(|e| e.into_path())
        .filter(|p| {
            p.strip_prefix(&crates)
                .ok()
                .and_then(|rel| rel.components().nth(1))
                .is_some_and(|c| c.as_os_str() == "src" || c.as_os_str() == "tests")
        })
        .collect();
    files.sort();
    files
}

/// Names of functions that look like tests: `fn name(` preceded by a test
/// attribute on an earlier line, or any function defined inside `proptest!`.
fn test_names(text: &str, out: &mut BTreeSet<String>) {
    let mut armed = false;
    // Brace depth inside a `proptest!` invocation, if in one.
    let mut proptest_depth: Option<i64> = None;
    for line in text.lines() {
        let t = line.trim_start();
        if t.starts_with("#[test]") || t.starts_with("#[tokio::test]") {
            armed = true;
        }
        if proptest_depth.is_none() && t.starts_with("proptest!") {
            proptest_depth = Some(0);
        }
        if let Some(rest) = t.strip_prefix("fn ") {
            if armed || proptest_depth.is_some() {
                if let Some(name) = rest.split('(').next() {
                    out.insert(name.trim().to_string());
                }
            }
            armed = false;
        }
        if let Some(depth) = proptest_depth.as_mut() {
            *depth += t.matches('{').count() as i64 - t.matches('}').count() as i64;
            if *depth <= 0 && t.contains('}') {
                proptest_depth = None;
            }
        }
    }
}

pub fn scan(root: &Path) -> Result<Scan, TraceError> {
    let mut result = Scan::default();
    for path in source_files(root) {
        let text = std::fs::read_to_string(&path).map_err(|source| TraceError::Io { path: path.clone(), source })?;
        let rel = path.strip_prefix(root).unwrap_or(&path).to_string_lossy().replace('\\', "/");
        test_names(&text, &mut result.tests);
        for (i, line) in text.lines().enumerate() {
            let Some(body) = line.trim_start().strip_prefix(PREFIX) else { continue };
            let fields: Vec<&str> = body.split('|').map(str::trim).collect();
            if fields.len() != 4 || fields.iter().any(|f| f.is_empty()) {
                return Err(TraceError::Malformed { file: rel, line: i + 1 });
            }
            result.rows.push(TraceRow {
                op: fields[0].to_string(),
                concept: fields[1].to_string(),
                file: rel.clone(),
                test: fields[2].to_string(),
                precision: fields[3].to_string(),
            });
        }
    }
    Ok(result)
}

/// Every required operation anchored once, every anchor's test present.
pub fn check(scan: &Scan, required: &[&str]) -> Result<(), TraceError> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for row in &scan.rows {
        *counts.entry(row.op.as_str()).or_default() += 1;
    }
    let missing_anchor: Vec<String> =
        required.iter().filter(|op| !counts.contains_key(*op)).map(|s| s.to_string()).collect();
    let duplicate: Vec<String> = counts.iter().filter(|(_, &n)| n > 1).map(|(op, _)| op.to_string()).collect();
    let missing_test: Vec<String> =
        scan.rows.iter().filter(|r| !scan.tests.contains(&r.test)).map(|r| format!("{} -> {}", r.op, r.test)).collect();
    if missing_anchor.is_empty() && missing_test.is_empty() && duplicate.is_empty() {
        Ok(())
    } else {
        Err(TraceError::Coverage { missing_anchor, missing_test, duplicate })
    }
}

pub fn render(rows: &[TraceRow]) -> String {
    let mut out = String::new();
    out.push_str("# Traceability\n\n");
    out.push_str("<!-- Generated by `cargo run -p pjet-trace -- --write`; do not edit by hand. -->\n\n");
    out.push_str(
        "Every operation below carries a `// trace:` annotation in its source file. \
         The table is regenerated from those annotations and a test fails if it drifts.\n\n",
    );
    out.push_str("| Operation | Mathematics | Source | Covering test | Precision |\n");
    out.push_str("|---|---|---|---|---|\n");
    for r in rows {
        let _ = writeln!(
            out,
            "| `{}` | {} | `{}` | `{}` | {} |",
            r.op,
            escape(&r.concept),
            r.file,
            r.test,
            escape(&r.precision)
        );
    }
    out.push_str("\n## Not implemented\n\n");
    for (what, why) in OUT_OF_SCOPE {
        let _ = writeln!(out, "- {what}: {why}.");
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('|', "\\|")
}

/// Scans `root`, enforces [`REQUIRED_OPS`] and renders the table.
// trace: generate_trace_table | operation-to-test map | workspace_table_is_current | n/a
pub fn generate_trace_table(root: &Path) -> Result<String, TraceError> {
    let scan = scan(root)?;
    check(&scan, REQUIRED_OPS)?;
    Ok(render(&scan.rows))
}

/// The book chapter the table is written to.
pub fn table_path(root: &Path) -> PathBuf {
    root.join("book/src/traceability.md")
}
