use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA: &str = "pjet-report/1";

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Check {
    pub fn new(name: &'static str, passed: bool, detail: Value) -> Self {
        let status = if passed { Status::Pass } else { Status::Fail };
        Check { name, status, detail }
    }
}

/// One command's result. Everything in it is a pure function of the config,
/// so serializing it twice gives identical bytes.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub checks: Vec<Check>,
    pub payload: Value,
    /// Digits each reported value is exact to.
    pub precision: Value,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn to_json(&self, timing: Option<Duration>) -> Value {
        let mut v = json!({
            "schema": SCHEMA,
            "tool": tool(),
            "command": self.command,
            "config": self.config,
            "checks": self.checks,
            "payload": self.payload,
            "precision": self.precision,
            "warnings": self.warnings,
            "passed": self.passed(),
        });
        if let Some(t) = timing {
            v["timing_ms"] = json!(t.as_millis() as u64);
        }
        canonical(v)
    }

    pub fn render_pretty(&self, timing: Option<Duration>) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "pjet {} ({SCHEMA})", self.command);
        for c in &self.checks {
            let tag = if c.status == Status::Pass { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "  {tag}  {}", c.name);
        }
        if let Value::Object(map) = canonical(self.payload.clone()) {
            for (k, v) in map.iter().filter(|(_, v)| !v.is_object() && !v.is_array()) {
                let _ = writeln!(out, "  {k:<22} {v}");
            }
        }
        if let Value::Object(map) = canonical(self.precision.clone()) {
            for (k, v) in &map {
                let _ = writeln!(out, "  precision.{k:<24} {v}");
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "  warning: {w}");
        }
        if let Some(t) = timing {
            let _ = writeln!(out, "  time {} ms", t.as_millis());
        }
        let _ = writeln!(out, "{}", if self.passed() { "all checks passed" } else { "some checks failed" });
        out
    }
}

/// The report written instead of a result when a mathematical precondition
/// fails, e.g. a curve with bad reduction.
pub fn domain_error(command: &'static str, config: Value, kind: &str, message: &str, witness: Value) -> Value {
    canonical(json!({
        "schema": SCHEMA,
        "tool": tool(),
        "command": command,
        "config": config,
        "error": { "kind": kind, "message": message, "witness": witness },
        "passed": false,
    }))
}

fn tool() -> Value {
    json!({ "name": "pjet", "version": env!("CARGO_PKG_VERSION") })
}

/// Rebuilds every object with its keys in sorted order, whatever map
/// implementation `serde_json` was compiled with.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, canonical(v));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_come_out_sorted_at_every_level() {
        let v = canonical(json!({"b": {"z": 1, "a": 2}, "a": [{"y": 0, "x": 0}]}));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"a":[{"x":0,"y":0}],"b":{"a":2,"z":1}}"#);
    }

    #[test]
    fn one_failed_check_fails_the_report() {
        let r = Report {
            command: "t",
            config: json!({}),
            checks: vec![Check::new("a", true, Value::Null), Check::new("b", false, Value::Null)],
            payload: json!({}),
            precision: json!({}),
            warnings: vec![],
        };
        assert!(!r.passed());
        assert_eq!(r.to_json(None)["passed"], json!(false));
        assert!(r.to_json(None).get("timing_ms").is_none());
        assert!(r.render_pretty(None).contains("FAIL  b"));
    }
}
