use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NONLOCAL: i32 = 3;
pub const EXIT_FAILED: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// Non-local or contextual; the detail carries the certificate.
    NonLocal,
    /// Computed quantity with no pass/fail reading.
    Info,
}

impl Status {
    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NonLocal => "NONLOCAL",
            Status::Info => "INFO",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub check: String,
    pub status: Status,
    pub summary: String,
    pub detail: Value,
    pub millis: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub input: Option<String>,
    pub verdicts: Vec<Verdict>,
    pub artifacts: Map<String, Value>,
    pub exit_code: i32,
}

impl Report {
    pub fn new(command: &str, input: Option<&str>) -> Self {
        Report {
            command: command.to_string(),
            input: input.map(str::to_string),
            verdicts: Vec::new(),
            artifacts: Map::new(),
            exit_code: EXIT_OK,
        }
    }

    /// Runs `f`, timing it, and records its verdict under `check`.
    pub fn check(&mut self, check: impl Into<String>, f: impl FnOnce() -> (Status, String, Value)) {
        let start = Instant::now();
        let (status, summary, detail) = f();
        self.verdicts.push(Verdict {
            check: check.into(),
            status,
            summary,
            detail,
            millis: start.elapsed().as_millis(),
        });
    }

    pub fn artifact(&mut self, name: &str, v: Value) {
        self.artifacts.insert(name.to_string(), v);
    }

    /// Sorts verdicts by check name and fixes the exit code.
    pub fn finish(mut self) -> Self {
        self.verdicts.sort_by(|a, b| a.check.cmp(&b.check));
        self.exit_code = exit_code(self.verdicts.iter().map(|v| v.status));
        self
    }

    pub fn status(&self, check: &str) -> Option<Status> {
        self.verdicts.iter().find(|v| v.check == check).map(|v| v.status)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn to_text(&self, brief: bool) -> String {
        let mut out = String::new();
        match &self.input {
            Some(i) => writeln!(out, "{} {}", self.command, i).unwrap(),
            None => writeln!(out, "{}", self.command).unwrap(),
        }
        let width = self
            .verdicts
            .iter()
            .map(|v| v.check.chars().count())
            .max()
            .unwrap_or(5)
            .max(5);
        writeln!(out, "{:<width$}  {:<8}  {:>6}  summary", "check", "status", "ms").unwrap();
        for v in &self.verdicts {
            writeln!(
                out,
                "{:<width$}  {:<8}  {:>6}  {}",
                v.check,
                v.status.label(),
                v.millis,
                v.summary
            )
            .unwrap();
        }
        if !brief {
            for v in self.verdicts.iter().filter(|v| !v.detail.is_null()) {
                writeln!(out, "\n{}:", v.check).unwrap();
                indented(&mut out, &v.detail);
            }
            for (name, a) in &self.artifacts {
                writeln!(out, "\nartifact {name}:").unwrap();
                indented(&mut out, a);
            }
        }
        writeln!(out, "\nexit {}", self.exit_code).unwrap();
        out
    }
}

fn indented(out: &mut String, v: &Value) {
    let body = serde_json::to_string_pretty(v).expect("serializable");
    for line in body.lines() {
        writeln!(out, "    {line}").unwrap();
    }
}

/// Any failure gives 4, otherwise any non-local verdict gives 3.
pub fn exit_code(statuses: impl IntoIterator<Item = Status>) -> i32 {
    let mut code = EXIT_OK;
    for s in statuses {
        match s {
            Status::Fail => return EXIT_FAILED,
            Status::NonLocal => code = EXIT_NONLOCAL,
            Status::Pass | Status::Info => {}
        }
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn exit_code_depends_only_on_statuses() {
        use Status::*;
        assert_eq!(exit_code([]), 0);
        assert_eq!(exit_code([Pass, Info]), 0);
        assert_eq!(exit_code([NonLocal, Pass]), 3);
        assert_eq!(exit_code([Pass, NonLocal, Fail]), 4);
        assert_eq!(exit_code([Fail, NonLocal]), 4);
    }

    #[test]
    fn verdicts_sorted_and_rendered() {
        let mut r = Report::new("demo", None);
        r.check("zeta", || (Status::Pass, "ok".into(), Value::Null));
        r.check("alpha", || {
            (Status::Fail, "bad".into(), json!({"cell": "a0=1", "p": "1/2"}))
        });
        let r = r.finish();
        assert_eq!(r.verdicts[0].check, "alpha");
        assert_eq!(r.exit_code, 4);
        let full = r.to_text(false);
        assert!(full.contains("\"p\": \"1/2\""));
        assert!(!r.to_text(true).contains("1/2"));
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["verdicts"][0]["status"], "fail");
        assert_eq!(v["exit_code"], 4);
    }
}
