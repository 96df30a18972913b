//! Structured verification reports.
//!
//! A report is a deterministic record of a verification run: the model echo,
//! one record per check with optional failure witness, and an overall status.
//! Timing is off by default so that reports are byte-identical across runs
//! with the same model and seed; `--timings` turns it on.

use serde::Serialize;
use std::fmt;
use std::time::Instant;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_ms: Option<u128>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
}

impl CheckResult {
    pub fn pass(name: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            status: CheckStatus::Pass,
            witness: None,
            time_ms: None,
        }
    }

    pub fn fail(name: impl Into<String>, witness: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            status: CheckStatus::Fail,
            witness: Some(witness.into()),
            time_ms: None,
        }
    }

    /// Run a closure as a named check, recording the elapsed wall time.
    pub fn run(name: impl Into<String>, f: impl FnOnce() -> Result<(), String>) -> Self {
        let start = Instant::now();
        let mut result = match f() {
            Ok(()) => CheckResult::pass(name),
            Err(witness) => CheckResult::fail(name, witness),
        };
        result.time_ms = Some(start.elapsed().as_millis());
        result
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub format_version: u32,
    pub tool_version: String,
    pub model: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub status: CheckStatus,
}

impl Report {
    pub fn new(model_echo: Vec<String>, checks: Vec<CheckResult>) -> Self {
        let status = if checks.iter().all(|c| c.passed()) {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Report {
            format_version: FORMAT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            model: model_echo,
            checks,
            status,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    /// Strip timing fields for byte-identical output.
    pub fn without_timings(mut self) -> Self {
        for c in &mut self.checks {
            c.time_ms = None;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "halfloop report (format {})", self.format_version)?;
        for line in &self.model {
            writeln!(f, "  model: {}", line)?;
        }
        for c in &self.checks {
            let status = if c.passed() { "pass" } else { "FAIL" };
            match (&c.witness, c.time_ms) {
                (Some(w), _) => writeln!(f, "  {:<44} {}  [{}]", c.name, status, w)?,
                (None, Some(t)) => writeln!(f, "  {:<44} {}  ({} ms)", c.name, status, t)?,
                (None, None) => writeln!(f, "  {:<44} {}", c.name, status)?,
            }
        }
        writeln!(
            f,
            "overall: {}",
            if self.all_passed() { "pass" } else { "FAIL" }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_check_list_passes() {
        let r = Report::new(vec!["kind = inner-gaudin".into()], vec![]);
        assert!(r.all_passed());
        assert!(r.to_json().contains("\"status\": \"pass\""));
    }

    #[test]
    fn one_failure_fails_overall_with_witness() {
        let r = Report::new(
            vec![],
            vec![
                CheckResult::pass("a"),
                CheckResult::fail("b", "entry [0,1] = 1"),
            ],
        );
        assert!(!r.all_passed());
        let json = r.to_json();
        assert!(json.contains("\"witness\": \"entry [0,1] = 1\""));
        assert!(json.contains("\"status\": \"fail\""));
    }

    #[test]
    fn json_round_trip_matches_in_memory_record() {
        let r = Report::new(
            vec!["kind = dunkl".into()],
            vec![CheckResult::pass("x"), CheckResult::fail("y", "w")],
        );
        let json = r.to_json();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["format_version"], serde_json::json!(1));
        assert_eq!(parsed["checks"][0]["name"], serde_json::json!("x"));
        assert_eq!(parsed["checks"][1]["witness"], serde_json::json!("w"));
        assert_eq!(parsed["status"], serde_json::json!("fail"));
    }
}
