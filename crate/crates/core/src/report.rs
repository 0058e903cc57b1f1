//! Structured pass/fail records.

use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// First offending term or entry when the check fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub title: String,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(title: impl Into<String>) -> Self {
        VerificationReport { title: title.into(), checks: Vec::new() }
    }
    pub fn pass(&mut self, name: impl Into<String>) {
        self.push(name, true, None);
    }
    pub fn fail(&mut self, name: impl Into<String>, witness: impl Into<String>) {
        self.push(name, false, Some(witness.into()));
    }
    pub fn push(&mut self, name: impl Into<String>, passed: bool, witness: Option<String>) {
        self.checks.push(Check { name: name.into(), passed, witness, detail: None });
    }
    pub fn check(&mut self, name: impl Into<String>, outcome: Result<(), String>) {
        match outcome {
            Ok(()) => self.pass(name),
            Err(w) => self.fail(name, w),
        }
    }
    /// Attach a note to the most recent check.
    pub fn note(&mut self, detail: impl Into<String>) {
        if let Some(c) = self.checks.last_mut() {
            c.detail = Some(detail.into());
        }
    }
    pub fn merge(&mut self, other: VerificationReport) {
        let prefix = other.title.clone();
        for mut c in other.checks {
            if !prefix.is_empty() {
                c.name = format!("{}/{}", prefix, c.name);
            }
            self.checks.push(c);
        }
    }
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
    pub fn to_json(&self) -> Value {
        json!({
            "title": self.title,
            "passed": self.all_passed(),
            "checks": self.checks,
        })
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for c in &self.checks {
            write!(f, "  [{}] {}", if c.passed { "pass" } else { "FAIL" }, c.name)?;
            if let Some(w) = &c.witness {
                write!(f, "  witness: {}", w)?;
            }
            if let Some(d) = &c.detail {
                write!(f, "  ({})", d)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
