//! Structured check reports shared by the scheme validators, the prover, and
//! the forcing checks.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Informational entry; does not affect the overall outcome.
    Note,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub check: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub title: String,
    pub entries: Vec<ReportEntry>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            entries: Vec::new(),
        }
    }

    pub fn pass(&mut self, check: impl Into<String>, detail: impl Into<String>) {
        self.entries.push(ReportEntry {
            check: check.into(),
            status: CheckStatus::Pass,
            detail: detail.into(),
        });
    }

    pub fn fail(&mut self, check: impl Into<String>, detail: impl Into<String>) {
        self.entries.push(ReportEntry {
            check: check.into(),
            status: CheckStatus::Fail,
            detail: detail.into(),
        });
    }

    pub fn note(&mut self, check: impl Into<String>, detail: impl Into<String>) {
        self.entries.push(ReportEntry {
            check: check.into(),
            status: CheckStatus::Note,
            detail: detail.into(),
        });
    }

    pub fn record(&mut self, check: impl Into<String>, ok: bool, detail: impl Into<String>) {
        if ok {
            self.pass(check, detail);
        } else {
            self.fail(check, detail);
        }
    }

    pub fn merge(&mut self, other: Report) {
        self.entries.extend(other.entries);
    }

    /// No failing entry (notes are allowed).
    pub fn passed(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries
            .iter()
            .filter(|e| e.status == CheckStatus::Fail)
    }

    pub fn has_notes(&self) -> bool {
        self.entries
            .iter()
            .any(|e| e.status == CheckStatus::Note)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {}",
            self.title,
            if self.passed() { "PASS" } else { "FAIL" }
        )?;
        for e in &self.entries {
            let tag = match e.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Note => "note",
            };
            writeln!(f, "  [{tag}] {} — {}", e.check, e.detail)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_means_no_failures() {
        let mut r = Report::new("t");
        r.pass("a", "ok");
        r.note("b", "informational");
        assert!(r.passed());
        r.fail("c", "broken");
        assert!(!r.passed());
        assert_eq!(r.failures().count(), 1);
    }

    #[test]
    fn serde_round_trip() {
        let mut r = Report::new("t");
        r.pass("a", "ok");
        r.fail("b", "bad");
        let json = serde_json::to_string(&r).unwrap();
        let back: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
