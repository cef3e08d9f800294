//! Verification reports shared by the library checks and the CLI.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    /// Short description of the identity being checked.
    pub anchor: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub report_only: bool,
    pub passed: bool,
    pub interior: usize,
    pub boundary: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub entries: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pass/fail check; NaN deviations fail.
    pub fn check(&mut self, name: &str, anchor: &str, max_deviation: f64, tolerance: f64) -> &mut CheckEntry {
        self.entries.push(CheckEntry {
            name: name.to_string(),
            anchor: anchor.to_string(),
            max_deviation,
            tolerance,
            report_only: false,
            passed: max_deviation <= tolerance,
            interior: 0,
            boundary: 0,
        });
        self.entries.last_mut().expect("just pushed")
    }

    /// Report-only entry; never counts as a failure.
    pub fn record(&mut self, name: &str, anchor: &str, value: f64) -> &mut CheckEntry {
        self.entries.push(CheckEntry {
            name: name.to_string(),
            anchor: anchor.to_string(),
            max_deviation: value,
            tolerance: f64::INFINITY,
            report_only: true,
            passed: true,
            interior: 0,
            boundary: 0,
        });
        self.entries.last_mut().expect("just pushed")
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.entries.extend(other.entries);
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.report_only || e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| !e.report_only && !e.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

impl CheckEntry {
    pub fn counts(&mut self, interior: usize, boundary: usize) -> &mut Self {
        self.interior = interior;
        self.boundary = boundary;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_fails_and_report_only_never_fails() {
        let mut r = VerificationReport::new();
        r.check("a", "x", f64::NAN, 1.0);
        r.record("b", "y", 1e9);
        assert!(!r.all_passed());
        assert_eq!(r.failures().count(), 1);
        assert_eq!(r.failures().next().unwrap().name, "a");
    }
}
