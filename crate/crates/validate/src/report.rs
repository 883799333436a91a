//! Check records and their CSV rendering.

use std::fmt;
use std::time::Duration;

use crate::Result;

/// How an observed value is compared with its reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// `|observed − expected| ≤ tolerance`
    Within,
    /// `observed ≥ expected − tolerance`
    AtLeast,
    /// `observed ≤ expected + tolerance`
    AtMost,
}

impl Comparison {
    pub fn as_str(self) -> &'static str {
        match self {
            Comparison::Within => "within",
            Comparison::AtLeast => "at_least",
            Comparison::AtMost => "at_most",
        }
    }
}

/// One measured quantity of a criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
}

impl Check {
    pub fn within(criterion: u8, name: impl Into<String>, observed: f64, expected: f64, tolerance: f64) -> Self {
        Self { criterion, name: name.into(), observed, expected, tolerance, comparison: Comparison::Within }
    }

    pub fn at_least(criterion: u8, name: impl Into<String>, observed: f64, bound: f64, tolerance: f64) -> Self {
        Self { criterion, name: name.into(), observed, expected: bound, tolerance, comparison: Comparison::AtLeast }
    }

    pub fn at_most(criterion: u8, name: impl Into<String>, observed: f64, bound: f64, tolerance: f64) -> Self {
        Self { criterion, name: name.into(), observed, expected: bound, tolerance, comparison: Comparison::AtMost }
    }

    /// Distance to the failure boundary; negative when the check fails.
    /// NaN observations fail.
    pub fn margin(&self) -> f64 {
        let m = match self.comparison {
            Comparison::Within => self.tolerance - (self.observed - self.expected).abs(),
            Comparison::AtLeast => self.observed - (self.expected - self.tolerance),
            Comparison::AtMost => (self.expected + self.tolerance) - self.observed,
        };
        if m.is_nan() {
            f64::NEG_INFINITY
        } else {
            m
        }
    }

    pub fn passed(&self) -> bool {
        self.margin() >= 0.0
    }

    /// Fields in [`CSV_HEADER`] order.
    pub fn csv_record(&self) -> [String; 8] {
        [
            self.criterion.to_string(),
            self.name.clone(),
            format!("{:e}", self.observed),
            format!("{:e}", self.expected),
            self.comparison.as_str().to_string(),
            format!("{:e}", self.tolerance),
            format!("{:e}", self.margin()),
            self.passed().to_string(),
        ]
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: observed {:.6e}, expected {} {:.6e}, tolerance {:.3e}, margin {:.3e}",
            self.criterion,
            self.name,
            self.observed,
            self.comparison.as_str(),
            self.expected,
            self.tolerance,
            self.margin()
        )
    }
}

/// All checks of one acceptance criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(Check::passed)
    }

    /// Smallest margin over the checks.
    pub fn worst(&self) -> Option<&Check> {
        self.checks.iter().min_by(|a, b| a.margin().total_cmp(&b.margin()))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} {status} {} ({} checks", self.id, self.title, self.checks.len())?;
        if let Some(w) = self.worst() {
            write!(f, ", worst margin {:.3e} at {}", w.margin(), w.name)?;
        }
        write!(f, ", {:.1} s)", self.elapsed.as_secs_f64())
    }
}

/// Column names of the check table.
pub const CSV_HEADER: [&str; 8] =
    ["criterion", "check", "observed", "expected", "comparison", "tolerance", "margin", "passed"];

/// Check table as CSV text. Wall-clock times are left out so identical
/// runs give identical bytes.
pub fn csv_body(reports: &[CriterionReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for c in reports.iter().flat_map(|r| &r.checks) {
        w.write_record(c.csv_record())?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits UTF-8"))
}
