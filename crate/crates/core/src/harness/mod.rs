//! Verification suites, experiments and their reports.

pub mod experiments;
pub mod stats;
pub mod verify;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::path::Path;

pub use experiments::{
    ball_report, finite_limit_experiment, nonsimple_report, order_invariance_experiment, order_invariance_with,
    ratio_deviation, sampler_report, BallBounds, FiniteLimitConfig, NonSimpleBounds, OrderConfig, SamplerBounds,
    SelectorChoice,
};
pub use verify::{
    quad_constants_report, verify_enumeration, verify_enumeration_with, verify_law, EnumBounds, LawBounds, MassCheck,
    TailCheck,
};

/// How a check decides pass from its numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `|observed − expected| <= tolerance`
    AbsWithin,
    /// `|observed − expected| <= tolerance·|expected|`
    RelWithin,
    /// `observed >= expected`
    AtLeast,
    /// `observed <= expected`
    AtMost,
    /// `observed == expected`
    Equal,
}

impl Rule {
    pub fn holds(self, observed: f64, expected: f64, tolerance: f64) -> bool {
        match self {
            Rule::AbsWithin => (observed - expected).abs() <= tolerance,
            Rule::RelWithin => (observed - expected).abs() <= tolerance * expected.abs(),
            Rule::AtLeast => observed >= expected,
            Rule::AtMost => observed <= expected,
            Rule::Equal => observed == expected,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::AbsWithin => "abs_within",
            Rule::RelWithin => "rel_within",
            Rule::AtLeast => "at_least",
            Rule::AtMost => "at_most",
            Rule::Equal => "equal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    /// Absolute or relative tolerance; for sigma bands this is `k·σ`.
    pub tolerance: f64,
    pub rule: Rule,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, observed: f64, expected: f64, tolerance: f64, rule: Rule) -> Self {
        Check {
            name: name.into(),
            observed,
            expected,
            tolerance,
            rule,
            pass: rule.holds(observed, expected, tolerance),
            note: None,
        }
    }

    pub fn within(name: impl Into<String>, observed: f64, expected: f64, tolerance: f64) -> Self {
        Check::new(name, observed, expected, tolerance, Rule::AbsWithin)
    }

    pub fn rel_within(name: impl Into<String>, observed: f64, expected: f64, tolerance: f64) -> Self {
        Check::new(name, observed, expected, tolerance, Rule::RelWithin)
    }

    pub fn at_least(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Check::new(name, observed, bound, 0.0, Rule::AtLeast)
    }

    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Check::new(name, observed, bound, 0.0, Rule::AtMost)
    }

    pub fn equal(name: impl Into<String>, observed: f64, expected: f64) -> Self {
        Check::new(name, observed, expected, 0.0, Rule::Equal)
    }

    /// A yes/no fact, recorded as 1 against an expected 1.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check::equal(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    /// Frequency against a probability within `k` binomial standard deviations.
    pub fn sigma_band(name: impl Into<String>, hits: u64, trials: u64, p: f64, k: f64) -> Self {
        let n = trials.max(1) as f64;
        let sigma = (p * (1.0 - p) / n).sqrt();
        Check::within(name, hits as f64 / n, p, k * sigma).with_note(format!("{k} sigma, sigma = {sigma:.3e}"))
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Recomputes the pass flag from the numbers alone.
    pub fn recheck(&self) -> bool {
        self.rule.holds(self.observed, self.expected, self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl StatReport {
    pub fn new(name: impl Into<String>) -> Self {
        StatReport { name: name.into(), params: BTreeMap::new(), checks: Vec::new(), pass: true }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, check: Check) -> &mut Self {
        self.pass &= check.pass;
        self.checks.push(check);
        self
    }

    pub fn extend(&mut self, other: StatReport) -> &mut Self {
        for c in other.checks {
            self.push(Check { name: format!("{}/{}", other.name, c.name), ..c });
        }
        self
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// True when every stored flag agrees with its numbers and the global
    /// flag is the conjunction.
    pub fn is_consistent(&self) -> bool {
        self.checks.iter().all(|c| c.pass == c.recheck()) && self.pass == self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialise")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One row per check under [`CSV_HEADER`].
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.checks {
            w.serialize(CsvRow {
                report: &self.name,
                check: &c.name,
                rule: c.rule,
                observed: c.observed,
                expected: c.expected,
                tolerance: c.tolerance,
                pass: c.pass,
            })
            .expect("writing to memory");
        }
        let body = String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv is utf-8");
        if self.checks.is_empty() {
            format!("{}\n", CSV_HEADER.join(","))
        } else {
            body
        }
    }

    /// Reads checks back from [`StatReport::to_csv`] output.
    pub fn from_csv(text: &str) -> Result<Self, csv::Error> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut rep: Option<StatReport> = None;
        for row in r.deserialize() {
            let row: OwnedRow = row?;
            let rep = rep.get_or_insert_with(|| StatReport::new(row.report.clone()));
            rep.push(Check {
                name: row.check,
                observed: row.observed,
                expected: row.expected,
                tolerance: row.tolerance,
                rule: row.rule,
                pass: row.pass,
                note: None,
            });
        }
        Ok(rep.unwrap_or_else(|| StatReport::new("")))
    }

    pub fn write(&self, path: &Path, format: ExportFormat) -> io::Result<()> {
        match format {
            ExportFormat::Json => std::fs::write(path, self.to_json()),
            ExportFormat::Csv => std::fs::write(path, self.to_csv()),
            ExportFormat::Svg => Err(io::Error::new(io::ErrorKind::InvalidInput, "reports have no svg form")),
        }
    }
}

/// Plain decimals for ordinary sizes, exponent form for tiny or huge ones.
fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e12).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

impl fmt::Display for StatReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.name, if self.pass { "PASS" } else { "FAIL" })?;
        for c in &self.checks {
            write!(
                f,
                "  [{}] {}: observed {} expected {} ({} {})",
                if c.pass { "ok" } else { "FAIL" },
                c.name,
                num(c.observed),
                num(c.expected),
                c.rule,
                num(c.tolerance)
            )?;
            if let Some(n) = &c.note {
                write!(f, " {n}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Columns of the CSV export.
pub const CSV_HEADER: [&str; 7] = ["report", "check", "rule", "observed", "expected", "tolerance", "pass"];

#[derive(Serialize)]
struct CsvRow<'a> {
    report: &'a str,
    check: &'a str,
    rule: Rule,
    observed: f64,
    expected: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Deserialize)]
struct OwnedRow {
    report: String,
    check: String,
    rule: Rule,
    observed: f64,
    expected: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Json,
    Csv,
    Svg,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "csv" => Ok(ExportFormat::Csv),
            "svg" => Ok(ExportFormat::Svg),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

impl ExportFormat {
    /// Format implied by a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        path.extension()?.to_str()?.parse().ok()
    }
}

/// Settings of one experiment run, as given on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub outputs: Vec<String>,
}

impl ExperimentConfig {
    pub fn new(experiment: impl Into<String>, seed: u64) -> Self {
        ExperimentConfig {
            experiment: experiment.into(),
            seed,
            params: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn check(&self) -> Result<(), String> {
        match self.tolerances.iter().find(|(_, &t)| !(t > 0.0)) {
            Some((k, t)) => Err(format!("tolerance {k} = {t} is not positive")),
            None => Ok(()),
        }
    }
}
