//! Config-driven experiment runner behind the `blab` binary.
//!
//! Each run writes `<output_dir>/<experiment>.csv` (header row, LF line
//! endings, floats with 17 significant digits) and
//! `<output_dir>/<experiment>.report.txt`. Summary statistics in the report
//! are recomputed from the CSV columns, so the report can be re-derived from
//! the CSV and the recorded tolerances.

pub mod config;
mod experiments;
pub mod sample;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub use config::{Experiment, ExperimentConfig, DEFAULT_TOLERANCES};
pub use sample::SampleSpec;

use crate::error::{Error, Result};
use crate::infogeo::Verdict;
use crate::point::Point;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Renders a float with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

/// A CSV table built row by row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Numeric values of one column, skipping empty cells.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let Some(idx) = self.header.iter().position(|h| h == name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter_map(|r| match &r[idx] {
                Cell::Num(x) => Some(*x),
                _ => None,
            })
            .collect()
    }
}

/// Column names for a point: `{prefix}_re, {prefix}_im` or, in ℂ², one pair per coordinate.
pub(crate) fn point_header(prefix: &str, dim: usize) -> Vec<String> {
    if dim == 1 {
        vec![format!("{prefix}_re"), format!("{prefix}_im")]
    } else {
        (1..=dim).flat_map(|k| [format!("{prefix}{k}_re"), format!("{prefix}{k}_im")]).collect()
    }
}

pub(crate) fn point_cells(p: &Point) -> Vec<Cell> {
    p.coords().iter().flat_map(|c| [Cell::Num(c.re), Cell::Num(c.im)]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// Pass when the statistic is at most the threshold.
    AtMost,
    /// Pass when the statistic exceeds the threshold.
    Above,
}

/// One pass/fail comparison recorded in a report.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub relation: Relation,
    pub threshold: f64,
}

impl Check {
    pub fn at_most(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            relation: Relation::AtMost,
            threshold,
        }
    }

    pub fn above(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            relation: Relation::Above,
            threshold,
        }
    }

    pub fn passes(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.statistic <= self.threshold,
            Relation::Above => self.statistic > self.threshold,
        }
    }
}

/// Everything an experiment produces before it is written out.
#[derive(Clone, Debug, Default)]
pub struct Findings {
    pub table: Table,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub verdict: Option<Verdict>,
}

/// Result of a completed run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub experiment: Experiment,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub verdict: Option<Verdict>,
    pub error: Option<String>,
    pub csv_path: PathBuf,
    pub report_path: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn render_report(cfg: &ExperimentConfig, findings: &Findings, error: Option<&str>, passed: bool) -> String {
    let mut out = String::new();
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let _ = writeln!(out, "experiment: {}", cfg.experiment);
    let _ = writeln!(out, "timestamp: {timestamp}");
    let _ = writeln!(out, "config:");
    for (k, v) in &cfg.echo {
        let _ = writeln!(out, "  {k} = {v}");
    }
    let _ = writeln!(out, "rows: {}", findings.table.rows.len());
    for note in &findings.notes {
        let _ = writeln!(out, "note: {note}");
    }
    for c in &findings.checks {
        let (rel, status) = match c.relation {
            Relation::AtMost => ("<=", c.passes()),
            Relation::Above => (">", c.passes()),
        };
        let _ = writeln!(
            out,
            "check {}: {} {rel} {} {}",
            c.name,
            fmt_float(c.statistic),
            fmt_float(c.threshold),
            if status { "PASS" } else { "FAIL" }
        );
    }
    if let Some(v) = findings.verdict {
        let _ = writeln!(out, "verdict: {v}");
        if let Some(expected) = cfg.expected {
            let _ = writeln!(out, "expected: {expected}");
        }
    }
    if let Some(e) = error {
        let _ = writeln!(out, "error: {e}");
    }
    let _ = writeln!(out, "result: {}", if passed { "PASS" } else { "FAIL" });
    out
}

fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(".blab-write-probe");
    fs::write(&probe, b"")?;
    fs::remove_file(&probe)?;
    Ok(())
}

/// Runs one experiment and writes its CSV and report.
///
/// Configuration problems (bad specs, mismatched domains, samples outside the
/// domain, unwritable output) are returned as errors; numerical failures are
/// recorded in the report and yield a failed outcome.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    ensure_writable(&cfg.output_dir)?;
    let csv_path = cfg.output_dir.join(format!("{}.csv", cfg.experiment));
    let report_path = cfg.output_dir.join(format!("{}.report.txt", cfg.experiment));
    let (findings, error) = match experiments::Setup::new(cfg).and_then(|s| experiments::run(&s)) {
        Ok(f) => (f, None),
        Err(e) if e.is_config_error() => return Err(e),
        Err(e) => (Findings::default(), Some(e.to_string())),
    };
    let verdict_ok = match (findings.verdict, cfg.expected) {
        (Some(v), Some(expected)) => v == expected,
        _ => true,
    };
    let passed = error.is_none() && verdict_ok && findings.checks.iter().all(Check::passes);
    fs::write(&csv_path, findings.table.to_csv())?;
    fs::write(&report_path, render_report(cfg, &findings, error.as_deref(), passed))?;
    Ok(RunOutcome {
        experiment: cfg.experiment,
        passed,
        checks: findings.checks,
        verdict: findings.verdict,
        error,
        csv_path,
        report_path,
    })
}

/// Reads a config file, runs it, and returns the process exit status.
pub fn run_config_file(path: &Path) -> i32 {
    let cfg = match ExperimentConfig::from_file(path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("blab: {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    };
    match run_experiment(&cfg) {
        Ok(outcome) => {
            println!(
                "{}: {} ({})",
                outcome.experiment,
                if outcome.passed { "PASS" } else { "FAIL" },
                outcome.report_path.display()
            );
            if let Some(e) = &outcome.error {
                eprintln!("blab: {e}");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("blab: {}: {e}", path.display());
            match e {
                Error::Io(_) => EXIT_CONFIG,
                _ if e.is_config_error() => EXIT_CONFIG,
                _ => EXIT_FAIL,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_significant_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(-2.5), "-2.5000000000000000e0");
        let parsed: f64 = fmt_float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(parsed, std::f64::consts::PI);
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["a".into(), "b".into(), "c".into()]);
        t.push(vec![Cell::Num(1.0), Cell::Text("x".into()), Cell::Empty]);
        assert_eq!(t.to_csv(), "a,b,c\n1.0000000000000000e0,x,\n");
        assert_eq!(t.column("a"), vec![1.0]);
        assert!(t.column("c").is_empty());
    }

    #[test]
    fn checks() {
        assert!(Check::at_most("x", 1.0, 1.0).passes());
        assert!(!Check::above("x", 1.0, 1.0).passes());
        assert!(Check::above("x", 1.1, 1.0).passes());
    }
}
