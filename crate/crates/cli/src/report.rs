//! Run reports: one self-describing record per line.
//!
//! ```text
//! env tool=dsrigid version=0.1.0 command=geometry
//! config key=quadrature value="64x128"
//! check name=pre_integral anchor="Lemma preIntegral" residual=1.110223e-16 tolerance=1.000000e-8 pass=true
//! verdict overall=pass checks=5 failed=0
//! ```

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Extra `key=value` fields, printed after the fixed ones.
    pub extra: Vec<(String, String)>,
}

impl CheckRecord {
    /// A record that passes iff `residual <= tolerance`.
    pub fn bounded(name: impl Into<String>, anchor: &'static str, residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), anchor, residual, tolerance, pass: residual <= tolerance, extra: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.extra.push((key.to_string(), value.into()));
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub command: &'static str,
    pub config: Vec<(String, String)>,
    pub checks: Vec<CheckRecord>,
    /// Human-readable notes that do not affect the verdict.
    pub notes: Vec<String>,
    /// A hypothesis failed, so the checks did not all run.
    pub aborted: bool,
}

pub fn fmt_num(x: f64) -> String {
    format!("{x:.6e}")
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

impl RunReport {
    pub fn new(command: &'static str, config: Vec<(String, String)>) -> Self {
        Self { command, config, checks: Vec::new(), notes: Vec::new(), aborted: false }
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.checks.push(check);
    }

    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn passed(&self) -> bool {
        !self.aborted && self.failed() == 0
    }

    fn overall(&self) -> &'static str {
        if self.aborted {
            "invalid"
        } else if self.passed() {
            "pass"
        } else {
            "fail"
        }
    }

    pub fn render_records(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "env tool={} version={} core={} command={}",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION"),
            dsrigid_core::VERSION,
            self.command
        );
        for (k, v) in &self.config {
            let _ = writeln!(s, "config key={k} value={}", quote(v));
        }
        for c in &self.checks {
            let _ = write!(
                s,
                "check name={} anchor={} residual={} tolerance={} pass={}",
                c.name,
                quote(c.anchor),
                fmt_num(c.residual),
                fmt_num(c.tolerance),
                c.pass
            );
            for (k, v) in &c.extra {
                let _ = write!(s, " {k}={}", quote(v));
            }
            s.push('\n');
        }
        for n in &self.notes {
            let _ = writeln!(s, "note text={}", quote(n));
        }
        let _ = writeln!(s, "verdict overall={} checks={} failed={}", self.overall(), self.checks.len(), self.failed());
        s
    }

    pub fn render_summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}:", self.command);
        for c in &self.checks {
            let _ = writeln!(
                s,
                "  [{}] {:<28} {:>14} <= {:<14} ({})",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                fmt_num(c.residual),
                fmt_num(c.tolerance),
                c.anchor
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        let _ = writeln!(
            s,
            "overall: {} ({} of {} checks failed)",
            self.overall().to_uppercase(),
            self.failed(),
            self.checks.len()
        );
        s
    }
}
