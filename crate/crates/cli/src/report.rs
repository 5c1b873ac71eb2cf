//! Verification report.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        })
    }
}

/// One measured quantity of a check with its acceptance rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub label: String,
    pub value: f64,
    /// Human-readable rule, e.g. `<= 1e-7` or `in [8, 32]`.
    pub rule: String,
    pub threshold: f64,
    pub ok: bool,
}

impl Measurement {
    pub fn at_most(label: &str, value: f64, limit: f64) -> Self {
        Self {
            label: label.into(),
            value,
            rule: format!("<= {limit:e}"),
            threshold: limit,
            ok: value <= limit,
        }
    }

    pub fn at_least(label: &str, value: f64, limit: f64) -> Self {
        Self {
            label: label.into(),
            value,
            rule: format!(">= {limit}"),
            threshold: limit,
            ok: value >= limit,
        }
    }

    pub fn within(label: &str, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            label: label.into(),
            value,
            rule: format!("in [{lo}, {hi}]"),
            threshold: hi,
            ok: (lo..=hi).contains(&value),
        }
    }

    pub fn holds(label: &str, ok: bool) -> Self {
        Self {
            label: label.into(),
            value: if ok { 1.0 } else { 0.0 },
            rule: "== 1".into(),
            threshold: 1.0,
            ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub criterion: usize,
    pub status: Status,
    /// Value of the first failing measurement, or the first one on success.
    pub measured: f64,
    pub threshold: f64,
    pub runtime_s: f64,
    pub budget_s: f64,
    pub measurements: Vec<Measurement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckResult {
    pub fn detail(&self) -> String {
        let mut s = self
            .measurements
            .iter()
            .map(|m| format!("{}={:.6e} ({}{})", m.label, m.value, m.rule, if m.ok { "" } else { ", FAILED" }))
            .collect::<Vec<_>>()
            .join("; ");
        if let Some(e) = &self.error {
            if !s.is_empty() {
                s.push_str("; ");
            }
            s.push_str(e);
        }
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

pub const REPORT_HEADER: &str = "name,status,measured,threshold,runtime_s,budget_s,detail";

impl VerificationReport {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| c.status == Status::Fail).count()
    }

    pub fn passed(&self) -> bool {
        self.failed() == 0
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(REPORT_HEADER);
        s.push('\n');
        for c in &self.checks {
            let detail = c.detail().replace('"', "'");
            let _ = writeln!(
                s,
                "{},{},{},{},{:.3},{},\"{}\"",
                c.name, c.status, c.measured, c.threshold, c.runtime_s, c.budget_s, detail
            );
        }
        s
    }

    /// One line per check for terminal output.
    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "[{:>2}] {:<20} {}  measured={:.3e} threshold={:.3e}  {:.1}s (budget {}s)",
                    c.criterion,
                    c.name,
                    c.status.to_string().to_uppercase(),
                    c.measured,
                    c.threshold,
                    c.runtime_s,
                    c.budget_s
                )
            })
            .collect()
    }
}
