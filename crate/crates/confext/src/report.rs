//! Machine-readable run reports. JSON is canonical; sweeps also render a
//! CSV table. The field layout is documented in `docs/report-schema.md`.

use std::fmt::Write as _;

use serde::Serialize;

use confext_core::inequalities::{QuotientReport, Verdict};
use confext_core::Error;

use crate::config::RunConfig;

/// Version of the report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The check could not be evaluated (non-convergence, rejected input).
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// Compact description of what was fed to the check.
    pub inputs: String,
    pub value: Option<f64>,
    pub error: Option<f64>,
    pub reference: Option<f64>,
    /// Quotient verdict (`below`, `saturates`, `violates`) where a
    /// reference constant applies, otherwise `holds`, `fails` or `error`.
    pub verdict: &'static str,
    pub status: Status,
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, inputs: impl Into<String>) -> Self {
        CheckRecord {
            name: name.into(),
            inputs: inputs.into(),
            value: None,
            error: None,
            reference: None,
            verdict: "holds",
            status: Status::Pass,
            note: None,
        }
    }

    pub fn value(mut self, value: f64, error: f64) -> Self {
        self.value = Some(value);
        self.error = Some(error);
        self
    }

    pub fn reference(mut self, reference: f64) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Sets `Pass` or `Fail`, keeping a quotient verdict if one is set.
    pub fn holds(mut self, ok: bool) -> Self {
        self.status = if ok { Status::Pass } else { Status::Fail };
        if matches!(self.verdict, "holds" | "fails") {
            self.verdict = if ok { "holds" } else { "fails" };
        }
        self
    }

    pub fn failed(name: impl Into<String>, inputs: impl Into<String>, err: &Error) -> Self {
        CheckRecord {
            status: Status::Error,
            verdict: "error",
            note: Some(err.to_string()),
            ..CheckRecord::new(name, inputs)
        }
    }

    /// Record of a quotient with a verdict attached; passes when the verdict
    /// is one of `accept`.
    pub fn quotient(name: impl Into<String>, inputs: impl Into<String>, r: &QuotientReport, accept: &[Verdict]) -> Self {
        let mut rec = CheckRecord::new(name, inputs).value(r.quotient, r.combined_error());
        rec.reference = r.reference_constant;
        rec.verdict = r.verdict.map_or("holds", Verdict::name);
        rec.holds(r.verdict.is_some_and(|v| accept.contains(&v)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub a: f64,
    pub s: Option<f64>,
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateRecord {
    pub c: f64,
    pub lambda: f64,
    pub y0: Vec<f64>,
    pub fit_residual: f64,
    pub quotient: f64,
    pub sharp_constant: f64,
    pub gap: f64,
    pub steps: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: RunConfig,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<SweepRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidate: Option<CandidateRecord>,
    pub warnings: Vec<String>,
    /// Excluded from determinism comparisons.
    pub wall_time_seconds: f64,
}

impl Report {
    /// Sorts records by name so that assembly order does not depend on
    /// scheduling.
    pub fn new(config: &RunConfig, mut records: Vec<CheckRecord>) -> Self {
        records.sort_by(|a, b| a.name.cmp(&b.name));
        let count = |s: Status| records.iter().filter(|r| r.status == s).count();
        let summary = Summary {
            total: records.len(),
            passed: count(Status::Pass),
            failed: count(Status::Fail),
            errors: count(Status::Error),
        };
        Report {
            schema: SCHEMA_VERSION,
            tool: "confext",
            version: env!("CARGO_PKG_VERSION"),
            command: config.command.name(),
            config: config.clone(),
            records,
            summary,
            table: None,
            candidate: None,
            warnings: config.warnings(),
            wall_time_seconds: 0.0,
        }
    }

    /// 0 when every check passed, 2 if any check could not be evaluated,
    /// otherwise 1.
    pub fn exit_code(&self) -> i32 {
        if self.summary.errors > 0 {
            2
        } else if self.summary.failed > 0 {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// The JSON report without the wall-time field.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Some(o) = v.as_object_mut() {
            o.remove("wall_time_seconds");
        }
        serde_json::to_string_pretty(&v).expect("values serialize")
    }

    /// The sweep table as `n,a,S,error`; failed points leave `S` and
    /// `error` empty.
    pub fn table_csv(&self) -> Option<String> {
        let rows = self.table.as_ref()?;
        let mut out = String::from("n,a,S,error\n");
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in rows {
            writeln!(out, "{},{},{},{}", r.n, r.a, cell(r.s), cell(r.error)).expect("writing to a string");
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Command;

    #[test]
    fn summary_and_exit_codes() {
        let cfg = RunConfig::new(Command::VerifyCarleman);
        let ok = CheckRecord::new("b", "x").holds(true);
        let bad = CheckRecord::new("a", "x").holds(false);
        let r = Report::new(&cfg, vec![ok.clone(), bad.clone()]);
        assert_eq!(r.records[0].name, "a");
        assert_eq!((r.summary.passed, r.summary.failed), (1, 1));
        assert_eq!(r.exit_code(), 1);
        let err = CheckRecord::failed("c", "x", &Error::Unsupported("y".into()));
        assert_eq!(Report::new(&cfg, vec![ok.clone(), bad, err]).exit_code(), 2);
        assert_eq!(Report::new(&cfg, vec![ok]).exit_code(), 0);
    }

    #[test]
    fn wall_time_is_excluded_from_the_deterministic_form() {
        let cfg = RunConfig::new(Command::VerifyCarleman);
        let mut a = Report::new(&cfg, vec![]);
        let mut b = a.clone();
        a.wall_time_seconds = 1.0;
        b.wall_time_seconds = 2.0;
        assert_ne!(a.to_json(), b.to_json());
        assert_eq!(a.deterministic_json(), b.deterministic_json());
    }

    #[test]
    fn csv_leaves_failed_points_blank() {
        let cfg = RunConfig::new(Command::Sweep);
        let mut r = Report::new(&cfg, vec![]);
        r.table = Some(vec![
            SweepRow {
                n: 3,
                a: 0.0,
                s: Some(0.5),
                error: Some(1e-12),
            },
            SweepRow {
                n: 3,
                a: 0.5,
                s: None,
                error: None,
            },
        ]);
        assert_eq!(r.table_csv().unwrap(), "n,a,S,error\n3,0,0.5,0.000000000001\n3,0.5,,\n");
    }
}
