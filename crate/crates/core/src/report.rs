//! Machine-readable outcome of a verification run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::C64;

/// Failures beyond this count are tallied but not listed.
pub const MAX_LISTED_FAILURES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn passed(self) -> bool {
        self == Status::Pass
    }
}

/// One offending sample: the spectral point(s) it was taken at and its residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub points: Vec<[f64; 2]>,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub status: Status,
    pub max_residual: f64,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub params: BTreeMap<String, [f64; 2]>,
    pub failures: Vec<Failure>,
    #[serde(default)]
    pub failure_count: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn c2(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// JSON has no encoding for NaN or infinities; they are reported as `f64::MAX`.
fn finite_or_max(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::MAX
    }
}

impl CheckReport {
    pub fn builder(check: impl Into<String>, tolerance: f64, seed: u64) -> ReportBuilder {
        ReportBuilder {
            report: CheckReport {
                check: check.into(),
                status: Status::Pass,
                max_residual: 0.0,
                samples: 0,
                seed,
                tolerance,
                params: BTreeMap::new(),
                failures: Vec::new(),
                failure_count: 0,
                notes: Vec::new(),
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.status.passed()
    }

    /// Folds several reports into one named report. The combined report passes
    /// only if every part passes; failure details are prefixed with the part name.
    pub fn merge(check: impl Into<String>, parts: &[CheckReport]) -> CheckReport {
        let mut out = CheckReport {
            check: check.into(),
            status: Status::Pass,
            max_residual: 0.0,
            samples: 0,
            seed: parts.first().map(|p| p.seed).unwrap_or(0),
            tolerance: parts.iter().map(|p| p.tolerance).fold(0.0, f64::max),
            params: BTreeMap::new(),
            failures: Vec::new(),
            failure_count: 0,
            notes: Vec::new(),
        };
        for part in parts {
            if !part.passed() {
                out.status = Status::Fail;
            }
            out.max_residual = out.max_residual.max(part.max_residual);
            out.samples += part.samples;
            out.failure_count += part.failure_count;
            out.notes.extend(part.notes.iter().cloned());
            for (k, v) in &part.params {
                out.params.entry(k.clone()).or_insert(*v);
            }
            for f in &part.failures {
                if out.failures.len() >= MAX_LISTED_FAILURES {
                    break;
                }
                let mut f = f.clone();
                f.detail = Some(match f.detail {
                    Some(d) if d.starts_with(&format!("{}:", part.check)) => d,
                    Some(d) => format!("{}: {}", part.check, d),
                    None => part.check.clone(),
                });
                out.failures.push(f);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

pub struct ReportBuilder {
    report: CheckReport,
}

impl ReportBuilder {
    pub fn param(mut self, name: impl Into<String>, value: C64) -> Self {
        self.report.params.insert(name.into(), c2(value));
        self
    }

    pub fn params(mut self, params: impl IntoIterator<Item = (String, C64)>) -> Self {
        for (k, v) in params {
            self.report.params.insert(k, c2(v));
        }
        self
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.report.notes.push(note.into());
    }

    pub fn add_param(&mut self, name: impl Into<String>, value: C64) {
        self.report.params.insert(name.into(), c2(value));
    }

    /// Records one sample. A NaN residual counts as a failure.
    pub fn record(&mut self, points: &[C64], residual: f64, detail: Option<String>) {
        let r = &mut self.report;
        r.samples += 1;
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        let failed = residual > r.tolerance;
        r.max_residual = r.max_residual.max(finite_or_max(residual));
        if failed {
            r.status = Status::Fail;
            r.failure_count += 1;
            if r.failures.len() < MAX_LISTED_FAILURES {
                r.failures.push(Failure {
                    points: points.iter().copied().map(c2).collect(),
                    residual: finite_or_max(residual),
                    detail,
                });
            }
        }
    }

    /// Records a sample that could not be evaluated at all.
    pub fn record_error(&mut self, points: &[C64], detail: String) {
        self.record(points, f64::INFINITY, Some(detail));
    }

    pub fn finish(self) -> CheckReport {
        self.report
    }
}
