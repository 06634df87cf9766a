//! The `report/v1` document, the per-probe margin table and the summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::config::RunConfig;

pub const SCHEMA: &str = "report/v1";

/// One violated condition at one probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationEntry {
    pub condition: String,
    pub probe: usize,
    pub coords: Vec<f64>,
    pub margin: f64,
}

/// What `worst` measures and how it is compared with `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// Smallest margin; passes when every probe is above the threshold.
    MinMargin,
    /// Largest residual; passes when at most the threshold.
    MaxResidual,
    /// Number of exceptions; passes when zero.
    Count,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<String>,
    pub passed: bool,
    pub probes: usize,
    pub measure: Measure,
    pub worst: f64,
    pub threshold: f64,
    pub violations: Vec<ViolationEntry>,
    /// Margin at each probe, by global probe index, for the CSV table.
    #[serde(skip)]
    pub per_probe: Vec<f64>,
}

impl CheckResult {
    pub fn residual(name: impl Into<String>, probes: usize, worst: f64, threshold: f64) -> Self {
        CheckResult {
            name: name.into(),
            closed_form: None,
            passed: worst <= threshold,
            probes,
            measure: Measure::MaxResidual,
            worst,
            threshold,
            violations: Vec::new(),
            per_probe: Vec::new(),
        }
    }

    /// Per-probe residuals; violations are the probes above the threshold.
    pub fn residuals(name: impl Into<String>, coords: &[Vec<f64>], residuals: &[f64], threshold: f64) -> Self {
        let name = name.into();
        let worst = residuals.iter().copied().fold(0.0, f64::max);
        let mut c = CheckResult::residual(name.clone(), residuals.len(), worst, threshold);
        c.passed = residuals.iter().all(|r| *r <= threshold);
        c.violations = residuals
            .iter()
            .enumerate()
            .filter(|(_, r)| !(**r <= threshold))
            .map(|(k, r)| ViolationEntry {
                condition: name.clone(),
                probe: k,
                coords: coords[k].clone(),
                margin: threshold - r,
            })
            .collect();
        c
    }

    /// Per-probe margins; violations are the probes not above the threshold.
    pub fn margins(name: impl Into<String>, coords: &[Vec<f64>], margins: Vec<f64>, threshold: f64) -> Self {
        let name = name.into();
        let violations: Vec<ViolationEntry> = margins
            .iter()
            .enumerate()
            .filter(|(_, m)| !(**m > threshold))
            .map(|(k, m)| ViolationEntry {
                condition: name.clone(),
                probe: k,
                coords: coords[k].clone(),
                margin: *m,
            })
            .collect();
        CheckResult {
            name,
            closed_form: None,
            passed: violations.is_empty(),
            probes: margins.len(),
            measure: Measure::MinMargin,
            worst: margins.iter().copied().fold(f64::INFINITY, f64::min),
            threshold,
            violations,
            per_probe: margins,
        }
    }

    pub fn count(name: impl Into<String>, probes: usize, violations: Vec<ViolationEntry>) -> Self {
        CheckResult {
            name: name.into(),
            closed_form: None,
            passed: violations.is_empty(),
            probes,
            measure: Measure::Count,
            worst: violations.len() as f64,
            threshold: 0.0,
            violations,
            per_probe: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    /// Summaries of the library reports behind the checks.
    pub details: BTreeMap<String, serde_json::Value>,
}

impl SuiteResult {
    pub fn new(suite: &str, checks: Vec<CheckResult>, details: BTreeMap<String, serde_json::Value>) -> Self {
        SuiteResult {
            suite: suite.to_string(),
            passed: checks.iter().all(|c| c.passed),
            checks,
            details,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
    pub library_version: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSummary {
    pub sampler: String,
    pub count: usize,
    pub variables: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictSummary {
    pub passed: bool,
    pub suites_passed: usize,
    pub suites_failed: usize,
    /// `suite/check` names of every failed check.
    pub failed_checks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub sampling_seconds: f64,
    pub suites: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub tool: Tool,
    pub config_hash: String,
    pub config: RunConfig,
    pub probes: ProbeSummary,
    pub suites: Vec<SuiteResult>,
    pub verdict: VerdictSummary,
    /// Wall-clock timings, written to a separate file so that the report
    /// itself is reproducible byte for byte.
    #[serde(skip)]
    pub timings: Timings,
    #[serde(skip)]
    pub probe_coords: Vec<Vec<f64>>,
}

impl RunReport {
    pub fn new(config: RunConfig, probes: ProbeSummary, probe_coords: Vec<Vec<f64>>, suites: Vec<SuiteResult>) -> Self {
        let failed_checks = suites
            .iter()
            .flat_map(|s| s.checks.iter().filter(|c| !c.passed).map(move |c| format!("{}/{}", s.suite, c.name)))
            .collect();
        let suites_passed = suites.iter().filter(|s| s.passed).count();
        RunReport {
            schema: SCHEMA,
            tool: Tool {
                name: "thermoconvex",
                version: env!("CARGO_PKG_VERSION"),
                library_version: thermoconvex::VERSION,
            },
            config_hash: config.hash(),
            config,
            probes,
            verdict: VerdictSummary {
                passed: suites_passed == suites.len(),
                suites_passed,
                suites_failed: suites.len() - suites_passed,
                failed_checks,
            },
            suites,
            timings: Timings::default(),
            probe_coords,
        }
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.suite == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn timings_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.timings).expect("timings serialize");
        s.push('\n');
        s
    }

    /// One row per probe: coordinates, each margin-bearing check, and the
    /// worst of them. Cells are empty where a check did not visit the probe.
    pub fn to_csv(&self) -> String {
        let columns: Vec<(String, &CheckResult)> = self
            .suites
            .iter()
            .flat_map(|s| {
                s.checks
                    .iter()
                    .filter(|c| !c.per_probe.is_empty())
                    .map(move |c| (format!("{}/{}", s.suite, c.name), c))
            })
            .collect();
        let mut out = String::from("probe");
        for v in &self.probes.variables {
            let _ = write!(out, ",{}", csv_field(v));
        }
        for (name, _) in &columns {
            let _ = write!(out, ",{}", csv_field(name));
        }
        out.push_str(",worst\n");
        for (k, x) in self.probe_coords.iter().enumerate() {
            let _ = write!(out, "{k}");
            for c in x {
                let _ = write!(out, ",{}", fmt_f64(*c));
            }
            let mut worst = f64::INFINITY;
            for (_, c) in &columns {
                match c.per_probe.get(k) {
                    Some(m) => {
                        worst = worst.min(*m);
                        let _ = write!(out, ",{}", fmt_f64(*m));
                    }
                    None => out.push(','),
                }
            }
            if worst.is_finite() {
                let _ = writeln!(out, ",{}", fmt_f64(worst));
            } else {
                out.push_str(",\n");
            }
        }
        out
    }

    /// The screen summary.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "thermoconvex {}  config {}  {} probes ({})",
            self.tool.version,
            &self.config_hash[..12],
            self.probes.count,
            self.probes.sampler
        );
        for s in &self.suites {
            let _ = writeln!(out, "{} {}", if s.passed { "PASS" } else { "FAIL" }, s.suite);
            for c in s.checks.iter().filter(|c| !c.passed) {
                let label = match &c.closed_form {
                    Some(f) => format!("{} [{}]", c.name, f),
                    None => c.name.clone(),
                };
                let _ = writeln!(
                    out,
                    "     {}: worst {} vs {}, {} violation(s) of {} probes",
                    label,
                    fmt_f64(c.worst),
                    fmt_f64(c.threshold),
                    c.violations.len(),
                    c.probes
                );
            }
        }
        let _ = writeln!(
            out,
            "verdict: {} ({} of {} suites passed)",
            if self.verdict.passed { "pass" } else { "fail" },
            self.verdict.suites_passed,
            self.suites.len()
        );
        out
    }
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_and_residual_checks() {
        let coords = vec![vec![1.0], vec![2.0]];
        let c = CheckResult::margins("m", &coords, vec![0.5, 1e-9], 1e-6);
        assert!(!c.passed);
        assert_eq!(c.violations.len(), 1);
        assert_eq!(c.violations[0].probe, 1);
        let r = CheckResult::residuals("r", &coords, &[1e-13, 1e-14], 1e-12);
        assert!(r.passed);
        assert_eq!(r.worst, 1e-13);
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(fmt_f64(24.0), "2.4000000000000000e1");
    }
}
