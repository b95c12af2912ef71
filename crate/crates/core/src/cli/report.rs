//! Experiment reports and their csv / json-lines / text-table renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::revenue_lab::{Ratio, RevenueEstimate};

pub const CSV_COLUMNS: [&str; 8] = [
    "scenario_id",
    "mechanism",
    "mean",
    "std_err",
    "n_samples",
    "method",
    "bound_tested",
    "verdict",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "n/a",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario_id: String,
    pub mechanism: String,
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: u64,
    /// `mc`, `exact`, `quadrature`, or `ratio`.
    pub method: String,
    pub bound_tested: String,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario_id: String,
    pub rows: Vec<ReportRow>,
    /// Wall-clock seconds; informational and never part of the emitted bytes.
    #[serde(skip)]
    pub runtime_secs: f64,
}

impl ExperimentReport {
    pub fn new(scenario_id: impl Into<String>) -> Self {
        Self {
            scenario_id: scenario_id.into(),
            ..Self::default()
        }
    }

    pub fn push_estimate(
        &mut self,
        mechanism: impl Into<String>,
        est: &RevenueEstimate,
        bound_tested: impl Into<String>,
        verdict: Verdict,
    ) {
        self.rows.push(ReportRow {
            scenario_id: self.scenario_id.clone(),
            mechanism: mechanism.into(),
            mean: est.mean,
            std_err: est.std_err,
            n_samples: est.n_samples,
            method: est.method.as_str().into(),
            bound_tested: bound_tested.into(),
            verdict,
        });
    }

    pub fn push_ratio(
        &mut self,
        mechanism: impl Into<String>,
        ratio: &Ratio,
        n_samples: u64,
        bound_tested: impl Into<String>,
        verdict: Verdict,
    ) {
        self.rows.push(ReportRow {
            scenario_id: self.scenario_id.clone(),
            mechanism: mechanism.into(),
            mean: ratio.ratio,
            std_err: ratio.std_err,
            n_samples,
            method: "ratio".into(),
            bound_tested: bound_tested.into(),
            verdict,
        });
    }

    pub fn extend(&mut self, other: ExperimentReport) {
        self.rows.extend(other.rows);
        self.runtime_secs += other.runtime_secs;
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Fail)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    JsonLines,
    TextTable,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json-lines" | "jsonl" => Ok(Format::JsonLines),
            "text-table" | "text" => Ok(Format::TextTable),
            other => Err(Error::schema("format", format!("unknown format `{other}`"))),
        }
    }
}

fn row_fields(r: &ReportRow) -> [String; 8] {
    [
        r.scenario_id.clone(),
        r.mechanism.clone(),
        r.mean.to_string(),
        r.std_err.to_string(),
        r.n_samples.to_string(),
        r.method.clone(),
        r.bound_tested.clone(),
        r.verdict.as_str().to_string(),
    ]
}

/// Renders a report. Rows keep their insertion order.
pub fn emit_report(report: &ExperimentReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(CSV_COLUMNS).map_err(io)?;
            for r in &report.rows {
                w.write_record(row_fields(r)).map_err(io)?;
            }
            w.into_inner().map_err(|e| Error::Io(e.to_string()))
        }
        Format::JsonLines => {
            let mut out = Vec::new();
            for r in &report.rows {
                serde_json::to_writer(&mut out, r).map_err(|e| Error::Io(e.to_string()))?;
                out.push(b'\n');
            }
            Ok(out)
        }
        Format::TextTable => {
            let mut table: Vec<[String; 8]> = vec![CSV_COLUMNS.map(String::from)];
            table.extend(report.rows.iter().map(row_fields));
            let mut widths = [0usize; 8];
            for row in &table {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let mut out = String::new();
            for row in &table {
                let line: Vec<String> = row.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
                let _ = writeln!(out, "{}", line.join("  ").trim_end());
            }
            Ok(out.into_bytes())
        }
    }
}

/// Parses rows emitted in the json-lines format.
pub fn parse_json_lines(text: &str) -> Result<Vec<ReportRow>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::schema(format!("line {}", i + 1), e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::revenue_lab::Method;

    fn sample_report() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo");
        let est = RevenueEstimate {
            mean: 0.3333,
            std_err: 0.001,
            n_samples: 1000,
            method: Method::MonteCarlo,
        };
        r.push_estimate("second_price", &est, "none", Verdict::NotApplicable);
        r.push_ratio(
            "benchmark/second_price",
            &Ratio {
                ratio: 1.2,
                std_err: 0.01,
            },
            1000,
            "ratio <= 2",
            Verdict::Pass,
        );
        r
    }

    #[test]
    fn empty_report_is_header_only() {
        let bytes = emit_report(&ExperimentReport::new("x"), Format::Csv).unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "scenario_id,mechanism,mean,std_err,n_samples,method,bound_tested,verdict\n"
        );
    }

    #[test]
    fn csv_rows() {
        let text = String::from_utf8(emit_report(&sample_report(), Format::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "demo,second_price,0.3333,0.001,1000,mc,none,n/a");
        assert_eq!(lines[2], "demo,benchmark/second_price,1.2,0.01,1000,ratio,ratio <= 2,pass");
    }

    #[test]
    fn json_lines_round_trip() {
        let report = sample_report();
        let bytes = emit_report(&report, Format::JsonLines).unwrap();
        let rows = parse_json_lines(std::str::from_utf8(&bytes).unwrap()).unwrap();
        assert_eq!(rows, report.rows);
    }

    #[test]
    fn text_table_aligns() {
        let text = String::from_utf8(emit_report(&sample_report(), Format::TextTable).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        let col = lines[0].find("mechanism").unwrap();
        assert_eq!(lines[1].find("second_price"), Some(col));
    }

    #[test]
    fn verdict_summary() {
        let mut r = sample_report();
        assert!(r.all_pass());
        r.rows[1].verdict = Verdict::Fail;
        assert!(!r.all_pass());
        assert_eq!(r.failures().count(), 1);
    }
}
