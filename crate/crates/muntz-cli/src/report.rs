//! Report rendering: JSON is the authoritative format; CSV gives one summary
//! row per record with a stable column order for table and plot generation.

use serde_json::Value;
use thiserror::Error;

use crate::run::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "json" => Some(ReportFormat::Json),
            "csv" => Some(ReportFormat::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot render a CSV report from an empty record list")]
    Empty,
}

/// Renders `value` with 12 significant digits.
fn fmt_sig(value: f64) -> String {
    format!("{value:.11e}")
}

fn summary_field<'a>(record: &'a RunRecord, key: &str) -> Option<&'a Value> {
    record.payload.get("summary").and_then(|s| s.get(key))
}

/// Renders records as a JSON array or a sorted CSV summary.
///
/// CSV columns: `experiment,n,value,bound,verdict`, rows ordered by
/// `(experiment, n)`; numeric cells carry 12 significant digits.
pub fn emit_report(records: &[RunRecord], format: ReportFormat) -> Result<String, ReportError> {
    match format {
        ReportFormat::Json => {
            Ok(serde_json::to_string_pretty(records).expect("records serialize"))
        }
        ReportFormat::Csv => {
            if records.is_empty() {
                return Err(ReportError::Empty);
            }
            let mut rows: Vec<(String, Option<u64>, String, String, String)> = records
                .iter()
                .map(|r| {
                    let n = summary_field(r, "n").and_then(Value::as_u64);
                    let value = summary_field(r, "value")
                        .and_then(Value::as_f64)
                        .map(fmt_sig)
                        .unwrap_or_default();
                    let bound = summary_field(r, "bound")
                        .and_then(Value::as_f64)
                        .map(fmt_sig)
                        .unwrap_or_default();
                    let verdict = serde_json::to_value(r.verdict)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_string))
                        .unwrap_or_default();
                    (r.experiment.clone(), n, value, bound, verdict)
                })
                .collect();
            rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));

            let mut out = String::from("experiment,n,value,bound,verdict\n");
            for (experiment, n, value, bound, verdict) in rows {
                let n_cell = n.map(|v| v.to_string()).unwrap_or_default();
                out.push_str(&format!("{experiment},{n_cell},{value},{bound},{verdict}\n"));
            }
            Ok(out)
        }
    }
}
