use std::collections::BTreeMap;

use m2r_core::Diagnostic;
use serde::Serialize;

/// Version of the JSON report layout.
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Range {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct JsonDiagnostic {
    pub file: String,
    pub range: Range,
    pub rule: String,
    pub severity: String,
    pub action: String,
    pub message: String,
    pub fix_available: bool,
}

#[derive(Debug, Serialize)]
pub struct JsonReport {
    pub version: u32,
    pub diagnostics: Vec<JsonDiagnostic>,
    /// Diagnostic count per rule id.
    pub summary: BTreeMap<String, usize>,
}

pub fn text(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{d}\n")).collect()
}

pub fn json(diags: &[Diagnostic]) -> String {
    let mut summary = BTreeMap::new();
    for d in diags {
        *summary.entry(d.rule.as_str().to_string()).or_insert(0) += 1;
    }
    let report = JsonReport {
        version: REPORT_VERSION,
        diagnostics: diags
            .iter()
            .map(|d| JsonDiagnostic {
                file: d.file.display().to_string(),
                range: Range {
                    start_line: d.span.start_line,
                    start_col: d.span.start_col,
                    end_line: d.span.end_line,
                    end_col: d.span.end_col,
                },
                rule: d.rule.as_str().to_string(),
                severity: d.severity.as_str().to_string(),
                action: d.action.as_str().to_string(),
                message: d.message.clone(),
                fix_available: d.fix.is_some(),
            })
            .collect(),
        summary,
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}
