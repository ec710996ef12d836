use serde::{Deserialize, Serialize};

use crate::{HarnessError, OutputFormat, RunStats};

pub const SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 6] = ["instance", "avg", "std", "median", "best", "feasible_count"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub schema_version: u32,
    pub stats: Vec<RunStats>,
}

fn fixed(x: Option<f64>, decimals: usize) -> Option<String> {
    // + 0.0 turns -0.0 into 0.0
    x.map(|v| format!("{:.*}", decimals, v + 0.0))
}

/// Formatted cells in column order; missing statistics are `None`.
fn cells(s: &RunStats) -> [Option<String>; 6] {
    [
        Some(s.instance.clone()),
        fixed(s.avg, 1),
        fixed(s.std, 2),
        fixed(s.median, 1),
        fixed(s.best, 1),
        Some(s.feasible_count.to_string()),
    ]
}

pub fn emit_table(stats: &[RunStats], format: OutputFormat) -> String {
    match format {
        OutputFormat::Table => text(stats),
        OutputFormat::Csv => csv_text(stats),
        OutputFormat::Json => {
            let report = JsonReport {
                schema_version: SCHEMA_VERSION,
                stats: stats.to_vec(),
            };
            let mut out = serde_json::to_string_pretty(&report).expect("report serializes");
            out.push('\n');
            out
        }
    }
}

fn text(stats: &[RunStats]) -> String {
    let rows: Vec<[String; 6]> = stats
        .iter()
        .map(|s| cells(s).map(|c| c.unwrap_or_else(|| "-".into())))
        .collect();
    let mut widths = COLUMNS.map(str::len);
    for row in &rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |row: [&str; 6]| {
        let mut s = format!("{:<w$}", row[0], w = widths[0]);
        for (c, w) in row.iter().zip(widths).skip(1) {
            s.push_str(&format!("  {c:>w$}"));
        }
        s.push('\n');
        s
    };
    let mut out = line(COLUMNS);
    for row in &rows {
        out.push_str(&line(row.each_ref().map(String::as_str)));
    }
    out
}

fn csv_text(stats: &[RunStats]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS).expect("in-memory write");
    for s in stats {
        w.write_record(cells(s).map(Option::unwrap_or_default))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Reads back a JSON report written by [`emit_table`].
pub fn parse_json_report(text: &str) -> Result<Vec<RunStats>, HarnessError> {
    let report: JsonReport = serde_json::from_str(text)?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(HarnessError::Schema(report.schema_version));
    }
    Ok(report.stats)
}
