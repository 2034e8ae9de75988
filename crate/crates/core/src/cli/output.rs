use serde::Serialize;
use serde_json::{Map, Value};

use crate::format::{round_sig9, sig9};
use crate::stats::EstimateSummary;

use super::Format;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateEntry {
    pub name: String,
    pub point: f64,
    pub stderr: f64,
    pub ci95: [f64; 2],
    pub n: u64,
}

impl EstimateEntry {
    pub fn new(name: impl Into<String>, s: &EstimateSummary) -> Self {
        Self {
            name: name.into(),
            point: s.point,
            stderr: s.stderr,
            ci95: [s.ci95_low, s.ci95_high],
            n: s.n_effective,
        }
    }
}

/// The JSON document every command emits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub estimates: Vec<EstimateEntry>,
    pub derived: Map<String, Value>,
}

impl Report {
    pub fn estimate(&self, name: &str) -> Option<&EstimateEntry> {
        self.estimates.iter().find(|e| e.name == name)
    }
}

/// CSV table with preformatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub report: Report,
    /// Command-specific CSV; falls back to one row per estimate.
    pub table: Option<Table>,
}

impl CommandOutput {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut v = serde_json::to_value(&self.report).expect("report is plain data");
                round_floats(&mut v);
                let mut s = serde_json::to_string_pretty(&v).expect("report is plain data");
                s.push('\n');
                s
            }
            Format::Csv => match &self.table {
                Some(t) => t.render(),
                None => estimates_table(&self.report.estimates).render(),
            },
        }
    }
}

fn estimates_table(estimates: &[EstimateEntry]) -> Table {
    let mut t = Table::new(vec![
        "name",
        "point",
        "stderr",
        "ci95_low",
        "ci95_high",
        "n",
    ]);
    for e in estimates {
        t.push(vec![
            e.name.clone(),
            sig9(e.point),
            sig9(e.stderr),
            sig9(e.ci95[0]),
            sig9(e.ci95[1]),
            e.n.to_string(),
        ]);
    }
    t
}

/// Rounds every float in the document to 9 significant digits.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(round_sig9(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}
