use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;

pub const SCHEMA: &str = "BBLAB-1";

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Report document: config echo, results, measured constants and the
/// invariant ledger.
#[derive(Debug)]
pub struct ReportDocument {
    config: ExperimentConfig,
    results: serde_json::Map<String, Value>,
    constants: serde_json::Map<String, Value>,
    checks: Vec<Check>,
    csv: Option<(Vec<String>, Vec<Vec<f64>>)>,
}

impl ReportDocument {
    pub fn new(config: ExperimentConfig) -> Self {
        ReportDocument {
            config,
            results: Default::default(),
            constants: Default::default(),
            checks: Vec::new(),
            csv: None,
        }
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn result(&mut self, key: &str, v: impl Serialize) {
        self.results.insert(key.into(), to_value(v));
    }

    pub fn constant(&mut self, key: &str, v: f64) {
        self.constants.insert(key.into(), to_value(v));
    }

    /// Record `value ≤ bound`.
    pub fn check_le(&mut self, name: &str, value: f64, bound: f64) {
        self.checks.push(Check {
            name: name.into(),
            value,
            bound,
            pass: value <= bound,
        });
    }

    /// Record `value ≥ bound`.
    pub fn check_ge(&mut self, name: &str, value: f64, bound: f64) {
        self.checks.push(Check {
            name: name.into(),
            value,
            bound,
            pass: value >= bound,
        });
    }

    pub fn table(&mut self, columns: &[&str], rows: Vec<Vec<f64>>) {
        self.csv = Some((columns.iter().map(|s| s.to_string()).collect(), rows));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn to_json(&self) -> String {
        let doc = json!({
            "schema": SCHEMA,
            "config": to_value(&self.config),
            "results": self.results,
            "constants": self.constants,
            "invariants": self.checks.iter().map(to_value).collect::<Vec<_>>(),
            "passed": self.passed(),
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Option<String> {
        let (cols, rows) = self.csv.as_ref()?;
        let mut s = cols.join(",");
        s.push('\n');
        for r in rows {
            let line: Vec<String> = r.iter().map(|&v| csv_number(v)).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        Some(s)
    }
}

fn csv_number(v: f64) -> String {
    if !v.is_finite() {
        String::new()
    } else if v == 0.0 || (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Non-finite floats serialize as `null`.
fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report value serializes")
}
