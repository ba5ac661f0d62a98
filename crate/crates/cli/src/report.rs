//! Tables (CSV or JSON) and the per-run JSON summary.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A named table of rows; cells are JSON values so one table can be written
/// in either format.
#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Self { name: name.into(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn cell(v: &Value) -> String {
        match v {
            Value::Null => String::new(),
            Value::String(s) => s.clone(),
            Value::Number(n) => match n.as_f64() {
                Some(f) if !n.is_i64() && !n.is_u64() => format!("{f:.12e}"),
                _ => n.to_string(),
            },
            other => other.to_string(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.headers.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.iter().map(Self::cell).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self.headers.iter().cloned().zip(r.iter().cloned()).collect();
                Value::Object(obj)
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("rows serialize")
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<PathBuf> {
        let (path, body) = match format {
            Format::Csv => (dir.join(format!("{}.csv", self.name)), self.to_csv()),
            Format::Json => (dir.join(format!("{}.json", self.name)), self.to_json()),
        };
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// One thresholded check of a command.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, threshold: impl Into<String>, pass: bool) -> Self {
        Self { name: name.into(), value, threshold: threshold.into(), pass }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub command: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub details: Value,
    pub config: Value,
}

/// Output of one command: tables, checks, and free-form summary details.
#[derive(Debug, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub details: Map<String, Value>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write(&self, dir: &Path, format: Format, command: &str, config: Value) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for t in &self.tables {
            t.write(dir, format)?;
        }
        let summary = Summary {
            command: command.into(),
            pass: self.pass(),
            checks: self.checks.clone(),
            details: Value::Object(self.details.clone()),
            config,
        };
        let path = dir.join("summary.json");
        fs::write(&path, serde_json::to_string_pretty(&summary)?).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_and_json_agree_on_shape() {
        let mut t = Table::new("x", &["n", "d_n"]);
        t.push(vec![json!(3), json!(0.5)]);
        t.push(vec![json!(4), Value::Null]);
        assert_eq!(t.to_csv(), "n,d_n\n3,5.000000000000e-1\n4,\n");
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v[0]["n"], json!(3));
    }
}
