use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::Format;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Pretty JSON with a trailing newline. Objects get a `timestamp` field
/// (seconds since the epoch) unless `stamp` is false.
pub fn write_json<T: Serialize>(path: &Path, value: &T, stamp: bool) -> Result<()> {
    let mut v = serde_json::to_value(value)?;
    if let (true, Value::Object(map)) = (stamp, &mut v) {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        map.insert("timestamp".into(), secs.into());
    }
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// A flat key-value report for standard output.
#[derive(Debug, Default)]
pub struct Report {
    fields: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    /// Non-finite floats are written as `null`.
    pub fn float(&mut self, key: &str, x: f64) -> &mut Self {
        let v = if x.is_finite() { Value::from(x) } else { Value::Null };
        self.set(key, v)
    }

    pub fn extend(&mut self, other: Report) -> &mut Self {
        self.fields.extend(other.fields);
        self
    }

    fn to_map(&self) -> Map<String, Value> {
        self.fields.iter().cloned().collect()
    }

    /// Several reports as a JSON array, or as CSV rows under the union of
    /// their keys. Missing fields are left empty.
    pub fn render_table(reports: &[Report], format: Format) -> String {
        match format {
            Format::Json => {
                let rows: Vec<Value> = reports.iter().map(|r| Value::Object(r.to_map())).collect();
                serde_json::to_string_pretty(&rows).expect("report values serialize")
            }
            Format::Csv => {
                let mut header: Vec<&str> = Vec::new();
                for r in reports {
                    for (k, _) in &r.fields {
                        if !header.contains(&k.as_str()) {
                            header.push(k);
                        }
                    }
                }
                let mut lines = vec![header.join(",")];
                for r in reports {
                    let map = r.to_map();
                    let row: Vec<String> = header
                        .iter()
                        .map(|k| map.get(*k).map(csv_cell).unwrap_or_default())
                        .collect();
                    lines.push(row.join(","));
                }
                lines.join("\n")
            }
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                serde_json::to_string_pretty(&Value::Object(self.to_map())).expect("report values serialize")
            }
            Format::Csv => {
                let header: Vec<&str> = self.fields.iter().map(|(k, _)| k.as_str()).collect();
                let row: Vec<String> = self.fields.iter().map(|(_, v)| csv_cell(v)).collect();
                format!("{}\n{}", header.join(","), row.join(","))
            }
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// `round,length` rows.
pub fn write_series(path: &Path, lengths: &[f64]) -> Result<()> {
    let mut text = String::from("round,length\n");
    for (i, l) in lengths.iter().enumerate() {
        text.push_str(&format!("{i},{l}\n"));
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
