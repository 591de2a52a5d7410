use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Result of one subcommand before rendering.
#[derive(Debug, Clone)]
pub struct Output {
    pub json: Value,
    /// Human-readable rendering; `None` falls back to `key: value` lines.
    pub text: Option<String>,
    /// CSV rows; `None` uses the JSON value itself.
    pub rows: Option<Vec<Value>>,
    /// Set when the command ran but reported failed checks.
    pub failures: usize,
}

impl Output {
    pub fn new(json: Value) -> Self {
        Output { json, text: None, rows: None, failures: 0 }
    }

    pub fn text(mut self, text: String) -> Self {
        self.text = Some(text);
        self
    }

    pub fn rows(mut self, rows: Vec<Value>) -> Self {
        self.rows = Some(rows);
        self
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        let mut s = match format {
            Format::Json => serde_json::to_string(&self.json).map_err(|e| CliError::Io(e.to_string()))?,
            Format::Text => match &self.text {
                Some(t) => t.clone(),
                None => key_value_lines(&self.json),
            },
            Format::Csv => {
                let rows = match (&self.rows, &self.json) {
                    (Some(rows), _) => rows.clone(),
                    (None, Value::Array(items)) => items.clone(),
                    (None, other) => vec![other.clone()],
                };
                to_csv(&rows)?
            }
        };
        if !s.ends_with('\n') {
            s.push('\n');
        }
        Ok(s)
    }
}

/// Serializes `value` into a JSON object (empty if it is not one).
pub fn object<T: Serialize>(value: &T) -> Map<String, Value> {
    match serde_json::to_value(value) {
        Ok(Value::Object(map)) => map,
        _ => Map::new(),
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        _ => {
            let key = if prefix.is_empty() { "value".to_string() } else { prefix.to_string() };
            out.push((key, cell(value)));
        }
    }
}

fn cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn key_value_lines(value: &Value) -> String {
    match value {
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join("\n"),
        _ => {
            let mut fields = Vec::new();
            flatten("", value, &mut fields);
            fields.iter().map(|(k, v)| format!("{k}: {v}")).collect::<Vec<_>>().join("\n")
        }
    }
}

fn to_csv(rows: &[Value]) -> Result<String, CliError> {
    let flat: Vec<Vec<(String, String)>> = rows
        .iter()
        .map(|row| {
            let mut fields = Vec::new();
            flatten("", row, &mut fields);
            fields
        })
        .collect();
    let mut header: Vec<String> = Vec::new();
    for fields in &flat {
        for (k, _) in fields {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    for key in ["n", "index"] {
        if let Some(pos) = header.iter().position(|h| h == key) {
            let k = header.remove(pos);
            header.insert(0, k);
        }
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    writer.write_record(&header).map_err(io)?;
    for fields in &flat {
        let record = header.iter().map(|h| {
            fields.iter().find(|(k, _)| k == h).map(|(_, v)| v.as_str()).unwrap_or("")
        });
        writer.write_record(record).map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}
