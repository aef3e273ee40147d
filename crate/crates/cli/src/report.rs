//! Versioned JSON reports.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA: u64 = 1;

/// An exact value, rendered as text.
pub fn exact(s: impl ToString) -> Value {
    json!({ "value": s.to_string(), "provenance": "exact" })
}

/// A floating-point value with its stated relative tolerance.
pub fn float(v: f64, tol: f64) -> Value {
    let value = if v.is_finite() { json!(v) } else { Value::String(v.to_string()) };
    json!({ "value": value, "provenance": format!("float({tol:e})") })
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

#[derive(Debug)]
pub struct Report {
    pub command: String,
    pub inputs: Map<String, Value>,
    pub results: Map<String, Value>,
    pub certificates: Map<String, Value>,
    pub violations: Vec<String>,
    pub timings: Option<Map<String, Value>>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            inputs: Map::new(),
            results: Map::new(),
            certificates: Map::new(),
            violations: Vec::new(),
            timings: None,
        }
    }

    pub fn time(&mut self, step: &str, secs: f64) {
        if let Some(t) = self.timings.as_mut() {
            t.insert(step.to_string(), json!(secs));
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "certificates": self.certificates,
            "violations": self.violations,
            "timings": self.timings,
        })
    }

    pub fn render(&self, format: Format) -> String {
        let v = self.to_json();
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Text => {
                let mut out = String::new();
                render_text(&v, "", &mut out);
                out
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

fn render_text(v: &Value, prefix: &str, out: &mut String) {
    match v {
        Value::Object(m) if m.len() == 2 && m.contains_key("provenance") && m.contains_key("value") => {
            let val = match &m["value"] {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{prefix} = {val}  [{}]\n", m["provenance"].as_str().unwrap_or("")));
        }
        Value::Object(m) => {
            for (k, x) in m {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                render_text(x, &p, out);
            }
        }
        Value::Array(a) if a.is_empty() => out.push_str(&format!("{prefix} = []\n")),
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                render_text(x, &format!("{prefix}[{i}]"), out);
            }
        }
        Value::String(s) => out.push_str(&format!("{prefix} = {s}\n")),
        other => out.push_str(&format!("{prefix} = {other}\n")),
    }
}

/// Write `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().to_string()).unwrap_or_else(|| "report".into());
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}
