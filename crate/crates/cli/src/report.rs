//! Run reports and their JSON / CSV serialization.
//!
//! Floats are printed in scientific notation with 17 significant digits so
//! that they round-trip exactly; integers print as integers.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn new(path: &str, bytes: &[u8]) -> Self {
        let hash = Sha256::digest(bytes);
        let mut hex = String::with_capacity(64);
        for b in hash {
            write!(hex, "{b:02x}").unwrap();
        }
        InputDigest { path: path.to_string(), sha256: hex }
    }
}

/// A named numeric sequence, one value per level.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub name: String,
    pub points: Vec<(usize, f64)>,
}

impl Trace {
    pub fn new(name: &str, points: impl IntoIterator<Item = (usize, f64)>) -> Self {
        Trace { name: name.to_string(), points: points.into_iter().collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub payload: Value,
    /// Library operations the command invoked, in call order.
    pub operations: Vec<&'static str>,
    pub traces: Vec<Trace>,
    pub wall_time: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        root.insert("command".into(), Value::String(self.command.clone()));
        root.insert("inputs".into(), serde_json::to_value(&self.inputs).expect("digests serialize"));
        root.insert("payload".into(), self.payload.clone());
        root.insert(
            "operations".into(),
            Value::Array(self.operations.iter().map(|s| Value::String(s.to_string())).collect()),
        );
        let traces = self
            .traces
            .iter()
            .map(|t| {
                let pts = t
                    .points
                    .iter()
                    .map(|(n, v)| serde_json::json!({"n": n, "value": float(*v)}))
                    .collect();
                (t.name.clone(), Value::Array(pts))
            })
            .collect();
        root.insert("traces".into(), Value::Object(traces));
        let mut out = String::new();
        write_value(&mut out, &Value::Object(root), 0);
        // wall_time goes last, on its own line, so determinism checks can drop it
        out.truncate(out.len() - 3);
        writeln!(out, ",\n  \"wall_time\": {}\n}}", fmt_f64(self.wall_time)).unwrap();
        out
    }

    /// The trace named `name` (or the first trace) as `n,value` rows;
    /// without traces, the scalar payload entries as `key,value` rows.
    pub fn to_csv(&self, name: Option<&str>) -> Result<String, String> {
        let mut out = String::new();
        let trace = match name {
            Some(n) => Some(
                self.traces
                    .iter()
                    .find(|t| t.name == n)
                    .ok_or_else(|| format!("no trace named {n:?}; available: {}", self.trace_names().join(", ")))?,
            ),
            None => self.traces.first(),
        };
        if let Some(t) = trace {
            out.push_str("n,value\n");
            for (n, v) in &t.points {
                writeln!(out, "{n},{}", fmt_f64(*v)).unwrap();
            }
        } else {
            out.push_str("key,value\n");
            let mut rows = Vec::new();
            flatten("", &self.payload, &mut rows);
            for (k, v) in rows {
                writeln!(out, "{k},{v}").unwrap();
            }
        }
        Ok(out)
    }

    pub fn trace_names(&self) -> Vec<&str> {
        self.traces.iter().map(|t| t.name.as_str()).collect()
    }
}

/// A JSON float; non-finite values become `null`.
pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| float(*x)).collect())
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn fmt_scalar(v: &Value) -> String {
    match v {
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (None, Some(i)) => i.to_string(),
            _ => fmt_f64(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => serde_json::to_string(s).expect("string serializes"),
        other => other.to_string(),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(is_scalar) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&fmt_scalar(x));
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad);
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push_str(": ");
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        scalar => out.push_str(&fmt_scalar(scalar)),
    }
    if indent == 0 {
        out.push('\n');
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&key(k), x, rows);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), x, rows);
            }
        }
        scalar => {
            let mut s = fmt_scalar(scalar);
            if s.contains(',') {
                s = format!("\"{}\"", s.replace('"', "\"\""));
            }
            let mut k = prefix.to_string();
            if k.contains(',') {
                k = format!("\"{}\"", k.replace('"', "\"\""));
            }
            rows.push((k, s));
        }
    }
}
