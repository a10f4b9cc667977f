//! Versioned report records.
//!
//! Every record is a flat JSON object carrying `schema_version`, a `record`
//! name, and the record's own fields. The CSV form is a header row of dotted
//! keys and a single value row; arrays of scalars are joined with `;`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{MomentError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// A payload that can be emitted as a report.
pub trait Record: Serialize + DeserializeOwned {
    const NAME: &'static str;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub record: String,
    #[serde(flatten)]
    pub data: T,
}

impl<T: Record> Envelope<T> {
    pub fn new(data: T) -> Self {
        Envelope {
            schema_version: SCHEMA_VERSION,
            record: T::NAME.to_string(),
            data,
        }
    }
}

pub fn to_json<T: Record>(data: &T) -> Result<String> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        record: T::NAME.to_string(),
        data,
    };
    serde_json::to_string_pretty(&env)
        .map_err(|e| MomentError::Configuration(format!("serialize report: {e}")))
}

/// Parses a JSON report, checking the schema version and record name.
pub fn from_json<T: Record>(text: &str) -> Result<T> {
    let env: Envelope<T> = serde_json::from_str(text)
        .map_err(|e| MomentError::Configuration(format!("parse report: {e}")))?;
    if env.schema_version != SCHEMA_VERSION {
        return Err(MomentError::Configuration(format!(
            "report schema {} is not supported (expected {SCHEMA_VERSION})",
            env.schema_version
        )));
    }
    if env.record != T::NAME {
        return Err(MomentError::Configuration(format!(
            "expected a '{}' record, found '{}'",
            T::NAME,
            env.record
        )));
    }
    Ok(env.data)
}

/// Dotted-key view of a JSON value, in key order.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten_into("", value, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn join_key(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn flatten_into(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten_into(&join_key(prefix, k), v, out);
            }
        }
        Value::Array(items) => {
            if let Some(parts) = items.iter().map(scalar).collect::<Option<Vec<_>>>() {
                out.push((prefix.to_string(), parts.join(";")));
            } else {
                for (i, v) in items.iter().enumerate() {
                    flatten_into(&join_key(prefix, &i.to_string()), v, out);
                }
            }
        }
        other => out.push((prefix.to_string(), scalar(other).unwrap_or_default())),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_csv<T: Record>(data: &T) -> Result<String> {
    let value = serde_json::to_value(Envelope {
        schema_version: SCHEMA_VERSION,
        record: T::NAME.to_string(),
        data,
    })
    .map_err(|e| MomentError::Configuration(format!("serialize report: {e}")))?;
    let flat = flatten(&value);
    let header: Vec<String> = flat.iter().map(|(k, _)| csv_field(k)).collect();
    let row: Vec<String> = flat.iter().map(|(_, v)| csv_field(v)).collect();
    Ok(format!("{}\n{}\n", header.join(","), row.join(",")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

pub fn render<T: Record>(data: &T, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(data).map(|mut s| {
            s.push('\n');
            s
        }),
        Format::Csv => to_csv(data),
    }
}

impl Record for crate::estimators::MomentEstimate {
    const NAME: &'static str = "moment-estimate";
}

impl Record for crate::distributions::CongruenceVerdict {
    const NAME: &'static str = "congruence";
}
