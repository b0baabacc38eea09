use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDocument<P> {
    pub schema_version: String,
    pub command: String,
    pub payload: P,
}

impl<P> OutputDocument<P> {
    pub fn new(command: &str, payload: P) -> Self {
        OutputDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            payload,
        }
    }
}

/// A payload that can also be written as one CSV row per array element.
pub trait Tabular {
    type Row: Serialize;
    fn rows(&self) -> Vec<Self::Row>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Rounds a float to six significant digits.
pub fn round6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

pub fn round_floats(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round6).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn emit<P, W>(out: &mut W, command: &str, payload: &P, format: Format, full_precision: bool) -> Result<(), CliError>
where
    P: Serialize + Tabular,
    W: Write,
{
    match format {
        Format::Json => {
            let mut value = serde_json::to_value(OutputDocument::new(command, payload))?;
            if !full_precision {
                round_floats(&mut value);
            }
            serde_json::to_writer_pretty(&mut *out, &value)?;
            writeln!(out)?;
        }
        Format::Csv => write_csv(out, &payload.rows(), full_precision)?,
    }
    Ok(())
}

fn write_csv<R: Serialize, W: Write>(out: &mut W, rows: &[R], full_precision: bool) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(out);
    for (i, row) in rows.iter().enumerate() {
        let mut value = serde_json::to_value(row)?;
        if !full_precision {
            round_floats(&mut value);
        }
        let Value::Object(map) = value else {
            return Err(CliError::Runtime("csv rows must be objects".into()));
        };
        if i == 0 {
            writer.write_record(map.keys())?;
        }
        writer.write_record(map.values().map(cell))?;
    }
    writer.flush()?;
    Ok(())
}

fn cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}
