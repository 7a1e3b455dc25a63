//! Rendering of command results as JSON, CSV or plain text.

use std::io::{self, Write};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

/// A command result in all three renderings, plus whether its check passed.
pub struct Output {
    pub json: Value,
    pub csv: Vec<Vec<String>>,
    pub plain: String,
    pub ok: bool,
}

impl Output {
    pub fn new<T: Serialize>(value: &T, plain: impl Into<String>) -> Self {
        let json = serde_json::to_value(value).expect("serializable");
        let csv = flatten(&json);
        Self {
            json,
            csv,
            plain: plain.into(),
            ok: true,
        }
    }

    pub fn with_csv(mut self, rows: Vec<Vec<String>>) -> Self {
        self.csv = rows;
        self
    }

    pub fn check(mut self, ok: bool) -> Self {
        self.ok = ok;
        self
    }

    pub fn write(&self, format: Format, out: &mut impl Write) -> io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.json)?;
                writeln!(out)
            }
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
                for row in &self.csv {
                    w.write_record(row)?;
                }
                w.flush()
            }
            Format::Plain => writeln!(out, "{}", self.plain),
        }
    }
}

/// Two-column key,value rows for a JSON object; nested values are inlined
/// as compact JSON.
fn flatten(v: &Value) -> Vec<Vec<String>> {
    let mut rows = vec![vec!["key".to_string(), "value".to_string()]];
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                rows.push(vec![k.clone(), scalar(x)]);
            }
        }
        other => rows.push(vec!["value".into(), scalar(other)]),
    }
    rows
}

pub fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Header plus one row per item.
pub fn table<I, R>(header: &[&str], rows: I) -> Vec<Vec<String>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    std::iter::once(header.iter().map(|s| s.to_string()).collect())
        .chain(rows.into_iter().map(|r| r.into_iter().collect()))
        .collect()
}

pub fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}
