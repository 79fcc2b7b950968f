//! Homogeneous tables and their CSV / JSON encodings.
//!
//! Every float is written with 12 significant digits in `%.12g` style, so
//! output bytes depend only on the values, never on locale or platform.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Number, Value as Json};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<i32> for Cell {
    fn from(n: i32) -> Self {
        Cell::Int(n.into())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Missing, Into::into)
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Float(x) => Some(x),
            Cell::Int(n) => Some(n as f64),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match *self {
            Cell::Int(n) => Some(n),
            _ => None,
        }
    }

    fn to_text(&self) -> String {
        match self {
            Cell::Float(x) => format_g12(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Cell::Float(x) => format_g12(*x)
                .parse::<f64>()
                .ok()
                .and_then(Number::from_f64)
                .map_or(Json::Null, Json::Number),
            Cell::Int(n) => Json::from(*n),
            Cell::Text(s) => Json::from(s.as_str()),
            Cell::Missing => Json::Null,
        }
    }
}

/// `x` rounded to 12 significant digits, `%.12g` layout: trailing zeros
/// dropped, scientific notation outside `1e-4 <= |x| < 1e12`.
pub fn format_g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_owned()
        } else {
            s.to_owned()
        }
    };
    if !(-4..DIGITS).contains(&exp) {
        let mut out = trim(mantissa);
        let _ = write!(out, "e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
        out
    } else {
        trim(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x))
    }
}

/// Rows sharing one column layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_text)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn to_json(&self) -> Vec<u8> {
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Json> =
                    self.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect();
                Json::Object(obj)
            })
            .collect();
        let mut out = serde_json::to_vec_pretty(&rows).expect("JSON encoding of plain values");
        out.push(b'\n');
        out
    }

    pub fn encode(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Parses CSV written by [`Table::to_csv`]. Fields that read as integers
    /// become [`Cell::Int`], other numbers [`Cell::Float`], empty fields
    /// [`Cell::Missing`], anything else text.
    pub fn from_csv(bytes: &[u8]) -> Result<Self, csv::Error> {
        let mut r = csv::ReaderBuilder::new().from_reader(bytes);
        let mut table = Table::new(r.headers()?.iter());
        for rec in r.records() {
            table.rows.push(rec?.iter().map(parse_field).collect());
        }
        Ok(table)
    }

    /// Parses JSON written by [`Table::to_json`].
    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        let rows: Vec<Map<String, Json>> = serde_json::from_slice(bytes)?;
        let columns: Vec<String> = rows.first().map(|r| r.keys().cloned().collect()).unwrap_or_default();
        let mut table = Table::new(columns.iter().cloned());
        for obj in rows {
            table.rows.push(
                columns
                    .iter()
                    .map(|c| match obj.get(c) {
                        Some(Json::Number(n)) => n.as_i64().map_or_else(|| Cell::Float(n.as_f64().unwrap_or(f64::NAN)), Cell::Int),
                        Some(Json::String(s)) => Cell::Text(s.clone()),
                        _ => Cell::Missing,
                    })
                    .collect(),
            );
        }
        Ok(table)
    }

    pub fn write_to(&self, path: &Path, format: Format) -> Result<(), CliError> {
        let bytes = self.encode(format);
        std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
    }

    pub fn write_stdout(&self, format: Format) -> Result<(), CliError> {
        let mut out = std::io::stdout().lock();
        out.write_all(&self.encode(format))
            .and_then(|_| out.flush())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e))
    }
}

fn parse_field(s: &str) -> Cell {
    if s.is_empty() {
        Cell::Missing
    } else if let Ok(n) = s.parse::<i64>() {
        Cell::Int(n)
    } else if let Ok(x) = s.parse::<f64>() {
        Cell::Float(x)
    } else {
        Cell::Text(s.to_owned())
    }
}
