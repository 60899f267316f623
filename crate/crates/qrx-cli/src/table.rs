//! Tabular output: CSV with 17 significant digits and a JSON mirror.

use crate::error::{CliError, CliResult};
use serde_json::{Map, Value};
use std::fs;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    /// CSV text; reals use 17 significant digits in scientific notation.
    pub fn to_csv(&self) -> String {
        match self {
            Cell::Real(x) if x.is_nan() => "NaN".into(),
            Cell::Real(x) if x.is_infinite() => if *x > 0.0 { "inf".into() } else { "-inf".into() },
            Cell::Real(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    /// JSON value; non-finite reals become strings matching the CSV text.
    pub fn to_json(&self) -> Value {
        match self {
            Cell::Real(x) => serde_json::Number::from_f64(*x).map(Value::Number).unwrap_or_else(|| Value::String(self.to_csv())),
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<u32> for Cell {
    fn from(n: u32) -> Self {
        Cell::Int(n.into())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Rows under a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn csv_bytes(&self) -> Vec<u8> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::to_csv)).expect("in-memory write");
        }
        writer.into_inner().expect("in-memory flush")
    }

    /// `{"columns": [...], "rows": [{column: value, ...}, ...]}`.
    pub fn json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let object: Map<String, Value> = self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.to_json())).collect();
                Value::Object(object)
            })
            .collect();
        serde_json::json!({ "columns": self.columns, "rows": Value::Array(rows) })
    }

    pub fn json_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(&self.json()).expect("JSON values serialize");
        bytes.push(b'\n');
        bytes
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Where a table goes: CSV to a file or stdout, plus an optional JSON mirror.
#[derive(Debug, Clone, Default)]
pub struct Sink<'a> {
    pub csv: Option<&'a Path>,
    pub json: Option<&'a Path>,
}

impl Sink<'_> {
    pub fn emit(&self, table: &Table) -> CliResult<()> {
        let csv = table.csv_bytes();
        match self.csv {
            Some(path) => write_file(path, &csv)?,
            None => std::io::stdout().lock().write_all(&csv).map_err(|e| CliError::io("<stdout>", e))?,
        }
        if let Some(path) = self.json {
            write_file(path, &table.json_bytes())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip_through_csv_text() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, -7.25e12, 0.0, f64::MIN_POSITIVE] {
            let text = Cell::Real(x).to_csv();
            assert_eq!(text.parse::<f64>().unwrap(), x, "{text}");
            let mantissa = text.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
        assert_eq!(Cell::Real(f64::INFINITY).to_csv(), "inf");
        assert_eq!(Cell::Real(f64::NAN).to_json(), Value::String("NaN".into()));
    }

    #[test]
    fn csv_has_header_and_quotes_when_needed() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.5.into(), "x,y".into()]);
        t.push(vec![Cell::Empty, true.into()]);
        let text = String::from_utf8(t.csv_bytes()).unwrap();
        assert_eq!(text, "a,b\n1.5000000000000000e0,\"x,y\"\n,true\n");
        let json = t.json();
        assert_eq!(json["rows"][0]["a"], Value::from(1.5));
        assert_eq!(json["rows"][1]["a"], Value::Null);
    }
}
