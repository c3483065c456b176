//! Tabular output as CSV or JSON.
//!
//! Numbers use the shortest representation that parses back to the same
//! `f64`; magnitudes at or above `1e6` or below `1e-4` are written in
//! scientific notation. Non-numeric cells are `diverges` or `ERR:<code>`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::sweep::{Cell, SweepRow, COLUMNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Number(f64),
    Text(String),
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Number(v)
    }
}

impl From<Cell> for Field {
    fn from(c: Cell) -> Self {
        match c {
            Cell::Value(v) => Field::Number(v),
            Cell::Diverges => Field::Text("diverges".into()),
            Cell::Error(code) => Field::Text(format!("ERR:{code}")),
        }
    }
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Number(v) => format_number(*v),
            Field::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Number(v) => serde_json::Number::from_f64(*v)
                .map(Value::Number)
                .unwrap_or_else(|| Value::String(format_number(*v))),
            Field::Text(s) => Value::String(s.clone()),
        }
    }
}

/// Shortest round-trip decimal form of `v`.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Keeps the underlying I/O error so callers can still see its kind.
fn csv_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

/// Named columns and rows of fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    /// A one-row table from `(name, value)` pairs.
    pub fn record<S: Into<String>>(pairs: impl IntoIterator<Item = (S, Field)>) -> Self {
        let (header, row): (Vec<String>, Vec<Field>) =
            pairs.into_iter().map(|(k, v)| (k.into(), v)).unzip();
        Table {
            header,
            rows: vec![row],
        }
    }

    pub fn from_sweep(rows: &[SweepRow]) -> Self {
        let mut t = Table::new(COLUMNS);
        for r in rows {
            let mut fields = vec![Field::Number(r.x)];
            fields.extend(r.cells().into_iter().map(Field::from));
            t.push(fields);
        }
        t
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .quote_style(csv::QuoteStyle::Never)
            .from_writer(out);
        w.write_record(&self.header).map_err(csv_io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Field::render)).map_err(csv_io)?;
        }
        w.flush()
    }

    /// Array of row objects keyed by column name.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Field::json))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        out.write_all(b"\n")
    }

    pub fn write<W: Write>(&self, format: OutputFormat, out: W) -> io::Result<()> {
        match format {
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => self.write_json(out),
        }
    }
}
