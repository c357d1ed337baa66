//! Versioned CSV and JSON output.
//!
//! Both formats carry `schema = 1`, the command and an echo of the process
//! parameters. Every number is written with 17 significant digits so the
//! files round-trip exactly.

use std::io::Write;

use mcpdist_core::McpParams;
use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::AppResult;

/// Version of the column layout.
pub const SCHEMA: u32 = 1;

/// One cell of a table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// A number, written with 17 significant digits.
    Num(f64),
    /// A bare token without commas or quotes.
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "pass" } else { "fail" }.to_string())
    }
}

/// Formats a number so that parsing it back gives the same `f64`.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Rows of named columns plus run metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    command: String,
    params: Option<McpParams>,
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    /// An empty table for `command` with the given column names.
    pub fn new(command: &str, params: Option<McpParams>, columns: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            params,
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    /// Adds a `key=value` metadata entry.
    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.to_string(), value.into()));
    }

    /// Appends a row; it must have one cell per column.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    /// Column names.
    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    /// Rows in insertion order.
    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// Metadata entries in insertion order.
    pub fn metadata(&self) -> &[(String, String)] {
        &self.meta
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.rows
            .iter()
            .map(|row| match &row[i] {
                Cell::Num(v) => Some(*v),
                Cell::Text(_) => None,
            })
            .collect()
    }

    /// Writes `# key=value` header lines, the column names and the rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> AppResult<()> {
        writeln!(w, "# schema={SCHEMA}")?;
        writeln!(w, "# command={}", self.command)?;
        if let Some(p) = &self.params {
            writeln!(
                w,
                "# params dim={} lambda_p={} lambda_d={} mean_points={} rd={}",
                p.n(),
                format_number(p.lambda_p()),
                format_number(p.lambda_d()),
                format_number(p.m()),
                format_number(p.r_d())
            )?;
        }
        for (k, v) in &self.meta {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format_number(*v),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    /// Writes a single JSON object mirroring the CSV layout.
    pub fn write_json<W: Write>(&self, mut w: W) -> AppResult<()> {
        #[derive(Serialize)]
        struct Params {
            dim: u32,
            lambda_p: Box<RawValue>,
            lambda_d: Box<RawValue>,
            mean_points: Box<RawValue>,
            rd: Box<RawValue>,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            schema: u32,
            command: &'a str,
            params: Option<Params>,
            meta: serde_json::Map<String, serde_json::Value>,
            columns: &'a [String],
            rows: Vec<Vec<Box<RawValue>>>,
        }
        let raw = |v: f64| -> Box<RawValue> {
            let s = if v.is_finite() {
                format_number(v)
            } else {
                "null".to_string()
            };
            RawValue::from_string(s).expect("formatted number is valid JSON")
        };
        let params = self.params.map(|p| Params {
            dim: p.n(),
            lambda_p: raw(p.lambda_p()),
            lambda_d: raw(p.lambda_d()),
            mean_points: raw(p.m()),
            rd: raw(p.r_d()),
        });
        let meta = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| match c {
                        Cell::Num(v) => raw(*v),
                        Cell::Text(s) => RawValue::from_string(
                            serde_json::to_string(s).expect("string serializes"),
                        )
                        .expect("serialized string is valid JSON"),
                    })
                    .collect()
            })
            .collect();
        let doc = Doc {
            schema: SCHEMA,
            command: &self.command,
            params,
            meta,
            columns: &self.columns,
            rows,
        };
        serde_json::to_writer(&mut w, &doc).map_err(std::io::Error::from)?;
        writeln!(w)?;
        Ok(())
    }
}

/// Reads the numeric columns of a CSV written by [`Table::write_csv`].
pub fn read_csv_columns(text: &str) -> AppResult<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| crate::AppError::Parameter("empty CSV".into()))?;
    let columns: Vec<String> = header.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for line in lines {
        let row = line
            .split(',')
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| crate::AppError::Parameter(format!("bad number {s:?}: {e}")))
            })
            .collect::<AppResult<Vec<f64>>>()?;
        if row.len() != columns.len() {
            return Err(crate::AppError::Parameter("ragged CSV row".into()));
        }
        rows.push(row);
    }
    Ok((columns, rows))
}
