//! Deterministic CSV tables for experiment reports.
//!
//! Floats are rendered with 17 significant digits in scientific notation
//! with a `.` decimal separator, independent of locale, so identical runs
//! produce byte-identical files.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// One CSV cell.
#[derive(Clone, Debug)]
pub enum Field {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Float(x)
    }
}

impl From<i64> for Field {
    fn from(x: i64) -> Self {
        Field::Int(x)
    }
}

impl From<usize> for Field {
    fn from(x: usize) -> Self {
        Field::Int(x as i64)
    }
}

impl From<bool> for Field {
    fn from(x: bool) -> Self {
        Field::Bool(x)
    }
}

impl From<&str> for Field {
    fn from(x: &str) -> Self {
        Field::Text(x.to_string())
    }
}

impl From<String> for Field {
    fn from(x: String) -> Self {
        Field::Text(x)
    }
}

/// Renders a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A small in-memory CSV table with a fixed header.
#[derive(Clone, Debug)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<Field>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for field in row {
                if !first {
                    out.push(',');
                }
                first = false;
                match field {
                    Field::Int(v) => {
                        let _ = write!(out, "{v}");
                    }
                    Field::Float(v) => out.push_str(&format_float(*v)),
                    Field::Text(v) => {
                        debug_assert!(
                            !v.contains(',') && !v.contains('"') && !v.contains('\n'),
                            "text fields must not need quoting"
                        );
                        out.push_str(v);
                    }
                    Field::Bool(v) => out.push_str(if *v { "true" } else { "false" }),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)
            .map_err(|e| Error::Serialization(format!("cannot create {path:?}: {e}")))?;
        file.write_all(self.render().as_bytes())
            .map_err(|e| Error::Serialization(format!("cannot write {path:?}: {e}")))
    }
}
