//! String-valued result tables and their CSV form.
//!
//! Rows are stored as the exact strings written to disk, so anything
//! computed from a [`Table`] gives the same answer after a CSV round trip.

use std::path::Path;

use crate::error::{HarnessError, Result};

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| (*c).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn index(&self, column: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == column)
            .ok_or_else(|| HarnessError::Table(format!("no column `{column}`")))
    }

    pub fn strings(&self, column: &str) -> Result<Vec<&str>> {
        let i = self.index(column)?;
        Ok(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    /// Parses a column; empty cells are skipped.
    pub fn numbers(&self, column: &str) -> Result<Vec<f64>> {
        self.strings(column)?
            .into_iter()
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| HarnessError::Table(format!("`{s}` in `{column}` is not a number")))
            })
            .collect()
    }

    /// Rows where `column == value`.
    pub fn filter(&self, column: &str, value: &str) -> Result<Table> {
        let i = self.index(column)?;
        Ok(Table {
            columns: self.columns.clone(),
            rows: self.rows.iter().filter(|r| r[i] == value).cloned().collect(),
        })
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner()
            .map_err(|e| HarnessError::Table(format!("flushing csv: {e}")))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let bytes = self.to_csv_bytes()?;
        std::fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Table> {
        let mut r = csv::Reader::from_path(path)?;
        let columns = r.headers()?.iter().map(str::to_owned).collect();
        let rows = r
            .records()
            .map(|rec| Ok(rec?.iter().map(str::to_owned).collect()))
            .collect::<Result<_>>()?;
        Ok(Table { columns, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 6.02e23, -0.0, 73.0, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(fmt_opt(None), "");
    }

    #[test]
    fn numbers_and_filter() {
        let mut t = Table::new(&["k", "v"]);
        t.push(vec!["a".into(), "1.5".into()]);
        t.push(vec!["b".into(), "".into()]);
        t.push(vec!["a".into(), "2".into()]);
        assert_eq!(t.numbers("v").unwrap(), vec![1.5, 2.0]);
        assert_eq!(t.filter("k", "a").unwrap().len(), 2);
        assert!(t.index("missing").is_err());
    }
}
