//! CSV tables and output files.

use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner()
            .map_err(|e| CliError::io("<csv buffer>", e.into_error()))
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Table> {
        let mut r = csv::ReaderBuilder::new().from_reader(bytes);
        let header = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(str::to_string).collect());
        }
        Ok(Table { header, rows })
    }

    /// Numeric view of one column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }
}

/// A named output produced by a command, written into the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl OutputFile {
    pub fn csv(name: impl Into<String>, table: &Table) -> Result<Self> {
        Ok(OutputFile {
            name: name.into(),
            bytes: table.to_csv()?,
        })
    }

    pub fn text(name: impl Into<String>, text: String) -> Self {
        OutputFile {
            name: name.into(),
            bytes: text.into_bytes(),
        }
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut out = Vec::new();
    for f in files {
        let path = dir.join(&f.name);
        write_file(&path, &f.bytes)?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["name", "value"]);
        assert_eq!(t.to_csv().unwrap(), b"name,value\r\n");
    }

    #[test]
    fn values_round_trip_bitwise() {
        let xs = [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            f64::MAX,
            0.0,
            -0.0,
        ];
        let mut t = Table::new(&["x"]);
        for x in xs {
            t.push(vec![num(x)]);
        }
        let back = Table::from_csv(&t.to_csv().unwrap()).unwrap();
        let col = back.column("x").unwrap();
        for (a, b) in xs.iter().zip(&col) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn fields_are_quoted_when_needed() {
        let mut t = Table::new(&["detail"]);
        t.push(vec!["a, \"b\"".into()]);
        let bytes = t.to_csv().unwrap();
        assert_eq!(bytes, b"detail\r\n\"a, \"\"b\"\"\"\r\n");
        assert_eq!(Table::from_csv(&bytes).unwrap(), t);
    }

    #[test]
    fn decimal_point_is_a_dot() {
        assert_eq!(num(1.5), "1.5000000000000000e0");
    }
}
