//! CSV reading and writing with a fixed, byte-stable number format.

use std::fs;
use std::path::Path;

use crate::error::{CliError, Result};

/// Twelve significant digits in lowercase scientific notation; `-0` prints as `0`.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// Rows of numbers or labels, written with a header and LF line endings.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<I, S>(header: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_bytes())
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Reads `(t - t0, f)` envelope samples from a two-column CSV. A header row
/// is skipped when its first field is not a number.
pub fn read_envelope_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut samples = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let field = |i: usize| record.get(i).map(str::parse::<f64>);
        match (field(0), field(1)) {
            (Some(Ok(t)), Some(Ok(f))) => samples.push((t, f)),
            (Some(Err(_)), _) if line == 0 => continue,
            _ => {
                return Err(CliError::Config(format!(
                    "{}: line {} must hold two numbers t,f",
                    path.display(),
                    line + 1
                )))
            }
        }
    }
    Ok(samples)
}
