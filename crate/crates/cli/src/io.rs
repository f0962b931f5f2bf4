//! CSV ingestion and output.
//!
//! Input files are comma separated with a header row; lines starting with
//! `#` are skipped. Each row is one sample. Every output file starts with a
//! `# schema=1` line so it reads back through the same parser.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clda::Dataset;
use ndarray::Array2;

use crate::error::CliError;

pub const SCHEMA_LINE: &str = "# schema=1";

/// Raw string table with its header.
#[derive(Debug, Clone)]
pub struct Table {
    pub path: PathBuf,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| CliError::parse(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::parse(path, e))?;
        rows.push(record.iter().map(str::to_owned).collect());
    }
    Ok(Table {
        path: path.to_owned(),
        headers,
        rows,
    })
}

impl Table {
    /// Resolves a column given by header name or 0-based index.
    pub fn column_index(&self, spec: &str) -> Result<usize, CliError> {
        if let Some(i) = self.headers.iter().position(|h| h == spec) {
            return Ok(i);
        }
        match spec.parse::<usize>() {
            Ok(i) if i < self.headers.len() => Ok(i),
            _ => Err(CliError::Parse(format!(
                "{}: no column named or numbered '{spec}'",
                self.path.display()
            ))),
        }
    }

    fn parse_cell(&self, row: usize, col: usize) -> Result<f64, CliError> {
        let cell = &self.rows[row][col];
        cell.parse::<f64>().map_err(|_| {
            CliError::Parse(format!(
                "{}: data row {}, column '{}': '{cell}' is not a number",
                self.path.display(),
                row + 1,
                self.headers[col]
            ))
        })
    }

    /// Samples as columns of an `n x N` matrix, skipping `skip`.
    pub fn numeric_columns(&self, skip: Option<usize>) -> Result<(Array2<f64>, Vec<usize>), CliError> {
        let cols: Vec<usize> = (0..self.headers.len()).filter(|&c| Some(c) != skip).collect();
        if cols.is_empty() || self.rows.is_empty() {
            return Err(CliError::Parse(format!(
                "{}: no numeric data",
                self.path.display()
            )));
        }
        let mut x = Array2::zeros((cols.len(), self.rows.len()));
        for j in 0..self.rows.len() {
            for (i, &c) in cols.iter().enumerate() {
                x[[i, j]] = self.parse_cell(j, c)?;
            }
        }
        Ok((x, cols))
    }

    /// Dataset with the label column removed; defaults to the last column.
    pub fn to_dataset(&self, label_col: Option<&str>) -> Result<(Dataset, usize), CliError> {
        let label = match label_col {
            Some(spec) => self.column_index(spec)?,
            None if !self.headers.is_empty() => self.headers.len() - 1,
            None => {
                return Err(CliError::Parse(format!("{}: empty header", self.path.display())))
            }
        };
        let (x, _) = self.numeric_columns(Some(label))?;
        let labels: Vec<&str> = self.rows.iter().map(|r| r[label].as_str()).collect();
        Ok((Dataset::new(x, &labels)?, label))
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) || field.starts_with('#') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_owned()
    }
}

/// Buffered writer that reports failures against its path.
pub struct CsvOut {
    path: PathBuf,
    inner: BufWriter<File>,
}

impl CsvOut {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut out = Self {
            path: path.to_owned(),
            inner: BufWriter::new(file),
        };
        out.line(SCHEMA_LINE)?;
        Ok(out)
    }

    pub fn line(&mut self, text: &str) -> Result<(), CliError> {
        writeln!(self.inner, "{text}").map_err(|e| CliError::io(&self.path, e))
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let joined: Vec<String> = fields.into_iter().map(|s| quote(s.as_ref())).collect();
        self.line(&joined.join(","))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.inner.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

/// Writes an `n x d` matrix with headers `w1..wd`, one feature per row.
pub fn write_matrix(path: &Path, m: &Array2<f64>, prefix: &str) -> Result<(), CliError> {
    let mut out = CsvOut::create(path)?;
    out.row((1..=m.ncols()).map(|k| format!("{prefix}{k}")))?;
    for row in m.rows() {
        out.row(row.iter().map(|v| v.to_string()))?;
    }
    out.finish()
}
