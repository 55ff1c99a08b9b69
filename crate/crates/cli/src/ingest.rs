//! CSV input: numeric tables for fitting and rational matrices for `rref`.

use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use qnpr_core::linreg::Dataset;
use qnpr_core::qgje::{parse_rational, Matrix};

use crate::error::{CliError, Result};

/// Response column, by header name or zero-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl FromStr for ColumnRef {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.trim().parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.trim().to_string()),
        })
    }
}

impl std::fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnRef::Name(name) => f.write_str(name),
            ColumnRef::Index(i) => write!(f, "{i}"),
        }
    }
}

/// Predictors (all non-response columns in header order) and the response.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub predictor_names: Vec<String>,
    pub response_name: String,
    /// One row per observation.
    pub predictors: Vec<Vec<f64>>,
    pub response: Vec<f64>,
}

impl Table {
    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn p(&self) -> usize {
        self.predictor_names.len()
    }

    pub fn predictor(&self, j: usize) -> Vec<f64> {
        self.predictors.iter().map(|row| row[j]).collect()
    }

    pub fn to_dataset(&self, intercept: bool) -> Result<Dataset> {
        let data = Dataset::new(&self.predictors, self.response.clone())?;
        Ok(if intercept {
            data.with_intercept()
        } else {
            data
        })
    }
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn headers(reader: &mut csv::Reader<File>, path: &Path) -> Result<Vec<String>> {
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let names: Vec<String> = headers.iter().map(str::to_string).collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(CliError::Data(format!(
            "{}: missing header row",
            path.display()
        )));
    }
    Ok(names)
}

/// Visits every data cell. Rows are numbered from 1 for the first data row.
fn for_each_record(
    reader: &mut csv::Reader<File>,
    path: &Path,
    width: usize,
    mut visit: impl FnMut(usize, &csv::StringRecord) -> Result<()>,
) -> Result<usize> {
    let mut count = 0;
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            row,
            column: "-".into(),
            message: e.to_string(),
        })?;
        if record.len() != width {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                row,
                column: "-".into(),
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        visit(row, &record)?;
        count += 1;
    }
    Ok(count)
}

fn parse_cell(path: &Path, row: usize, column: &str, cell: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Parse {
            path: path.to_path_buf(),
            row,
            column: column.to_string(),
            message: format!("not a finite number: {cell:?}"),
        }),
    }
}

pub fn ingest_csv(path: &Path, y_column: &ColumnRef) -> Result<Table> {
    let mut reader = open(path)?;
    let names = headers(&mut reader, path)?;
    let y_idx = match y_column {
        ColumnRef::Name(name) => names.iter().position(|h| h == name),
        ColumnRef::Index(i) => (*i < names.len()).then_some(*i),
    }
    .ok_or_else(|| {
        CliError::Usage(format!(
            "response column {y_column} not found in {} (columns: {})",
            path.display(),
            names.join(",")
        ))
    })?;

    let mut predictors = Vec::new();
    let mut response = Vec::new();
    let n_rows = for_each_record(&mut reader, path, names.len(), |row, record| {
        let mut xs = Vec::with_capacity(names.len() - 1);
        for (j, cell) in record.iter().enumerate() {
            let v = parse_cell(path, row, &names[j], cell)?;
            if j == y_idx {
                response.push(v);
            } else {
                xs.push(v);
            }
        }
        predictors.push(xs);
        Ok(())
    })?;
    if n_rows == 0 {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }

    let mut predictor_names = names.clone();
    let response_name = predictor_names.remove(y_idx);
    Ok(Table {
        predictor_names,
        response_name,
        predictors,
        response,
    })
}

/// Reads a matrix of integers, fractions (`a/b`) or decimals. The header row
/// only fixes the column count.
pub fn read_matrix_csv(path: &Path) -> Result<Matrix> {
    let mut reader = open(path)?;
    let names = headers(&mut reader, path)?;
    let mut rows = Vec::new();
    for_each_record(&mut reader, path, names.len(), |row, record| {
        let parsed = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                parse_rational(cell).map_err(|e| CliError::Parse {
                    path: path.to_path_buf(),
                    row,
                    column: names[j].clone(),
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(parsed);
        Ok(())
    })?;
    if rows.is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    Ok(Matrix::from_rows(rows)?)
}
