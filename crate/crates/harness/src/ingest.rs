//! Regression data from CSV files with a header row.

use std::path::Path;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    /// One row of `X` values per observation.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

pub fn read_regression_csv(path: &Path, x_columns: &[String], y_column: &str) -> Result<RegressionData> {
    let mut rdr = csv::Reader::from_path(path)?;
    parse(&mut rdr, x_columns, y_column)
}

pub fn parse_regression_csv(text: &str, x_columns: &[String], y_column: &str) -> Result<RegressionData> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    parse(&mut rdr, x_columns, y_column)
}

fn parse<R: std::io::Read>(rdr: &mut csv::Reader<R>, x_columns: &[String], y_column: &str) -> Result<RegressionData> {
    if x_columns.is_empty() {
        return Err(HarnessError::Model("no X columns selected".into()));
    }
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| HarnessError::Model(format!("column {name:?} not found")))
    };
    let xi: Vec<usize> = x_columns.iter().map(|c| find(c)).collect::<Result<_>>()?;
    let yi = find(y_column)?;
    let mut data = RegressionData { x: Vec::new(), y: Vec::new() };
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let cell = |k: usize| -> Result<f64> {
            let raw = rec.get(k).unwrap_or("").trim();
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| HarnessError::Model(format!("row {}: bad number {raw:?}", line + 1)))
        };
        data.x.push(xi.iter().map(|&k| cell(k)).collect::<Result<_>>()?);
        data.y.push(cell(yi)?);
    }
    if data.y.is_empty() {
        return Err(HarnessError::Model("regression file has no observations".into()));
    }
    Ok(data)
}
