//! CSV and JSON writers. Floats use 17 significant digits.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `header` and `rows` (one value per column) to `dir/name`.
pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut writer = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    writer.write_record(header).map_err(|e| csv_error(&path, e))?;
    for row in rows {
        writer
            .write_record(row.into_iter().map(float))
            .map_err(|e| csv_error(&path, e))?;
    }
    writer.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input {
        path: path.clone(),
        message: e.to_string(),
    })?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Input {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

/// Reads a `t,g` table. Extra columns are rejected.
pub fn read_flux_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let input = |message: String| CliError::Input {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "g"] {
        return Err(input(format!(
            "expected header `t,g`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let (mut ts, mut gs) = (Vec::new(), Vec::new());
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = row + 2;
        let parse = |i: usize| -> Result<f64, CliError> {
            let field = record.get(i).unwrap_or("");
            field
                .parse::<f64>()
                .map_err(|_| input(format!("line {line}: `{field}` is not a number")))
        };
        ts.push(parse(0)?);
        gs.push(parse(1)?);
    }
    Ok((ts, gs))
}

/// `t` formatted for file names: shortest decimal, no exponent.
pub fn time_label(t: f64) -> String {
    let s = format!("{t:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() {
        "0".to_string()
    } else {
        s.to_string()
    }
}
