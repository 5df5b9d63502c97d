//! Matrix CSV files: a header row, then one row per record. An optional
//! leading text column names the rows.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back reproduces the matrix exactly.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ndarray::{Array2, ArrayView2};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    /// Header of the leading label column, when present.
    pub label_column: Option<String>,
    pub row_labels: Vec<String>,
    pub columns: Vec<String>,
    pub values: Array2<f64>,
}

pub fn write_matrix_csv(
    path: &Path,
    label_column: Option<(&str, &[String])>,
    columns: &[String],
    values: ArrayView2<f64>,
) -> Result<()> {
    if columns.len() != values.ncols() {
        bail!(
            "{} column names for {} columns",
            columns.len(),
            values.ncols()
        );
    }
    if let Some((_, labels)) = label_column {
        if labels.len() != values.nrows() {
            bail!("{} row labels for {} rows", labels.len(), values.nrows());
        }
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header: Vec<&str> = Vec::with_capacity(columns.len() + 1);
    if let Some((name, _)) = label_column {
        header.push(name);
    }
    header.extend(columns.iter().map(String::as_str));
    w.write_record(&header)?;
    for (i, row) in values.rows().into_iter().enumerate() {
        let mut record: Vec<String> = Vec::with_capacity(row.len() + 1);
        if let Some((_, labels)) = label_column {
            record.push(labels[i].clone());
        }
        record.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a matrix CSV; `label_column` says whether the first column holds
/// row names.
pub fn read_matrix_csv(path: &Path, label_column: bool) -> Result<LabeledMatrix> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = csv::Reader::from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let skip = usize::from(label_column);
    if header.len() <= skip {
        bail!("{}:1: no value columns", path.display());
    }
    let mut row_labels = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| anyhow!("{}: {e}", path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        if label_column {
            row_labels.push(record[0].to_string());
        }
        for (c, field) in record.iter().enumerate().skip(skip) {
            values.push(field.parse::<f64>().map_err(|_| {
                anyhow!(
                    "{}:{line}: column `{}` is not a number: `{field}`",
                    path.display(),
                    header[c]
                )
            })?);
        }
    }
    let ncols = header.len() - skip;
    let nrows = values.len() / ncols;
    Ok(LabeledMatrix {
        label_column: label_column.then(|| header[0].clone()),
        row_labels,
        columns: header[skip..].to_vec(),
        values: Array2::from_shape_vec((nrows, ncols), values).expect("csv rows are rectangular"),
    })
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}
