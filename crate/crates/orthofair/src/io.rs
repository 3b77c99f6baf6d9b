//! File formats: dataset CSV + schema JSON, debiased CSV + sidecar,
//! predictions CSV, and JSON helpers.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use orthofair_core::tabular::encode_all;
use orthofair_core::{Column, ColumnData, ColumnRole, Dataset};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{csv_err, io_err, json_err, Error, Result};

/// Column name to role. Header columns absent from the schema are ignored.
pub type Schema = BTreeMap<String, ColumnRole>;

pub fn load_schema(path: impl AsRef<Path>) -> Result<Schema> {
    read_json(path)
}

/// Reads a CSV with a header row. Numeric columns are parsed as `f64`;
/// categorical columns stay symbolic. Column order follows the header.
///
/// Error rows are 1-based file lines, so the first data row is row 2.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(BufReader::new(file));
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_err(path))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let mut seen = HashSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(Error::DuplicateHeader {
                path: path.into(),
                column: h.clone(),
            });
        }
    }
    for name in schema.keys() {
        if !seen.contains(name.as_str()) {
            return Err(Error::MissingColumn {
                path: path.into(),
                column: name.clone(),
            });
        }
    }

    let picked: Vec<(usize, &String, ColumnRole)> = header
        .iter()
        .enumerate()
        .filter_map(|(i, h)| schema.get(h).map(|r| (i, h, *r)))
        .collect();
    let mut numeric: Vec<Vec<f64>> = vec![Vec::new(); picked.len()];
    let mut symbolic: Vec<Vec<String>> = vec![Vec::new(); picked.len()];

    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(true) => {}
            Ok(false) => break,
            Err(e) => return Err(csv_err(path)(e)),
        }
        let row = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                path: path.into(),
                row,
                expected: header.len(),
                got: record.len(),
            });
        }
        for (k, (i, name, role)) in picked.iter().enumerate() {
            let cell = record[*i].trim();
            if role.categorical {
                symbolic[k].push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::NotANumber {
                path: path.into(),
                row,
                column: (*name).clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteCell {
                    path: path.into(),
                    row,
                    column: (*name).clone(),
                    value: cell.to_string(),
                });
            }
            numeric[k].push(v);
        }
    }

    let columns = picked
        .into_iter()
        .zip(numeric.into_iter().zip(symbolic))
        .map(|((_, name, role), (num, sym))| {
            let data = if role.categorical {
                ColumnData::Categorical(sym)
            } else {
                ColumnData::Numeric(num)
            };
            Column {
                name: name.clone(),
                role,
                data,
            }
        })
        .collect();
    Ok(Dataset::new(columns)?)
}

/// [`load_csv`] followed by dummy encoding of every categorical column.
pub fn load_encoded(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    Ok(encode_all(&load_csv(path, schema)?)?)
}

/// Shortest representation that parses back to the same bits.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Writes named columns as CSV. Numeric values round-trip bit-exactly
/// through [`load_csv`].
pub fn write_columns(path: impl AsRef<Path>, names: &[String], columns: &[&ColumnData]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(names).map_err(csv_err(path))?;
    let n = columns.first().map_or(0, |c| c.len());
    let mut row: Vec<String> = Vec::with_capacity(columns.len());
    for i in 0..n {
        row.clear();
        for c in columns {
            row.push(match c {
                ColumnData::Numeric(v) => format_f64(v[i]),
                ColumnData::Categorical(v) => v[i].clone(),
            });
        }
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_dataset_csv(path: impl AsRef<Path>, d: &Dataset) -> Result<()> {
    let names: Vec<String> = d.names().map(str::to_string).collect();
    let data: Vec<&ColumnData> = d.columns().iter().map(|c| &c.data).collect();
    write_columns(path, &names, &data)
}

/// Schema describing `d` as it would be written by [`write_dataset_csv`].
pub fn schema_of(d: &Dataset) -> Schema {
    d.columns()
        .iter()
        .map(|c| {
            let categorical = matches!(c.data, ColumnData::Categorical(_));
            (c.name.clone(), ColumnRole { role: c.role.role, categorical })
        })
        .collect()
}

/// JSON sidecar written next to a debiased CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebiasSidecar {
    pub lambda: f64,
    pub n_rows: usize,
    pub n_features: usize,
    pub n_protected: usize,
    pub rank: usize,
    pub basis_columns: Vec<String>,
    /// Protected columns dropped as linearly dependent on earlier ones.
    pub dropped_columns: Vec<String>,
    /// Constant columns removed before centering.
    pub constant_columns: Vec<String>,
    /// Features lying entirely in the protected span (residual is zero).
    pub zero_residual_columns: Vec<String>,
    pub max_residual_correlation: f64,
    /// Mean over features of `corr(r'_j, x_j)`.
    pub mean_fidelity: f64,
    pub standardized: bool,
    pub suffix: String,
    pub wall_clock_ms: f64,
}

/// One external prediction: a dataset row and its real-valued score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub row_index: usize,
    pub yhat_real: f64,
}

/// Reads a `row_index,yhat_real` CSV. Indices must be unique.
pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for rec in reader.deserialize::<PredictionRow>() {
        let rec = rec.map_err(csv_err(path))?;
        if !rec.yhat_real.is_finite() {
            return Err(Error::Predictions {
                path: path.into(),
                message: format!("non-finite prediction for row {}", rec.row_index),
            });
        }
        if !seen.insert(rec.row_index) {
            return Err(Error::Predictions {
                path: path.into(),
                message: format!("row_index {} appears more than once", rec.row_index),
            });
        }
        rows.push(rec);
    }
    Ok(rows)
}

pub fn write_predictions(path: impl AsRef<Path>, rows: &[usize], yhat: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["row_index", "yhat_real"]).map_err(csv_err(path))?;
    for (i, v) in rows.iter().zip(yhat) {
        w.write_record([i.to_string(), format_f64(*v)]).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(BufReader::new(file)).map_err(json_err(path))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = serde_json::to_vec_pretty(value).map_err(json_err(path))?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(io_err(path))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(io_err(path))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let k = file.read(&mut buf).map_err(io_err(path))?;
        if k == 0 {
            break;
        }
        hasher.update(&buf[..k]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Hash of the canonical (compact) JSON form of `value`.
pub fn config_hash<T: Serialize + ?Sized>(value: &T) -> String {
    let json = serde_json::to_vec(value).unwrap_or_default();
    sha256_hex(&json)
}

pub fn create_dir(path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::create_dir_all(path).map_err(io_err(path))
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    let mut f = BufWriter::new(File::create(path).map_err(io_err(path))?);
    f.write_all(text.as_bytes()).map_err(io_err(path))?;
    f.flush().map_err(io_err(path))
}

/// `path` with `suffix` inserted before the extension: `a/b.csv` -> `a/b<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}
