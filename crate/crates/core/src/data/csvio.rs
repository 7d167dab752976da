use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::forest::Instance;

use super::schema::DatasetSchema;
use super::DataError;

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedStream {
    pub instances: Vec<Instance>,
    /// Rows skipped for a missing feature or label value.
    pub dropped: usize,
}

pub fn load_csv(path: &Path, schema: &DatasetSchema) -> Result<LoadedStream, DataError> {
    read_csv(std::fs::File::open(path)?, schema)
}

/// Stream rows of a headed CSV in file order. Row numbers in errors count
/// data rows from 1.
pub fn read_csv<R: Read>(reader: R, schema: &DatasetSchema) -> Result<LoadedStream, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| DataError::Csv { row: 0, message: e.to_string() })?
        .clone();
    let ignored: HashSet<&str> = schema.ignored_columns.iter().map(String::as_str).collect();
    if !schema.allow_extra_columns {
        for h in header.iter() {
            if h != schema.label && !schema.features.iter().any(|f| f == h) && !ignored.contains(h) {
                return Err(DataError::UnknownColumn(h.to_string()));
            }
        }
    }
    let position = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let feature_cols = schema
        .features
        .iter()
        .map(|f| position(f))
        .collect::<Result<Vec<_>, _>>()?;
    let label_col = position(&schema.label)?;
    let is_missing = |cell: &str| cell.trim().is_empty() || schema.missing_tokens.iter().any(|t| t == cell.trim());

    let mut instances = Vec::new();
    let mut dropped = 0;
    for (i, record) in rdr.records().enumerate() {
        let row = i as u64 + 1;
        let record = record.map_err(|e| DataError::Csv { row, message: e.to_string() })?;
        let label_cell = record.get(label_col).unwrap_or("");
        if is_missing(label_cell) {
            dropped += 1;
            continue;
        }
        let mut missing = false;
        let mut pairs = Vec::with_capacity(feature_cols.len());
        for (name, &c) in schema.features.iter().zip(&feature_cols) {
            let cell = record.get(c).unwrap_or("");
            if is_missing(cell) {
                missing = true;
                break;
            }
            let v: f64 = cell.trim().parse().map_err(|_| DataError::Parse {
                row,
                column: name.clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::Parse {
                    row,
                    column: name.clone(),
                    value: cell.to_string(),
                });
            }
            pairs.push((name.clone(), v));
        }
        if missing {
            dropped += 1;
            continue;
        }
        let label = *schema
            .label_map
            .get(label_cell.trim())
            .ok_or_else(|| DataError::UnknownLabel {
                row,
                value: label_cell.to_string(),
            })?;
        instances.push(Instance {
            features: pairs.into_iter().collect(),
            label,
        });
    }
    Ok(LoadedStream { instances, dropped })
}

/// Write instances with the schema's feature columns and label. Values use
/// the shortest representation that parses back to the same double.
pub fn write_csv<W: Write>(writer: W, schema: &DatasetSchema, instances: &[Instance]) -> Result<(), DataError> {
    let label_name = |class: u8| {
        schema
            .label_map
            .iter()
            .find(|(_, v)| **v == class)
            .map(|(k, _)| k.clone())
            .ok_or_else(|| DataError::Schema(format!("no label value maps to class {class}")))
    };
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| DataError::Csv { row: 0, message: e.to_string() };
    let mut header = schema.features.clone();
    header.push(schema.label.clone());
    w.write_record(&header).map_err(csv_err)?;
    for x in instances {
        let mut rec: Vec<String> = schema
            .features
            .iter()
            .map(|f| x.get(f).map(|v| v.to_string()).unwrap_or_default())
            .collect();
        rec.push(label_name(x.label)?);
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
