use std::collections::HashMap;
use std::path::Path;

use super::dataset::{Dataset, Feature};
use super::schema::{FeatureKind, Role, Schema};
use crate::error::{AnamError, Result};
use crate::fsutil::write_atomic;

/// Reads a headered, comma-separated file and validates it against `schema`.
///
/// Columns are matched by name, so the file may order them differently from
/// the schema, but the two name sets must be identical. Row numbers in errors
/// count data rows from 1.
pub fn load_csv(path: &Path, schema: &Schema) -> Result<Dataset> {
    schema.validate()?;
    if !path.exists() {
        return Err(AnamError::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let mut expected = schema.names();
    let mut found = header.clone();
    expected.sort();
    found.sort();
    if expected != found {
        return Err(AnamError::HeaderMismatch {
            expected: schema.names(),
            found: header,
        });
    }
    let position: HashMap<&str, usize> = header
        .iter()
        .enumerate()
        .map(|(i, h)| (h.as_str(), i))
        .collect();

    let features: Vec<Feature> = schema
        .columns
        .iter()
        .filter(|c| c.role == Role::Feature)
        .map(|c| Feature {
            name: c.name.clone(),
            kind: c.kind.clone(),
        })
        .collect();
    let feature_cols: Vec<usize> = features.iter().map(|f| position[f.name.as_str()]).collect();
    let response = schema
        .columns
        .iter()
        .find(|c| c.role == Role::Response)
        .expect("validated schema has a response");
    let response_col = position[response.name.as_str()];
    let exposure = schema.columns.iter().find(|c| c.role == Role::Exposure);
    let exposure_col = exposure.map(|c| position[c.name.as_str()]);

    let level_maps: Vec<Option<HashMap<&str, usize>>> = features
        .iter()
        .map(|f| match &f.kind {
            FeatureKind::Continuous => None,
            FeatureKind::Categorical { levels } => Some(
                levels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (l.as_str(), i))
                    .collect(),
            ),
        })
        .collect();

    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut e = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let cell = |col: usize| -> Result<&str> {
            let v = record.get(col).unwrap_or("");
            if v.is_empty() {
                Err(AnamError::MissingValue {
                    row,
                    column: header[col].clone(),
                })
            } else {
                Ok(v)
            }
        };
        let number = |col: usize| -> Result<f64> {
            let v = cell(col)?;
            v.parse::<f64>().map_err(|_| AnamError::ParseNumber {
                row,
                column: header[col].clone(),
                value: v.to_string(),
            })
        };
        for (&col, levels) in feature_cols.iter().zip(&level_maps) {
            match levels {
                None => x.push(number(col)?),
                Some(map) => {
                    let v = cell(col)?;
                    let idx = map.get(v).ok_or_else(|| AnamError::UnknownLevel {
                        row,
                        column: header[col].clone(),
                        value: v.to_string(),
                    })?;
                    x.push(*idx as f64);
                }
            }
        }
        let resp = number(response_col)?;
        if !resp.is_finite() {
            return Err(AnamError::InvalidResponse { row, value: resp });
        }
        y.push(resp);
        if let Some(col) = exposure_col {
            let v = number(col)?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(AnamError::InvalidExposure { row, value: v });
            }
            e.push(v);
        }
    }
    Dataset::with_names(
        features,
        x,
        y,
        exposure_col.map(|_| e),
        response.name.clone(),
        exposure.map(|c| c.name.clone()),
    )
}

/// Writes `ds` as CSV (features, response, exposure) atomically. Categorical
/// cells are written as level names; numbers use the shortest representation
/// that parses back to the same value.
pub fn write_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let schema = ds.schema();
    writer.write_record(schema.names())?;
    let mut record = Vec::with_capacity(schema.columns.len());
    for i in 0..ds.n() {
        record.clear();
        for (feat, &v) in ds.features().iter().zip(ds.row(i)) {
            match &feat.kind {
                FeatureKind::Continuous => record.push(v.to_string()),
                FeatureKind::Categorical { levels } => record.push(levels[v as usize].clone()),
            }
        }
        record.push(ds.response()[i].to_string());
        if let Some(e) = ds.exposure() {
            record.push(e[i].to_string());
        }
        writer.write_record(&record)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| AnamError::io(path, e.into_error()))?;
    write_atomic(path, &bytes)
}
