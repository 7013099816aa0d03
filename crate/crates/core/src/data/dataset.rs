use serde::{Deserialize, Serialize};

use super::schema::{ColumnSpec, FeatureKind, Role, Schema};
use crate::error::{AnamError, Result};

/// A model input column. Categorical values are stored as level indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
}

impl Feature {
    pub fn continuous(name: &str) -> Self {
        Feature {
            name: name.to_string(),
            kind: FeatureKind::Continuous,
        }
    }
}

/// Immutable, validated observations: an `n x p` feature matrix (row-major),
/// a response vector and an optional exposure vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Feature>,
    x: Vec<f64>,
    y: Vec<f64>,
    exposure: Option<Vec<f64>>,
    response_name: String,
    exposure_name: Option<String>,
}

impl Dataset {
    /// Builds a dataset from row-major feature values.
    pub fn new(
        features: Vec<Feature>,
        x: Vec<f64>,
        y: Vec<f64>,
        exposure: Option<Vec<f64>>,
    ) -> Result<Self> {
        Self::with_names(features, x, y, exposure, "y".into(), None)
    }

    pub fn with_names(
        features: Vec<Feature>,
        x: Vec<f64>,
        y: Vec<f64>,
        exposure: Option<Vec<f64>>,
        response_name: String,
        exposure_name: Option<String>,
    ) -> Result<Self> {
        let n = y.len();
        let p = features.len();
        if x.len() != n * p {
            return Err(AnamError::InvalidArgument(format!(
                "feature matrix has {} values, expected {n} x {p}",
                x.len()
            )));
        }
        for (row, &v) in y.iter().enumerate() {
            if !v.is_finite() {
                return Err(AnamError::InvalidResponse { row, value: v });
            }
        }
        if let Some(e) = &exposure {
            if e.len() != n {
                return Err(AnamError::InvalidArgument(
                    "exposure length differs from response length".into(),
                ));
            }
            for (row, &v) in e.iter().enumerate() {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(AnamError::InvalidExposure { row, value: v });
                }
            }
        }
        for (i, chunk) in x.chunks(p.max(1)).enumerate().take(n) {
            for (feat, &v) in features.iter().zip(chunk) {
                let ok = match &feat.kind {
                    FeatureKind::Continuous => v.is_finite(),
                    FeatureKind::Categorical { levels } => {
                        v >= 0.0 && v.fract() == 0.0 && (v as usize) < levels.len()
                    }
                };
                if !ok {
                    return Err(AnamError::InvalidArgument(format!(
                        "row {i}, column '{}': invalid value {v}",
                        feat.name
                    )));
                }
            }
        }
        let exposure_name = exposure
            .as_ref()
            .map(|_| exposure_name.unwrap_or_else(|| "exposure".into()));
        Ok(Dataset {
            features,
            x,
            y,
            exposure,
            response_name,
            exposure_name,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.p();
        &self.x[i * p..(i + 1) * p]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.x[i * self.p() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n()).map(|i| self.value(i, j)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn response(&self) -> &[f64] {
        &self.y
    }

    pub fn exposure(&self) -> Option<&[f64]> {
        self.exposure.as_deref()
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn exposure_name(&self) -> Option<&str> {
        self.exposure_name.as_deref()
    }

    /// Rows `indices` in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let p = self.p();
        let mut x = Vec::with_capacity(indices.len() * p);
        for &i in indices {
            x.extend_from_slice(self.row(i));
        }
        Dataset {
            features: self.features.clone(),
            x,
            y: indices.iter().map(|&i| self.y[i]).collect(),
            exposure: self
                .exposure
                .as_ref()
                .map(|e| indices.iter().map(|&i| e[i]).collect()),
            response_name: self.response_name.clone(),
            exposure_name: self.exposure_name.clone(),
        }
    }

    /// Same observations with a different response vector.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Dataset> {
        Dataset::with_names(
            self.features.clone(),
            self.x.clone(),
            y,
            self.exposure.clone(),
            self.response_name.clone(),
            self.exposure_name.clone(),
        )
    }

    /// Schema describing this dataset's columns (features, then response,
    /// then exposure).
    pub fn schema(&self) -> Schema {
        let mut columns: Vec<ColumnSpec> = self
            .features
            .iter()
            .map(|f| ColumnSpec {
                name: f.name.clone(),
                kind: f.kind.clone(),
                role: Role::Feature,
            })
            .collect();
        columns.push(ColumnSpec::continuous(&self.response_name, Role::Response));
        if let Some(name) = &self.exposure_name {
            columns.push(ColumnSpec::continuous(name, Role::Exposure));
        }
        Schema { columns }
    }

    /// Observed `[min, max]` of a feature column.
    pub fn range(&self, j: usize) -> (f64, f64) {
        (0..self.n()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let v = self.value(i, j);
            (lo.min(v), hi.max(v))
        })
    }
}
