//! Versioned, lossless model files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Schema;
use crate::error::{AnamError, Result};
use crate::fsutil::write_atomic;
use crate::model::AnamModel;
use crate::train::{History, TrainConfig};

pub const FORMAT_VERSION: u32 = 1;

/// Summary of the training run stored alongside the parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HistoryDigest {
    pub epochs: usize,
    pub best_epoch: usize,
    pub best_val_nll: Option<f64>,
    pub final_train_objective: Option<f64>,
}

impl HistoryDigest {
    pub fn new(history: &History, best_epoch: usize) -> Self {
        HistoryDigest {
            epochs: history.len(),
            best_epoch,
            best_val_nll: history.best_val_nll(),
            final_train_objective: history.records.last().map(|r| r.train_objective),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArchive {
    pub format_version: u32,
    pub schema: Schema,
    pub model: AnamModel,
    pub train_config: Option<TrainConfig>,
    pub history: HistoryDigest,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

impl ModelArchive {
    pub fn new(schema: Schema, model: AnamModel, train_config: Option<TrainConfig>, history: HistoryDigest) -> Self {
        ModelArchive {
            format_version: FORMAT_VERSION,
            schema,
            model,
            train_config,
            history,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let probe: VersionProbe = serde_json::from_str(text)?;
        if probe.format_version > FORMAT_VERSION {
            return Err(AnamError::UnsupportedVersion {
                found: probe.format_version,
                supported: FORMAT_VERSION,
            });
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AnamError::io(path, e))?;
        ModelArchive::from_json(&text)
    }
}
