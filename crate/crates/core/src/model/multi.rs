use super::anam::AnamModel;
use crate::distributions::gamma_nll;
use crate::error::{AnamError, Result};

/// Several additive assemblies over one schema, each producing one output
/// with its own terms, bias and link.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiOutputModel {
    outputs: Vec<AnamModel>,
}

impl MultiOutputModel {
    pub fn new(outputs: Vec<AnamModel>) -> Result<Self> {
        let first = outputs
            .first()
            .ok_or_else(|| AnamError::InvalidModel("need at least one output".into()))?;
        if outputs.iter().any(|m| m.features() != first.features()) {
            return Err(AnamError::SchemaMismatch(
                "all outputs must share the same features".into(),
            ));
        }
        Ok(MultiOutputModel { outputs })
    }

    pub fn outputs(&self) -> &[AnamModel] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// One prediction per output. `exposure` is passed to every output that
    /// uses an offset.
    pub fn predict(&self, x: &[f64], exposure: Option<f64>) -> Result<Vec<f64>> {
        self.outputs
            .iter()
            .map(|m| {
                let e = if m.uses_offset() { exposure } else { None };
                Ok(m.predict(x, e)?.mu)
            })
            .collect()
    }

    /// Gamma negative log density of `y` with output 0 as the mean and
    /// output 1 as the dispersion.
    pub fn gamma_nll(&self, y: f64, x: &[f64], exposure: Option<f64>) -> Result<f64> {
        if self.outputs.len() != 2 {
            return Err(AnamError::InvalidModel(
                "gamma heads need exactly two outputs (mean, dispersion)".into(),
            ));
        }
        let heads = self.predict(x, exposure)?;
        Ok(gamma_nll(y, heads[0], heads[1])?.0)
    }
}
