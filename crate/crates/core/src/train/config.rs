use serde::{Deserialize, Serialize};

use crate::error::{AnamError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam { beta1: f64, beta2: f64, eps: f64 },
    Rmsprop { rho: f64, eps: f64 },
}

impl OptimizerKind {
    pub fn adam() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn rmsprop() -> Self {
        OptimizerKind::Rmsprop { rho: 0.9, eps: 1e-7 }
    }
}

impl Default for OptimizerKind {
    fn default() -> Self {
        OptimizerKind::adam()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Stop when the parameter change over an epoch has norm below this.
    pub epsilon: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub omega_smooth: f64,
    pub omega_mc: f64,
    pub smooth_grid: usize,
    pub dykstra_max_iter: usize,
    pub dykstra_tol: f64,
    /// Projection iterations for the final tightening pass.
    pub final_max_iter: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            max_epochs: 5000,
            epsilon: 1e-9,
            batch_size: 1000,
            patience: 10,
            omega_smooth: 0.0,
            omega_mc: 0.0,
            smooth_grid: 1000,
            dykstra_max_iter: 10,
            dykstra_tol: 1e-7,
            final_max_iter: 1000,
            optimizer: OptimizerKind::adam(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(AnamError::InvalidConfig(msg.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.max_epochs == 0 {
            return bad("max epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if self.patience == 0 {
            return bad("patience must be at least 1");
        }
        if !(self.epsilon >= 0.0) {
            return bad("epsilon must be non-negative");
        }
        if !(self.omega_smooth >= 0.0 && self.omega_mc >= 0.0) {
            return bad("penalty weights must be non-negative");
        }
        if self.smooth_grid < 3 {
            return bad("smoothness grid needs at least 3 points");
        }
        if self.dykstra_max_iter == 0 || self.final_max_iter == 0 || !(self.dykstra_tol > 0.0) {
            return bad("projection needs at least one iteration and a positive tolerance");
        }
        match self.optimizer {
            OptimizerKind::Adam { beta1, beta2, eps } => {
                if !((0.0..1.0).contains(&beta1) && (0.0..1.0).contains(&beta2) && eps > 0.0) {
                    return bad("adam moments must lie in [0, 1) with positive eps");
                }
            }
            OptimizerKind::Rmsprop { rho, eps } => {
                if !((0.0..1.0).contains(&rho) && eps > 0.0) {
                    return bad("rmsprop rho must lie in [0, 1) with positive eps");
                }
            }
        }
        Ok(())
    }

    /// Same configuration with both penalties switched off.
    pub fn without_penalties(&self) -> Self {
        TrainConfig {
            omega_smooth: 0.0,
            omega_mc: 0.0,
            ..self.clone()
        }
    }
}
