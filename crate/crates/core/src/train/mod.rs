//! Penalised, projected minibatch training.

mod config;
mod history;
mod objective;
mod optimizer;
mod trainer;

pub use config::{OptimizerKind, TrainConfig};
pub use history::{EpochRecord, History, StopReason};
pub use objective::{
    marginal_clarity_penalty, roughness, smoothness_penalty, ModelGrad, Objective, ObjectiveValue,
    SmoothGrid,
};
pub use optimizer::Optimizer;
pub use trainer::{train, train_masked, TrainResult};
