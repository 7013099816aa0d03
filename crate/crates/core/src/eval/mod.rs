//! Held-out metrics and the GLM reference model.

mod glm;
mod metrics;

pub use glm::{fit_glm, GlmModel, GlmOptions};
pub use metrics::{compute_metrics, estimate_dispersion, MetricsReport};
