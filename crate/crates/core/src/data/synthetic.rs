use std::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Feature};
use crate::error::{AnamError, Result};
use crate::rng;

/// Number of covariates drawn by [`simulate`]; the last two are pure noise.
pub const SYNTHETIC_FEATURES: usize = 10;

/// Names of the five ground-truth components, in storage order.
pub const TERM_NAMES: [&str; 5] = ["f1", "f2", "f34", "f56", "f78"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n: usize,
    /// Gamma dispersion: `Var[Y] = dispersion * mu^2`.
    pub dispersion: f64,
    pub bias: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n: 50_000,
            dispersion: 1.0,
            bias: 7.5,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(AnamError::InvalidConfig("n must be at least 1".into()));
        }
        if !(self.dispersion > 0.0 && self.dispersion.is_finite()) {
            return Err(AnamError::InvalidConfig("dispersion must be positive".into()));
        }
        if !self.bias.is_finite() {
            return Err(AnamError::InvalidConfig("bias must be finite".into()));
        }
        Ok(())
    }
}

/// Per-row generating values kept for recovery checks.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub bias: f64,
    pub mu: Vec<f64>,
    /// `[f1, f2, f34, f56, f78]` per row.
    pub terms: Vec<[f64; 5]>,
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn f1(x1: f64) -> f64 {
    x1.abs() * (8.0 * x1).sin()
}

pub fn f2(x2: f64) -> f64 {
    0.5 * (8.0 * x2).sin().powi(3) - 0.25 * (4.0 * x2).cos() + 0.25 * x2 * x2
}

pub fn f34(x3: f64, x4: f64) -> f64 {
    -(x3 + 0.5) * (-x4).exp()
}

pub fn f56(x5: f64, x6: f64) -> f64 {
    1.5 * (2.0 * PI * (x5 - 0.5) * (x6 + 0.5)).sin()
}

pub fn f78(x7: f64, x8: f64) -> f64 {
    sign(50.0 * ((10.0 * x7).sin() + 0.5)) * sign(50.0 * ((10.0 * x8).sin() - 0.5))
}

/// The five generating components at a covariate vector `x` (length >= 8).
pub fn ground_truth_terms(x: &[f64]) -> [f64; 5] {
    [
        f1(x[0]),
        f2(x[1]),
        f34(x[2], x[3]),
        f56(x[4], x[5]),
        f78(x[6], x[7]),
    ]
}

/// Draws the ten-covariate Gamma severity dataset: covariates i.i.d.
/// Uniform(-1, 1), `log mu = bias + f1 + f2 + f34 + f56 + f78`, and
/// `Y ~ Gamma(shape = 1/dispersion, scale = mu * dispersion)`.
pub fn simulate(cfg: &SyntheticConfig) -> Result<(Dataset, GroundTruth)> {
    cfg.validate()?;
    let mut rng = rng::stream(cfg.seed, rng::streams::SIMULATE);
    let shape = 1.0 / cfg.dispersion;
    let mut x = Vec::with_capacity(cfg.n * SYNTHETIC_FEATURES);
    let mut y = Vec::with_capacity(cfg.n);
    let mut mu = Vec::with_capacity(cfg.n);
    let mut terms = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let row: Vec<f64> = (0..SYNTHETIC_FEATURES)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let t = ground_truth_terms(&row);
        let m = (cfg.bias + t.iter().sum::<f64>()).exp();
        let gamma = Gamma::new(shape, m * cfg.dispersion)
            .map_err(|e| AnamError::InvalidConfig(format!("gamma parameters: {e}")))?;
        y.push(gamma.sample(&mut rng));
        x.extend_from_slice(&row);
        mu.push(m);
        terms.push(t);
    }
    let features = (1..=SYNTHETIC_FEATURES)
        .map(|i| Feature::continuous(&format!("X{i}")))
        .collect();
    let ds = Dataset::new(features, x, y, None)?;
    Ok((
        ds,
        GroundTruth {
            bias: cfg.bias,
            mu,
            terms,
        },
    ))
}
