//! Simulate, filter, split, select, fine-tune and evaluate in one call.

use serde::{Deserialize, Serialize};

use crate::data::{preprocess, simulate, split, Dataset, GroundTruth, PreprocessOptions, SplitSpec, SyntheticConfig};
use crate::distributions::{DistributionSpec, Family};
use crate::error::Result;
use crate::eval::{compute_metrics, estimate_dispersion, fit_glm, GlmModel, GlmOptions, MetricsReport};
use crate::model::AnamModel;
use crate::rng::derive_seed;
use crate::selection::{fine_tune, select_main, select_pairs, Architecture, Keep, SelectionConfig, SelectionReport};
use crate::train::{TrainConfig, TrainResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub synthetic: SyntheticConfig,
    pub iqr_filter: bool,
    pub selection: SelectionConfig,
    pub architecture: Architecture,
    pub train: TrainConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            synthetic: SyntheticConfig::default(),
            iqr_filter: true,
            selection: SelectionConfig {
                k1: Keep::Top(8),
                k2: Keep::Top(3),
                ..SelectionConfig::default()
            },
            architecture: Architecture::default(),
            train: TrainConfig::default(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    /// Seeds every stage from the master seed.
    pub fn seeded(mut self) -> Self {
        let s = self.seed;
        self.synthetic.seed = derive_seed(s, 1);
        self.selection.seed = derive_seed(s, 2);
        self.selection.train.seed = derive_seed(s, 2);
        self.train.seed = derive_seed(s, 3);
        self
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub truth: GroundTruth,
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
    pub main_report: SelectionReport,
    pub pair_report: SelectionReport,
    pub fitted: TrainResult,
    pub glm: GlmModel,
    pub anam_metrics: MetricsReport,
    pub glm_metrics: MetricsReport,
}

/// Replaces the Gamma dispersion of `dist` with the Pearson estimate from
/// training residuals; Poisson is returned unchanged.
pub fn fitted_distribution(dist: DistributionSpec, y: &[f64], mu: &[f64], p_eff: usize) -> Result<DistributionSpec> {
    match dist.family {
        Family::Gamma { .. } => Ok(dist.with_dispersion(estimate_dispersion(y, mu, p_eff)?)),
        Family::Poisson => Ok(dist),
    }
}

/// Stores the Pearson dispersion of `model` on `train` in the model.
/// The model counts one effective parameter for the bias and one per term.
pub fn finalize_dispersion(model: &mut AnamModel, train: &Dataset) -> Result<()> {
    let mu = model.predict_batch(train)?.mu;
    let p_eff = 1 + model.terms().len();
    let dist = fitted_distribution(model.distribution(), train.response(), &mu, p_eff)?;
    model.set_distribution(dist);
    Ok(())
}

/// Test metrics of a model whose dispersion has been finalised.
pub fn evaluate_model(model: &AnamModel, test: &Dataset) -> Result<MetricsReport> {
    let mu = model.predict_batch(test)?.mu;
    compute_metrics(test.response(), &mu, model.distribution(), None)
}

pub fn evaluate_glm(glm: &GlmModel, train: &Dataset, test: &Dataset) -> Result<MetricsReport> {
    let fitted = glm.predict(train)?;
    let dist = fitted_distribution(glm.distribution, train.response(), &fitted, glm.num_coefficients())?;
    compute_metrics(test.response(), &glm.predict(test)?, dist, None)
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    let cfg = cfg.clone().seeded();
    let dist = DistributionSpec::gamma(cfg.synthetic.dispersion);
    let (raw, truth) = simulate(&cfg.synthetic)?;
    let data = if cfg.iqr_filter {
        let opts = PreprocessOptions {
            standardize: false,
            one_hot: false,
            iqr_filter: true,
        };
        preprocess(&raw, opts)?.0
    } else {
        raw
    };
    let (train, val, test) = split(&data, &SplitSpec::standard(derive_seed(cfg.seed, 4)))?;

    let main_report = select_main(&train, &val, dist, &cfg.selection)?;
    let mains = match cfg.selection.k1 {
        Keep::Top(_) => main_report.chosen_mains.clone(),
        Keep::Manual => main_report.main_scores.iter().map(|(n, _)| n.clone()).collect(),
    };
    let pair_report = select_pairs(&train, &val, &mains, dist, &cfg.selection)?;
    let mut fitted = fine_tune(
        &train,
        &val,
        &mains,
        &pair_report.chosen_pairs,
        &cfg.architecture,
        dist,
        &cfg.train,
    )?;
    finalize_dispersion(&mut fitted.model, &train)?;
    let anam_metrics = evaluate_model(&fitted.model, &test)?;
    let glm = fit_glm(&train, dist, GlmOptions::default())?;
    let glm_metrics = evaluate_glm(&glm, &train, &test)?;
    Ok(PipelineOutcome {
        truth,
        train,
        val,
        test,
        main_report,
        pair_report,
        fitted,
        glm,
        anam_metrics,
        glm_metrics,
    })
}
