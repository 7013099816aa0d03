use std::path::Path;

use serde::{Deserialize, Serialize};

use super::architecture::Architecture;
use super::parallel::run_indexed;
use crate::data::Dataset;
use crate::distributions::DistributionSpec;
use crate::error::{AnamError, Result};
use crate::fsutil::write_atomic;
use crate::model::AnamModel;
use crate::rng::derive_seed;
use crate::train::{train, train_masked, Objective, TrainConfig, TrainResult};

const BASELINE_LABEL: u64 = 0xBA5E;
const PAIR_LABEL: u64 = 0x9A1E;
const FINAL_LABEL: u64 = 0xF1A1;

/// How many ranked terms a stage keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Keep {
    /// Report the ranking and let the caller choose.
    #[default]
    Manual,
    Top(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    pub ensemble_size: usize,
    pub k1: Keep,
    pub k2: Keep,
    /// Term sizes used while screening (stages 1 and 2).
    pub screening: Architecture,
    /// Training settings for screening; penalties are always switched off.
    pub train: TrainConfig,
    pub pair_patience: usize,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            ensemble_size: 10,
            k1: Keep::Manual,
            k2: Keep::Manual,
            screening: Architecture::default(),
            train: TrainConfig::default(),
            pair_patience: 10,
            seed: 0,
            jobs: 1,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self, p: usize) -> Result<()> {
        if self.ensemble_size == 0 {
            return Err(AnamError::InvalidConfig("ensemble size must be at least 1".into()));
        }
        if let Keep::Top(k1) = self.k1 {
            if k1 > p {
                return Err(AnamError::InvalidConfig(format!(
                    "cannot keep {k1} main effects out of {p} features"
                )));
            }
        }
        self.train.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDelta {
    pub first: String,
    pub second: String,
    pub val_nll: f64,
    /// Baseline validation NLL minus this candidate's.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SelectionReport {
    /// Average variance score per feature, descending.
    pub main_scores: Vec<(String, f64)>,
    pub members_used: usize,
    pub members_dropped: usize,
    pub chosen_mains: Vec<String>,
    pub baseline_val_nll: Option<f64>,
    /// Candidates ranked by gain, descending.
    pub pair_deltas: Vec<PairDelta>,
    pub chosen_pairs: Vec<(String, String)>,
}

impl SelectionReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn main_scores_csv(&self) -> String {
        let mut out = String::from("feature,score\n");
        for (f, s) in &self.main_scores {
            out.push_str(&format!("{f},{s}\n"));
        }
        out
    }

    pub fn pair_deltas_csv(&self) -> String {
        let mut out = String::from("first,second,val_nll,delta\n");
        for d in &self.pair_deltas {
            out.push_str(&format!("{},{},{},{}\n", d.first, d.second, d.val_nll, d.delta));
        }
        out
    }

    /// Writes `selection.json` plus the score tables into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join("selection.json"), self.to_json()?.as_bytes())?;
        if !self.main_scores.is_empty() {
            write_atomic(&dir.join("main_scores.csv"), self.main_scores_csv().as_bytes())?;
        }
        if !self.pair_deltas.is_empty() {
            write_atomic(&dir.join("pair_deltas.csv"), self.pair_deltas_csv().as_bytes())?;
        }
        Ok(())
    }
}

fn screening_config(cfg: &SelectionConfig) -> TrainConfig {
    cfg.train.without_penalties()
}

fn is_divergence(e: &AnamError) -> bool {
    matches!(
        e,
        AnamError::Divergence { .. } | AnamError::NumericOverflow(_) | AnamError::NonFiniteObjective { .. }
    )
}

fn check_collapse(dropped: usize, total: usize) -> Result<()> {
    if 2 * dropped > total {
        Err(AnamError::EnsembleCollapsed { dropped, total })
    } else {
        Ok(())
    }
}

/// Stage 1: trains an ensemble of main-effects-only models and scores each
/// feature by the variance of its shape, averaged over the members.
pub fn select_main(
    train_set: &Dataset,
    val: &Dataset,
    dist: DistributionSpec,
    cfg: &SelectionConfig,
) -> Result<SelectionReport> {
    cfg.validate(train_set.p())?;
    let names: Vec<String> = train_set.features().iter().map(|f| f.name.clone()).collect();
    let specs = cfg.screening.specs(&names, &[], false);
    let members = run_indexed(cfg.ensemble_size, cfg.jobs, |k| {
        let seed = derive_seed(cfg.seed, k as u64);
        let model = AnamModel::build(specs.clone(), train_set, dist, seed)?;
        let tc = TrainConfig {
            seed,
            ..screening_config(cfg)
        };
        let fitted = train(model, train_set, val, &tc)?.model;
        // one score per feature, in feature order
        let scores = (0..fitted.terms().len())
            .map(|t| {
                let c = fitted.term_contributions(t, train_set)?;
                Ok(c.iter().map(|v| v * v).sum::<f64>() / (train_set.n() - 1) as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(scores)
    });

    let mut totals = vec![0.0; names.len()];
    let mut used = 0;
    let mut dropped = 0;
    for (k, member) in members.into_iter().enumerate() {
        match member {
            Ok(scores) => {
                used += 1;
                for (t, s) in totals.iter_mut().zip(scores) {
                    *t += s;
                }
            }
            Err(e) if is_divergence(&e) => {
                log::warn!("ensemble member {k} dropped: {e}");
                dropped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    check_collapse(dropped, cfg.ensemble_size)?;
    let mut main_scores: Vec<(String, f64)> = names
        .into_iter()
        .zip(totals)
        .map(|(n, s)| (n, s / used as f64))
        .collect();
    main_scores.sort_by(|a, b| b.1.total_cmp(&a.1));
    let chosen_mains = match cfg.k1 {
        Keep::Top(k) => main_scores.iter().take(k).map(|(n, _)| n.clone()).collect(),
        Keep::Manual => Vec::new(),
    };
    Ok(SelectionReport {
        main_scores,
        members_used: used,
        members_dropped: dropped,
        chosen_mains,
        ..SelectionReport::default()
    })
}

/// Stage 2: trains a baseline on `mains`, then for each heredity-eligible
/// pair trains the pair term and its two parents with everything else
/// frozen, and ranks the pairs by validation gain.
pub fn select_pairs(
    train_set: &Dataset,
    val: &Dataset,
    mains: &[String],
    dist: DistributionSpec,
    cfg: &SelectionConfig,
) -> Result<SelectionReport> {
    cfg.validate(train_set.p())?;
    if mains.len() < 2 {
        return Err(AnamError::InvalidArgument(
            "pair screening needs at least two main effects".into(),
        ));
    }
    let tc = TrainConfig {
        patience: cfg.pair_patience,
        ..screening_config(cfg)
    };
    let base_seed = derive_seed(cfg.seed, BASELINE_LABEL);
    let specs = cfg.screening.specs(mains, &[], false);
    let model = AnamModel::build(specs, train_set, dist, base_seed)?;
    let baseline = train(model, train_set, val, &TrainConfig { seed: base_seed, ..tc.clone() })?.model;
    let objective = Objective::new(&baseline, 0.0, 0.0, 3)?;
    let baseline_nll = objective.mean_nll(&baseline, val)?;

    let mut candidates = Vec::new();
    for (i, a) in mains.iter().enumerate() {
        for b in &mains[i + 1..] {
            candidates.push((a.clone(), b.clone()));
        }
    }
    let results = run_indexed(candidates.len(), cfg.jobs, |c| -> Result<f64> {
        let (a, b) = &candidates[c];
        let seed = derive_seed(cfg.seed ^ PAIR_LABEL, c as u64);
        let mut model = baseline.clone();
        model.add_term(cfg.screening.pair_spec(a, b), train_set, seed)?;
        let active: Vec<bool> = model
            .terms()
            .iter()
            .map(|t| {
                let f = t.spec().kind.features();
                t.spec().kind.is_pair() || f[0] == a || f[0] == b
            })
            .collect();
        let fitted = train_masked(model, train_set, val, &TrainConfig { seed, ..tc.clone() }, &active)?;
        objective.mean_nll(&fitted.model, val)
    });

    let mut pair_deltas = Vec::new();
    let mut dropped = 0;
    for ((a, b), r) in candidates.iter().zip(results) {
        match r {
            Ok(v) => pair_deltas.push(PairDelta {
                first: a.clone(),
                second: b.clone(),
                val_nll: v,
                delta: baseline_nll - v,
            }),
            Err(e) if is_divergence(&e) => {
                log::warn!("pair candidate {a}:{b} dropped: {e}");
                dropped += 1;
            }
            Err(e) => return Err(e),
        }
    }
    check_collapse(dropped, candidates.len())?;
    pair_deltas.sort_by(|x, y| y.delta.total_cmp(&x.delta));
    let chosen_pairs = match cfg.k2 {
        Keep::Top(k) => pair_deltas
            .iter()
            .take(k)
            .map(|d| (d.first.clone(), d.second.clone()))
            .collect(),
        Keep::Manual => Vec::new(),
    };
    Ok(SelectionReport {
        chosen_mains: mains.to_vec(),
        baseline_val_nll: Some(baseline_nll),
        pair_deltas,
        chosen_pairs,
        members_dropped: dropped,
        ..SelectionReport::default()
    })
}

/// Stage 3: trains the selected terms jointly from fresh parameters with
/// penalties and constraints active.
pub fn fine_tune(
    train_set: &Dataset,
    val: &Dataset,
    mains: &[String],
    pairs: &[(String, String)],
    arch: &Architecture,
    dist: DistributionSpec,
    cfg: &TrainConfig,
) -> Result<TrainResult> {
    let specs = arch.specs(mains, pairs, true);
    let seed = derive_seed(cfg.seed, FINAL_LABEL);
    let model = AnamModel::build(specs, train_set, dist, seed)?;
    train(model, train_set, val, cfg)
}
