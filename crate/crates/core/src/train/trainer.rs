use rand::seq::SliceRandom;

use super::config::TrainConfig;
use super::history::{EpochRecord, History, StopReason};
use super::objective::{Frozen, Objective};
use super::optimizer::Optimizer;
use crate::data::Dataset;
use crate::error::{AnamError, Result};
use crate::model::AnamModel;
use crate::rng::{stream, streams};

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub model: AnamModel,
    pub history: History,
    /// Epoch whose parameters were returned (1-based).
    pub best_epoch: usize,
    pub stop_reason: StopReason,
}

/// Trains every term of `model`.
pub fn train(model: AnamModel, train: &Dataset, val: &Dataset, cfg: &TrainConfig) -> Result<TrainResult> {
    let all = vec![true; model.terms().len()];
    train_masked(model, train, val, cfg, &all)
}

fn project(model: &mut AnamModel, active: &[bool], max_iter: usize, tol: f64) {
    for (term, &a) in model.terms.iter_mut().zip(active) {
        if a {
            term.project(max_iter, tol);
        }
    }
}

fn diverged(model: &AnamModel, params: &[f64], epoch: usize) -> AnamError {
    let mut snapshot = model.clone();
    snapshot
        .set_params(params)
        .expect("snapshot has the model's layout");
    AnamError::Divergence {
        epoch,
        snapshot: Box::new(snapshot),
    }
}

/// Trains only the terms flagged in `active`; the others keep their
/// parameters bit for bit. The bias is always trained.
pub fn train_masked(
    mut model: AnamModel,
    train: &Dataset,
    val: &Dataset,
    cfg: &TrainConfig,
    active: &[bool],
) -> Result<TrainResult> {
    cfg.validate()?;
    model.check_dataset(train)?;
    model.check_dataset(val)?;
    if train.is_empty() || val.is_empty() {
        return Err(AnamError::InvalidArgument(
            "training and validation sets must be non-empty".into(),
        ));
    }
    if active.len() != model.terms().len() {
        return Err(AnamError::InvalidArgument("one trainable flag per term".into()));
    }
    let batch_size = if cfg.batch_size > train.n() {
        log::warn!(
            "batch size {} exceeds {} training rows; using full batches",
            cfg.batch_size,
            train.n()
        );
        train.n()
    } else {
        cfg.batch_size
    };

    let objective = Objective::new(&model, cfg.omega_smooth, cfg.omega_mc, cfg.smooth_grid)?;
    let frozen_train = Frozen::new(&model, train, active)?;
    let frozen_val = Frozen::new(&model, val, active)?;

    let mut mask = vec![true];
    for (term, &a) in model.terms().iter().zip(active) {
        mask.push(a);
        let len: usize = term.param_blocks().iter().map(|b| b.len()).sum();
        mask.extend(std::iter::repeat_n(a, len));
    }

    let mut optimizer = Optimizer::new(cfg.optimizer, cfg.learning_rate, mask.len());
    let mut rng = stream(cfg.seed, streams::SHUFFLE);
    let mut order: Vec<usize> = (0..train.n()).collect();
    let mut history = History::default();
    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    let mut since_best = 0;
    let mut stop_reason = StopReason::MaxEpochs;
    let mut params = model.params();

    for epoch in 1..=cfg.max_epochs {
        let epoch_start = params.clone();
        order.shuffle(&mut rng);
        let (mut obj_sum, mut nll_sum, mut smooth_sum, mut mc_sum) = (0.0, 0.0, 0.0, 0.0);
        for batch in order.chunks(batch_size) {
            let value = match objective.evaluate_with(&model, train, batch, Some(&frozen_train)) {
                Ok(v) if v.total.is_finite() => v,
                Ok(_) | Err(AnamError::NonFiniteObjective { .. }) | Err(AnamError::NumericOverflow(_)) => {
                    return Err(diverged(&model, &params, epoch));
                }
                Err(e) => return Err(e),
            };
            let w = batch.len() as f64;
            obj_sum += value.total * w;
            nll_sum += value.nll * w;
            smooth_sum += value.smooth * w;
            mc_sum += value.mc * w;

            let grad = value.grad.flatten();
            let before = params.clone();
            optimizer.step(&mut params, &grad, &mask);
            if params.iter().any(|v| !v.is_finite()) {
                return Err(diverged(&model, &before, epoch));
            }
            model.set_params(&params)?;
            project(&mut model, active, cfg.dykstra_max_iter, cfg.dykstra_tol);
            params = model.params();
        }

        model.center_terms_masked(train, active)?;
        params = model.params();
        let val_nll = match objective.mean_nll_with(&model, val, Some(&frozen_val)) {
            Ok(v) if v.is_finite() => v,
            Ok(_) | Err(AnamError::NonFiniteObjective { .. }) | Err(AnamError::NumericOverflow(_)) => {
                return Err(diverged(&model, &epoch_start, epoch));
            }
            Err(e) => return Err(e),
        };
        let n = train.n() as f64;
        history.records.push(EpochRecord {
            epoch,
            train_objective: obj_sum / n,
            train_nll: nll_sum / n,
            val_nll,
            smooth_pen: smooth_sum / n,
            mc_pen: mc_sum / n,
        });
        log::debug!("epoch {epoch}: train {:.6} val {val_nll:.6}", obj_sum / n);

        if best.as_ref().is_none_or(|b| val_nll < b.0) {
            best = Some((val_nll, params.clone(), epoch));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > cfg.patience {
                stop_reason = StopReason::EarlyStopping;
                break;
            }
        }
        let change = params
            .iter()
            .zip(&epoch_start)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if change < cfg.epsilon {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    let (_, best_params, best_epoch) = best.expect("at least one epoch ran");
    model.set_params(&best_params)?;
    project(&mut model, active, cfg.final_max_iter, f64::EPSILON);
    model.center_terms_masked(train, active)?;
    Ok(TrainResult {
        model,
        history,
        best_epoch,
        stop_reason,
    })
}
