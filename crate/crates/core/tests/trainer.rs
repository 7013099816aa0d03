mod common;

use anam_core::data::{Dataset, Feature};
use anam_core::distributions::DistributionSpec;
use anam_core::eval::{compute_metrics, fit_glm, GlmOptions};
use anam_core::lattice::Monotonicity;
use anam_core::model::{AnamModel, TermSpec};
use anam_core::train::{train, train_masked, Objective, OptimizerKind, StopReason, TrainConfig};

fn one_feature(x: Vec<f64>, y: Vec<f64>) -> Dataset {
    Dataset::new(vec![Feature::continuous("X1")], x, y, None).unwrap()
}

fn quick(lr: f64, epochs: usize) -> TrainConfig {
    TrainConfig {
        learning_rate: lr,
        max_epochs: epochs,
        batch_size: 64,
        patience: epochs,
        epsilon: 0.0,
        ..TrainConfig::default()
    }
}

#[test]
fn bias_only_converges_to_log_mean() {
    let data = common::small_data(400, 21);
    let target = (data.response().iter().sum::<f64>() / data.n() as f64).ln();
    let mut model = AnamModel::build(Vec::new(), &data, DistributionSpec::gamma(1.0), 0).unwrap();
    model.set_params(&[target - 1.0]).unwrap();
    let fitted = train(model, &data, &data, &quick(0.05, 200)).unwrap().model;
    assert!((fitted.bias() - target).abs() < 1e-3, "{} vs {target}", fitted.bias());
}

#[test]
fn bias_only_nll_matches_intercept_glm() {
    let data = common::small_data(500, 22);
    let mut model = AnamModel::build(Vec::new(), &data, DistributionSpec::gamma(1.0), 0).unwrap();
    let beta = (data.response().iter().sum::<f64>() / data.n() as f64).ln();
    model.set_params(&[beta]).unwrap();
    let objective = Objective::new(&model, 0.0, 0.0, 1000).unwrap();
    let c = objective.mean_nll(&model, &data).unwrap();

    let intercept = Dataset::new(Vec::new(), Vec::new(), data.response().to_vec(), None).unwrap();
    let glm = fit_glm(&intercept, DistributionSpec::gamma(1.0), GlmOptions::default()).unwrap();
    let mu = glm.predict(&intercept).unwrap();
    let reference = compute_metrics(data.response(), &mu, DistributionSpec::gamma(1.0), None).unwrap();
    assert!((c - reference.nll).abs() < 1e-10, "{c} vs {}", reference.nll);
}

#[test]
fn decreasing_lattice_stays_decreasing_on_increasing_data() {
    let n = 200;
    let x: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| (1.0 + 2.0 * v).exp()).collect();
    let data = one_feature(x, y);
    let spec = TermSpec::main_lattice("X1", 6, 5, Monotonicity::Decreasing);
    let model = AnamModel::build(vec![spec], &data, DistributionSpec::gamma(1.0), 3).unwrap();
    let fitted = train(model, &data, &data, &quick(0.05, 60)).unwrap().model;
    let grid = fitted.export_shape_grid("X1", 1000).unwrap();
    let worst = grid
        .values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(worst <= 1e-9, "largest increase {worst}");
    assert!(fitted.constraint_violation() <= 1e-9);
}

#[test]
fn patience_one_stops_at_epoch_three_with_epoch_one_parameters() {
    // training data pulls the bias towards 5 while validation data sits at 1,
    // so every epoch after the first worsens the validation loss
    let train_set = Dataset::new(Vec::new(), Vec::new(), vec![5f64.exp(); 40], None).unwrap();
    let val = Dataset::new(Vec::new(), Vec::new(), vec![1.0; 10], None).unwrap();
    let mut model = AnamModel::build(Vec::new(), &val, DistributionSpec::gamma(1.0), 0).unwrap();
    model.set_params(&[0.0]).unwrap();
    let cfg = TrainConfig {
        learning_rate: 0.1,
        max_epochs: 50,
        batch_size: 40,
        patience: 1,
        ..TrainConfig::default()
    };
    let run = train(model.clone(), &train_set, &val, &cfg).unwrap();
    assert_eq!(run.history.len(), 3);
    assert_eq!(run.best_epoch, 1);
    assert_eq!(run.stop_reason, StopReason::EarlyStopping);
    let first = train(model, &train_set, &val, &TrainConfig { max_epochs: 1, ..cfg }).unwrap();
    assert_eq!(run.model.params(), first.model.params());
}

#[test]
fn training_is_deterministic() {
    let data = common::small_data(300, 23);
    let (a, b) = (data.subset(&(0..200).collect::<Vec<_>>()), data.subset(&(200..300).collect::<Vec<_>>()));
    let cfg = TrainConfig {
        omega_smooth: 1e-3,
        omega_mc: 0.1,
        smooth_grid: 50,
        ..quick(1e-2, 4)
    };
    let model = AnamModel::build(common::toy_specs(2, 8, 3), &a, DistributionSpec::gamma(1.0), 4).unwrap();
    let r1 = train(model.clone(), &a, &b, &cfg).unwrap();
    let r2 = train(model, &a, &b, &cfg).unwrap();
    let bits = |m: &AnamModel| m.params().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&r1.model), bits(&r2.model));
    assert_eq!(r1.history, r2.history);
}

#[test]
fn frozen_terms_are_bit_identical() {
    let data = common::small_data(300, 24);
    let model = AnamModel::build(common::toy_specs(2, 8, 3), &data, DistributionSpec::gamma(1.0), 5).unwrap();
    let active = [false, true, false, true, false];
    let cfg = TrainConfig {
        optimizer: OptimizerKind::rmsprop(),
        ..quick(1e-2, 3)
    };
    let fitted = train_masked(model.clone(), &data, &data, &cfg, &active).unwrap().model;
    for (k, &a) in active.iter().enumerate() {
        let before = &model.terms()[k];
        let after = &fitted.terms()[k];
        let same = before.weight().to_bits() == after.weight().to_bits()
            && before.center().to_bits() == after.center().to_bits()
            && before.param_blocks() == after.param_blocks();
        assert_eq!(same, !a, "term {k}");
    }
}

#[test]
fn history_csv_header() {
    let data = common::small_data(100, 25);
    let model = AnamModel::build(vec![TermSpec::main_mlp("X1", 1, 4)], &data, DistributionSpec::gamma(1.0), 1).unwrap();
    let run = train(model, &data, &data, &quick(1e-2, 2)).unwrap();
    let csv = run.history.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("epoch,train_objective,train_nll,val_nll,smooth_pen,mc_pen"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn invalid_config_is_rejected() {
    let data = common::small_data(50, 26);
    let model = AnamModel::build(Vec::new(), &data, DistributionSpec::gamma(1.0), 0).unwrap();
    let cfg = TrainConfig {
        learning_rate: -1.0,
        ..TrainConfig::default()
    };
    assert!(train(model, &data, &data, &cfg).is_err());
}
