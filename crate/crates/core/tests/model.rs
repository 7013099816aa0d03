mod common;

use anam_core::data::{Dataset, Feature, FeatureKind};
use anam_core::distributions::DistributionSpec;
use anam_core::model::{AnamModel, MultiOutputModel, TermSpec};
use anam_core::ErrorKind;
use anam_core::lattice::Monotonicity;

fn bias_only(beta: f64, data: &Dataset) -> AnamModel {
    let mut m = AnamModel::build(Vec::new(), data, DistributionSpec::gamma(1.0), 0).unwrap();
    m.set_params(&[beta]).unwrap();
    m
}

/// Zeroes every term weight and sets the bias, so all contributions vanish.
fn silenced(mut model: AnamModel, beta: f64) -> AnamModel {
    let mut p = model.params();
    p[0] = beta;
    let mut at = 1;
    for t in model.terms() {
        p[at] = 0.0;
        at += 1 + t.param_blocks().iter().map(|b| b.len()).sum::<usize>();
    }
    model.set_params(&p).unwrap();
    model
}

#[test]
fn bias_only_prediction_and_exposure_offset() {
    let data = common::small_data(50, 1);
    let model = silenced(
        AnamModel::build(common::toy_specs(2, 6, 3), &data, DistributionSpec::gamma(1.0), 3).unwrap(),
        0.7,
    );
    let row = data.row(4);
    let p = model.predict(row, None).unwrap();
    assert!((p.mu - 0.7f64.exp()).abs() < 1e-15);
    assert!(p.contributions.iter().all(|&c| c == 0.0));

    let exposure: Vec<f64> = vec![1.0; data.n()];
    let with_offset = Dataset::with_names(
        data.features().to_vec(),
        data.values().to_vec(),
        data.response().to_vec(),
        Some(exposure),
        "Y".into(),
        Some("E".into()),
    )
    .unwrap();
    let model = silenced(
        AnamModel::build(common::toy_specs(2, 6, 3), &with_offset, DistributionSpec::gamma(1.0), 3).unwrap(),
        0.7,
    );
    let p = model.predict(row, Some(0.5)).unwrap();
    assert!((p.mu - 0.5 * 0.7f64.exp()).abs() < 1e-15);
}

#[test]
fn large_eta_is_clipped() {
    let data = common::small_data(20, 2);
    let model = bias_only(100.0, &data);
    assert_eq!(model.predict(data.row(0), None).unwrap().mu, 1e30);
}

#[test]
fn missing_exposure_is_rejected() {
    let data = common::small_data(20, 2);
    let with_offset = Dataset::with_names(
        data.features().to_vec(),
        data.values().to_vec(),
        data.response().to_vec(),
        Some(vec![1.0; data.n()]),
        "Y".into(),
        Some("E".into()),
    )
    .unwrap();
    let model = bias_only(0.0, &with_offset);
    let err = model.predict(data.row(0), None).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Data);
}

#[test]
fn centring_preserves_predictions_and_is_idempotent() {
    let data = common::small_data(300, 3);
    let mut model = AnamModel::build(common::toy_specs(2, 8, 3), &data, DistributionSpec::gamma(1.0), 5).unwrap();
    common::perturb(&mut model, 0.5, 9);
    let before = model.predict_batch(&data).unwrap().mu;
    model.center_terms(&data).unwrap();
    let after = model.predict_batch(&data).unwrap().mu;
    for (a, b) in before.iter().zip(&after) {
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }
    for t in 0..model.terms().len() {
        let c = model.term_contributions(t, &data).unwrap();
        assert!((c.iter().sum::<f64>() / c.len() as f64).abs() < 1e-12);
    }
    let centres: Vec<f64> = model.terms().iter().map(|t| t.center()).collect();
    model.center_terms(&data).unwrap();
    for (t, c) in model.terms().iter().zip(centres) {
        assert!((t.center() - c).abs() < 1e-12);
    }
}

#[test]
fn centring_two_rows() {
    // a one-layer linear MLP on X1 returns w * x1 + b; with rows x1 = {0, 1}
    // and the output scaled to {1, 3} the centre is 2
    let features = vec![Feature::continuous("X1")];
    let data = Dataset::new(features, vec![0.0, 1.0], vec![1.0, 2.0], None).unwrap();
    let mut model = AnamModel::build(vec![TermSpec::main_mlp("X1", 0, 1)], &data, DistributionSpec::gamma(1.0), 0).unwrap();
    // params: bias, term weight, mlp weight, mlp bias
    model.set_params(&[0.0, 1.0, 2.0, 1.0]).unwrap();
    assert_eq!(model.raw_term_values(0, &data).unwrap(), vec![1.0, 3.0]);
    model.center_terms(&data).unwrap();
    assert_eq!(model.terms()[0].center(), 2.0);
    assert_eq!(model.term_contributions(0, &data).unwrap(), vec![-1.0, 1.0]);
}

#[test]
fn importance_examples() {
    let features = vec![Feature::continuous("X1"), Feature::continuous("X2")];
    let data = Dataset::new(features, vec![0.0, 5.0, 1.0, 5.0], vec![1.0, 2.0], None).unwrap();
    let specs = vec![TermSpec::main_mlp("X1", 0, 1), TermSpec::main_mlp("X2", 0, 1)];
    let mut model = AnamModel::build(specs, &data, DistributionSpec::gamma(1.0), 0).unwrap();
    // X1 term maps {0, 1} to {-1, 1}; X2 is constant on the sample
    model.set_params(&[0.0, 1.0, 2.0, -1.0, 1.0, 3.0, 0.0]).unwrap();
    model.center_terms(&data).unwrap();
    let scores = model.importance(&data).unwrap();
    assert_eq!(scores[0].0, "X1");
    assert!((scores[0].1 - 2.0).abs() < 1e-12);
    assert_eq!(scores[1], ("X2".to_string(), 0.0));
    let one_row = data.subset(&[0]);
    assert!(model.importance(&one_row).is_err());
}

#[test]
fn shape_grid_layout() {
    let data = common::small_data(200, 4);
    let model = AnamModel::build(common::toy_specs(1, 4, 3), &data, DistributionSpec::gamma(1.0), 1).unwrap();
    let grid = model.export_shape_grid("X1", 5).unwrap();
    let (lo, hi) = model.feature_range(0);
    let xs: Vec<f64> = grid.points.iter().map(|p| p[0]).collect();
    let step = (hi - lo) / 4.0;
    for (k, x) in xs.iter().enumerate() {
        assert!((x - (lo + k as f64 * step)).abs() < 1e-12);
    }
    let pair = model.export_shape_grid("X4:X3", 3).unwrap();
    assert_eq!(pair.values.len(), 9);
    assert_eq!(pair.points[1][0], pair.points[0][0]);
    assert!(pair.points[1][1] > pair.points[0][1]);
    assert!(pair.to_csv().starts_with("input1,input2,value\n"));
    assert_eq!(model.export_shape_grid("X9", 5).unwrap_err().kind(), ErrorKind::Usage);
}

#[test]
fn categorical_grid_enumerates_levels() {
    let levels: Vec<String> = ["red", "green", "blue"].iter().map(|s| s.to_string()).collect();
    let features = vec![Feature {
        name: "C".into(),
        kind: FeatureKind::Categorical { levels },
    }];
    let data = Dataset::new(features, vec![0.0, 1.0, 2.0, 1.0], vec![1.0, 2.0, 3.0, 4.0], None).unwrap();
    let model = AnamModel::build(
        vec![TermSpec::main_lattice("C", 3, 2, Monotonicity::None)],
        &data,
        DistributionSpec::gamma(1.0),
        0,
    )
    .unwrap();
    let grid = model.export_shape_grid("C", 100).unwrap();
    assert_eq!(grid.values.len(), 3);
    let csv = grid.to_csv();
    assert!(csv.lines().nth(1).unwrap().starts_with("red,"));
}

#[test]
fn heredity_and_duplicates_are_rejected() {
    let data = common::small_data(50, 5);
    let orphan = vec![TermSpec::main_mlp("X1", 1, 4), TermSpec::pair_mlp("X1", "X2", 1, 4)];
    assert!(AnamModel::build(orphan, &data, DistributionSpec::gamma(1.0), 0).is_err());
    let twice = vec![
        TermSpec::main_mlp("X1", 1, 4),
        TermSpec::main_mlp("X2", 1, 4),
        TermSpec::pair_mlp("X1", "X2", 1, 4),
        TermSpec::pair_mlp("X2", "X1", 1, 4),
    ];
    assert!(AnamModel::build(twice, &data, DistributionSpec::gamma(1.0), 0).is_err());
    let unknown = vec![TermSpec::main_mlp("Z", 1, 4)];
    assert!(AnamModel::build(unknown, &data, DistributionSpec::gamma(1.0), 0).is_err());
}

#[test]
fn same_seed_builds_identical_models() {
    let data = common::small_data(50, 6);
    let a = AnamModel::build(common::toy_specs(2, 8, 3), &data, DistributionSpec::gamma(1.0), 11).unwrap();
    let b = AnamModel::build(common::toy_specs(2, 8, 3), &data, DistributionSpec::gamma(1.0), 11).unwrap();
    let c = AnamModel::build(common::toy_specs(2, 8, 3), &data, DistributionSpec::gamma(1.0), 12).unwrap();
    assert_eq!(a.params(), b.params());
    assert_ne!(a.params(), c.params());
}

#[test]
fn multi_output_reduces_to_single_model() {
    let data = common::small_data(100, 7);
    let mut mean = AnamModel::build(common::toy_specs(1, 4, 3), &data, DistributionSpec::gamma(1.0), 2).unwrap();
    common::perturb(&mut mean, 0.2, 1);
    let single = MultiOutputModel::new(vec![mean.clone()]).unwrap();
    let row = data.row(3);
    assert_eq!(single.predict(row, None).unwrap(), vec![mean.predict(row, None).unwrap().mu]);

    let scale = bias_only(0.3, &data);
    let pair = MultiOutputModel::new(vec![mean, scale]).unwrap();
    let a = pair.predict(data.row(0), None).unwrap()[1];
    let b = pair.predict(data.row(1), None).unwrap()[1];
    assert_eq!(a, b);
    assert!(pair.gamma_nll(data.response()[0], data.row(0), None).unwrap().is_finite());
}
