mod common;

use anam_core::data::Dataset;
use anam_core::distributions::DistributionSpec;
use anam_core::selection::{select_main, Architecture, Keep, SelectionConfig};
use anam_core::train::TrainConfig;

fn config() -> SelectionConfig {
    SelectionConfig {
        ensemble_size: 2,
        k1: Keep::Top(2),
        screening: Architecture {
            main_layers: 1,
            main_width: 8,
            ..Architecture::default()
        },
        train: TrainConfig {
            learning_rate: 1e-2,
            max_epochs: 60,
            batch_size: 100,
            patience: 60,
            ..TrainConfig::default()
        },
        seed: 3,
        ..SelectionConfig::default()
    }
}

#[test]
fn constant_response_gives_vanishing_scores() {
    let data = common::small_data(400, 41);
    let flat = data.with_response(vec![250.0; data.n()]).unwrap();
    let (train, val) = (
        flat.subset(&(0..300).collect::<Vec<_>>()),
        flat.subset(&(300..400).collect::<Vec<_>>()),
    );
    let report = select_main(&train, &val, DistributionSpec::gamma(1.0), &config()).unwrap();
    assert_eq!(report.main_scores.len(), 10);
    for (name, score) in &report.main_scores {
        assert!(*score < 1e-3, "{name}: {score}");
    }
    assert_eq!(report.chosen_mains.len(), 2);
}

#[test]
fn reports_are_deterministic_and_written() {
    let data = common::small_data(300, 42);
    let (train, val): (Dataset, Dataset) = (
        data.subset(&(0..200).collect::<Vec<_>>()),
        data.subset(&(200..300).collect::<Vec<_>>()),
    );
    let cfg = SelectionConfig {
        train: TrainConfig {
            max_epochs: 3,
            ..config().train
        },
        ..config()
    };
    let a = select_main(&train, &val, DistributionSpec::gamma(1.0), &cfg).unwrap();
    let b = select_main(&train, &val, DistributionSpec::gamma(1.0), &SelectionConfig { jobs: 2, ..cfg }).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let csv = a.main_scores_csv();
    assert!(csv.starts_with("feature,score\n"));
    assert_eq!(csv.lines().count(), 11);
    let dir = tempfile::tempdir().unwrap();
    a.write(dir.path()).unwrap();
    assert!(dir.path().join("selection.json").exists());
    assert!(dir.path().join("main_scores.csv").exists());
    // a stage-1 report carries no pair table
    assert!(!dir.path().join("pair_deltas.csv").exists());
}
