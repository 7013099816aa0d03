mod common;

use anam_core::archive::{HistoryDigest, ModelArchive, FORMAT_VERSION};
use anam_core::distributions::DistributionSpec;
use anam_core::model::AnamModel;
use anam_core::train::History;
use anam_core::AnamError;

fn archive() -> (ModelArchive, anam_core::data::Dataset) {
    let data = common::small_data(200, 31);
    let mut model = AnamModel::build(common::toy_specs(2, 8, 3), &data, DistributionSpec::gamma(1.3), 7).unwrap();
    common::perturb(&mut model, 0.37, 2);
    model.center_terms(&data).unwrap();
    let a = ModelArchive::new(data.schema(), model, None, HistoryDigest::new(&History::default(), 0));
    (a, data)
}

#[test]
fn save_load_round_trip_is_bit_exact() {
    let (a, data) = archive();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    a.save(&path).unwrap();
    let b = ModelArchive::load(&path).unwrap();
    let rows = data.subset(&(0..100).collect::<Vec<_>>());
    let before = a.model.predict_batch(&rows).unwrap();
    let after = b.model.predict_batch(&rows).unwrap();
    for (x, y) in before.mu.iter().zip(&after.mu) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    assert_eq!(a.model.params(), b.model.params());
    let path2 = dir.path().join("m2.json");
    b.save(&path2).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
}

#[test]
fn newer_format_is_refused() {
    let (a, _) = archive();
    let text = a.to_json().unwrap().replacen(
        &format!("\"format_version\": {FORMAT_VERSION}"),
        &format!("\"format_version\": {}", FORMAT_VERSION + 1),
        1,
    );
    assert!(matches!(
        ModelArchive::from_json(&text),
        Err(AnamError::UnsupportedVersion { .. })
    ));
}

#[test]
fn missing_file_is_named() {
    let err = ModelArchive::load(std::path::Path::new("/nonexistent/model.json")).unwrap_err();
    assert!(matches!(err, AnamError::MissingFile(_)));
}
