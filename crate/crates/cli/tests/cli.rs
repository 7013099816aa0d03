use std::path::Path;
use std::process::{Command, Output};

fn anam(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anam"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn anam")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = anam(args, cwd);
    assert!(
        out.status.success(),
        "anam {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn prepared(dir: &Path) {
    ok(&["simulate", "--n", "1200", "--seed", "3", "--out", "sim"], dir);
    ok(&["preprocess", "--data", "sim/data.csv", "--seed", "3", "--out", "prep"], dir);
}

const FIT: [&str; 4] = ["--train", "prep/train.csv", "--val", "prep/val.csv"];

#[test]
fn simulate_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["simulate", "--n", "500", "--seed", "9", "--out", "a"], dir.path());
    ok(&["simulate", "--n", "500", "--seed", "9", "--out", "b"], dir.path());
    ok(&["simulate", "--n", "500", "--seed", "10", "--out", "c"], dir.path());
    for file in ["data.csv", "schema.json", "truth.csv"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let a = std::fs::read(dir.path().join("a/data.csv")).unwrap();
    let c = std::fs::read(dir.path().join("c/data.csv")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn train_evaluate_predict_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    prepared(d);
    let mut args = vec!["train"];
    args.extend(FIT);
    args.extend([
        "--mains", "X1,X2,X3,X4", "--pairs", "X3:X4", "--monotone", "X3=decreasing",
        "--epochs", "5", "--seed", "1", "--out", "m/model.json",
    ]);
    ok(&args, d);
    assert!(d.join("m/model.history.csv").exists());

    let report = ok(
        &["evaluate", "--model", "m/model.json", "--data", "prep/test.csv", "--glm-train", "prep/train.csv"],
        d,
    );
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "model,n_test,family,dispersion,nll,rmse,mae");
    assert_eq!(lines.len(), 3);
    for row in &lines[1..] {
        for v in row.split(',').skip(3) {
            assert!(v.parse::<f64>().unwrap().is_finite(), "{row}");
        }
    }

    ok(&["predict", "--model", "m/model.json", "--data", "prep/test.csv", "--out", "p1.csv"], d);
    let header = std::fs::read_to_string(d.join("p1.csv")).unwrap();
    assert_eq!(header.lines().next(), Some("mu,eta,X1,X2,X3,X4,X3:X4"));

    ok(&["export-shapes", "--model", "m/model.json", "--resolution", "50", "--pair-resolution", "10", "--out", "s"], d);
    ok(&["plot", "--shapes", "s", "--out", "svg"], d);
    for name in ["shape_X1.svg", "shape_X3_X4.svg"] {
        let svg = std::fs::read_to_string(d.join("svg").join(name)).unwrap();
        assert!(svg.starts_with("<svg"), "{name}");
    }
}

#[test]
fn reloaded_model_predicts_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    prepared(d);
    let mut args = vec!["train"];
    args.extend(FIT);
    args.extend(["--epochs", "3", "--seed", "2", "--out", "a.json"]);
    ok(&args, d);
    ok(&["predict", "--model", "a.json", "--data", "prep/test.csv", "--out", "p1.csv"], d);
    ok(&["predict", "--model", "a.json", "--data", "prep/test.csv", "--out", "p2.csv"], d);
    assert_eq!(
        std::fs::read(d.join("p1.csv")).unwrap(),
        std::fs::read(d.join("p2.csv")).unwrap()
    );
    // same seed, same model
    let mut again = vec!["train"];
    again.extend(FIT);
    again.extend(["--epochs", "3", "--seed", "2", "--out", "b.json"]);
    ok(&again, d);
    assert_eq!(
        std::fs::read(d.join("a.json")).unwrap(),
        std::fs::read(d.join("b.json")).unwrap()
    );
}

#[test]
fn selection_files_chain_between_stages() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    prepared(d);
    let mut s1 = vec!["select-main"];
    s1.extend(FIT);
    s1.extend(["--ensemble", "2", "--epochs", "3", "--top-mains", "3", "--out", "s1"]);
    ok(&s1, d);
    let mut s2 = vec!["select-pairs"];
    s2.extend(FIT);
    s2.extend(["--selection", "s1/selection.json", "--epochs", "2", "--top-pairs", "1", "--out", "s2"]);
    ok(&s2, d);
    let deltas = std::fs::read_to_string(d.join("s2/pair_deltas.csv")).unwrap();
    assert_eq!(deltas.lines().count(), 1 + 3);
    let mut t = vec!["train"];
    t.extend(FIT);
    t.extend(["--selection", "s2/selection.json", "--epochs", "2", "--out", "m.json"]);
    ok(&t, d);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(anam(&["train", "--bogus"], d).status.code(), Some(2));
    assert_eq!(
        anam(&["predict", "--model", "missing.json", "--data", "x.csv", "--out", "y.csv"], d).status.code(),
        Some(5)
    );
    std::fs::write(d.join("bad.json"), r#"{"trian": {}}"#).unwrap();
    assert_eq!(
        anam(&["--config", "bad.json", "simulate", "--out", "o"], d).status.code(),
        Some(2)
    );
    prepared(d);
    std::fs::write(d.join("prep/broken.csv"), "X1,X2\n1,2\n").unwrap();
    let out = anam(&["select-main", "--train", "prep/broken.csv", "--val", "prep/val.csv", "--out", "o"], d);
    assert_eq!(out.status.code(), Some(3));
}
